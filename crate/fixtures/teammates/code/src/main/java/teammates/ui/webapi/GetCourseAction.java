package teammates.ui.webapi;

public class GetCourseAction {
}
