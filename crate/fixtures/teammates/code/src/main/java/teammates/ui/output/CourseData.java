package teammates.ui.output;

public class CourseData {
}
