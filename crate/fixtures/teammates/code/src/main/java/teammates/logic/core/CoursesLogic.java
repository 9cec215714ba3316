package teammates.logic.core;

public class CoursesLogic {
}
