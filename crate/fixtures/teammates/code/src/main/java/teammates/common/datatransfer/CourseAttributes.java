package teammates.common.datatransfer;

public class CourseAttributes {
}
