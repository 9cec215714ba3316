package teammates.storage.api;

public class CoursesDb {
}
