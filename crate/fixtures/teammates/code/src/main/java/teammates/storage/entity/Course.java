package teammates.storage.entity;

public class Course {
}
