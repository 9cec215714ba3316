package teammates.main;

public class Application {
}
