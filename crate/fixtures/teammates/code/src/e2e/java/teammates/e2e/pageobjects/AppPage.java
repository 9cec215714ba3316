package teammates.e2e.pageobjects;

public class AppPage {
}
