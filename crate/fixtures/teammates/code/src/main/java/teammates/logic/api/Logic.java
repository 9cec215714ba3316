package teammates.logic.api;

public class Logic {
}
