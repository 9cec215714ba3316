package teammates.main;

public class EntryPoint {
}
