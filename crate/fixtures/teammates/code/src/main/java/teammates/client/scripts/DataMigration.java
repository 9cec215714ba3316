package teammates.client.scripts;

public class DataMigration {
}
