package teammates.client.util;

public class ClientProperties {
}
