package teammates.common.util;

public class Config {
}
