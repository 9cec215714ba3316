package teammates.lnp.util;

public class JMeterElements {
}
