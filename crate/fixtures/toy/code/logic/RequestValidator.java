package toy.logic;

public class RequestValidator {
}
