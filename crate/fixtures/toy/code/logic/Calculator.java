package toy.logic;

public class Calculator {
}
