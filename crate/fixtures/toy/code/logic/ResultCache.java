package toy.logic;

public class ResultCache {
}
