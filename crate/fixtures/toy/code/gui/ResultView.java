package toy.gui;

public class ResultView {
}
