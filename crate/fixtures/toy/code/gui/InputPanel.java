package toy.gui;

public class InputPanel {
}
