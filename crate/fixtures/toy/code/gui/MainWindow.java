package toy.gui;

public class MainWindow {
}
