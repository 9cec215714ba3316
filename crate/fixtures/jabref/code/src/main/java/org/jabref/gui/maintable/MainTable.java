package org.jabref.gui.maintable;

public class MainTable {
}
