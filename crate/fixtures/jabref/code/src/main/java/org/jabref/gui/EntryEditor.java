package org.jabref.gui;

public class EntryEditor {
}
