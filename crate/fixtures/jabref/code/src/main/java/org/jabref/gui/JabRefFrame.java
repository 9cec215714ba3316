package org.jabref.gui;

public class JabRefFrame {
}
