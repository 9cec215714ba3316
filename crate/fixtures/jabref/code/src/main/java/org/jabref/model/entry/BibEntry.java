package org.jabref.model.entry;

public class BibEntry {
}
