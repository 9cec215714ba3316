package org.jabref.model.database;

public class BibDatabase {
}
