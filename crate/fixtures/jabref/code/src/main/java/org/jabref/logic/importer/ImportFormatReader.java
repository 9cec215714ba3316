package org.jabref.logic.importer;

public class ImportFormatReader {
}
