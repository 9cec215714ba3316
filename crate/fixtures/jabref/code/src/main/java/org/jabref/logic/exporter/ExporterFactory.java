package org.jabref.logic.exporter;

public class ExporterFactory {
}
