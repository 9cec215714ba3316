package org.jabref.cli;

public class ArgumentProcessor {
}
