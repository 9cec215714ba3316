package org.jabref.cli;

public class JabRefCLI {
}
