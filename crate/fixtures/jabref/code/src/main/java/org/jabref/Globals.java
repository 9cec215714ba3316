package org.jabref;

public class Globals {
}
