package org.jabref.preferences;

public class JabRefPreferences {
}
