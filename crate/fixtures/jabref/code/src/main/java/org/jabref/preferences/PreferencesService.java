package org.jabref.preferences;

public class PreferencesService {
}
