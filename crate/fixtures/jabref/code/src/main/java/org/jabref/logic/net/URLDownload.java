package org.jabref.logic.net;

public class URLDownload {
}
