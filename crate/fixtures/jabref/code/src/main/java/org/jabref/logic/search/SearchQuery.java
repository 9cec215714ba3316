package org.jabref.logic.search;

public class SearchQuery {
}
