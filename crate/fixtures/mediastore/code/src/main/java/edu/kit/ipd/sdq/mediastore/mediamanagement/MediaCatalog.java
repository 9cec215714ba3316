package edu.kit.ipd.sdq.mediastore.mediamanagement;

public class MediaCatalog {
}
