package edu.kit.ipd.sdq.mediastore.packaging;

public class ManifestWriter {
}
