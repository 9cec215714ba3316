package edu.kit.ipd.sdq.mediastore.common;

public class MediaStoreException {
}
