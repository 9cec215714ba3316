package edu.kit.ipd.sdq.mediastore.watermarking.tag;

public class Id3TagWriter {
}
