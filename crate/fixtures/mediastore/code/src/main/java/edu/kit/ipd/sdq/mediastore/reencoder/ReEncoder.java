package edu.kit.ipd.sdq.mediastore.reencoder;

public class ReEncoder {
}
