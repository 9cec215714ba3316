package edu.kit.ipd.sdq.mediastore.reencoder;

public class Mp3Encoder {
}
