package edu.kit.ipd.sdq.mediastore.watermarking.audio;

public class AudioWatermarking {
}
