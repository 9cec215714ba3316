package edu.kit.ipd.sdq.mediastore.watermarking.parallel;

public class ParallelWatermarkingBean {
}
