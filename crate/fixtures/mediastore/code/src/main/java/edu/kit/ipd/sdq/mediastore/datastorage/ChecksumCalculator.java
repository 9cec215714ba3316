package edu.kit.ipd.sdq.mediastore.datastorage;

public class ChecksumCalculator {
}
