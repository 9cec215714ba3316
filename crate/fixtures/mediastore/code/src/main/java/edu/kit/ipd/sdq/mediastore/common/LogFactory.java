package edu.kit.ipd.sdq.mediastore.common;

public class LogFactory {
}
