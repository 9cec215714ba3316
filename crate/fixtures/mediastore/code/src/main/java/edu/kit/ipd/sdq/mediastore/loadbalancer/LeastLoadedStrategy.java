package edu.kit.ipd.sdq.mediastore.loadbalancer;

public class LeastLoadedStrategy {
}
