package edu.kit.ipd.sdq.mediastore.test;

public class LoadBalancerTest {
}
