package edu.kit.ipd.sdq.mediastore.facade;

public class Facade {
}
