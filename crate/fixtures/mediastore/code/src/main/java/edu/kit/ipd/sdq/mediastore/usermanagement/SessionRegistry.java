package edu.kit.ipd.sdq.mediastore.usermanagement;

public class SessionRegistry {
}
