package edu.kit.ipd.sdq.mediastore.userdbadapter;

public class UserDBAdapter {
}
