package edu.kit.ipd.sdq.mediastore.mediaaccess;

public class MediaAccess {
}
