package edu.kit.ipd.sdq.mediastore.datastorage.file;

public class DirectoryLayout {
}
