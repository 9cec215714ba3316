package edu.kit.ipd.sdq.mediastore.database;

public class JdbcSettings {
}
