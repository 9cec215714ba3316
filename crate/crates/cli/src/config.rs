//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are
//! case-sensitive; a repeated key keeps its last value. Relative paths are
//! resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub const KNOWN_KEYS: &[&str] = &[
    // run inputs
    "project",
    "sad",
    "sam",
    "code-root",
    "out",
    "gold-sad-sam",
    "gold-sam-code",
    "gold-sad-code",
    // extraction
    "mode",
    "aggregation",
    "threshold",
    "casing",
    // llm gateway
    "llm-mode",
    "cassette-path",
    "provider-url",
    "model",
    "embedding-model",
    "temperature",
    "seed",
    // entity matching
    "jaro-winkler-threshold",
    "levenshtein-threshold",
    "cosine-threshold",
    // code linking
    "link-threshold",
    "dominance-band",
    "heuristic-weights",
    // scanning
    "source-roots",
    "extensions",
    "exclude-globs",
    "exclude-test-code",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("config line {line}: expected `key=value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config line {line}: invalid value for `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, (String, usize)>,
    base_dir: PathBuf,
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    /// A path value resolved against the config file's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.base_dir.join(v))
    }

    pub fn parse<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((value, line)) => value.parse().map(Some).map_err(|e: T::Err| ConfigError::Value {
                line: *line,
                key: key.to_string(),
                message: e.to_string(),
            }),
        }
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some((value, line)) => match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(Some(true)),
                "false" | "no" | "0" => Ok(Some(false)),
                _ => Err(ConfigError::Value {
                    line: *line,
                    key: key.to_string(),
                    message: format!("`{value}` is not a boolean"),
                }),
            },
        }
    }

    /// A comma-separated list; empty items are dropped.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
    }
}

/// Parses config text. Returns the config and one warning per ignored line.
pub fn parse_config(text: &str, base_dir: impl Into<PathBuf>) -> Result<(Config, Vec<String>), ConfigError> {
    let mut config = Config {
        values: BTreeMap::new(),
        base_dir: base_dir.into(),
    };
    let mut warnings = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: trimmed.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: trimmed.to_string(),
            });
        }
        if !KNOWN_KEYS.contains(&key) {
            warnings.push(format!("config line {line}: unknown key `{key}` ignored"));
            continue;
        }
        config.values.insert(key.to_string(), (value.trim().to_string(), line));
    }
    Ok((config, warnings))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(Config, Vec<String>), ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_paths() {
        let (c, warnings) = parse_config("# run\nthreshold=0.5\n\nsad = docs/sad.txt \n", "/base").unwrap();
        assert!(warnings.is_empty());
        assert_eq!(c.parse::<f64>("threshold").unwrap(), Some(0.5));
        assert_eq!(c.path("sad"), Some(PathBuf::from("/base/docs/sad.txt")));
        assert_eq!(c.parse::<f64>("link-threshold").unwrap(), None);
    }

    #[test]
    fn unknown_keys_warn() {
        let (c, warnings) = parse_config("colour=blue\nthreshold=0.7", ".").unwrap();
        assert_eq!(warnings, ["config line 1: unknown key `colour` ignored"]);
        assert_eq!(c.get("threshold"), Some("0.7"));
        assert_eq!(c.get("colour"), None);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        assert_eq!(
            parse_config("threshold=0.5\njust text\n", ".").unwrap_err(),
            ConfigError::Syntax {
                line: 2,
                text: "just text".into()
            }
        );
        assert!(matches!(
            parse_config("=3", "."),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn bad_values_name_the_line() {
        let (c, _) = parse_config("\nthreshold=high", ".").unwrap();
        let err = c.parse::<f64>("threshold").unwrap_err();
        assert!(matches!(err, ConfigError::Value { line: 2, .. }));
        let (c, _) = parse_config("exclude-test-code=maybe", ".").unwrap();
        assert!(c.bool("exclude-test-code").is_err());
    }

    #[test]
    fn lists_and_last_value_wins() {
        let (c, _) = parse_config("extensions=java, kt,\nextensions=java,scala", ".").unwrap();
        assert_eq!(c.list("extensions").unwrap(), ["java", "scala"]);
    }
}
