//! Source tree scanning and the package-list feature used as prompt input.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use globset::{Glob, GlobSet, GlobSetBuilder};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::model::{ArtifactKind, CodeArtifact};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("cannot read source root {path}: {message}")]
    UnreadableRoot { path: PathBuf, message: String },
    #[error("invalid exclude glob `{glob}`: {message}")]
    InvalidGlob { glob: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Directories (relative to the scan root) that package paths are derived from.
    pub source_roots: Vec<String>,
    /// File extensions without the dot.
    pub extensions: Vec<String>,
    pub exclude_globs: Vec<String>,
    /// Drop every file whose path contains a `test` directory.
    pub exclude_test_code: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            source_roots: vec!["src/main/java".into(), "src/test/java".into(), "src".into()],
            extensions: vec!["java".into()],
            exclude_globs: [
                "**/.git/**",
                "**/.svn/**",
                "**/.hg/**",
                "**/target/**",
                "**/build/**",
                "**/out/**",
                "**/bin/**",
                "**/node_modules/**",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            exclude_test_code: false,
        }
    }
}

/// A scanned source tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeModel {
    pub root: String,
    pub files: Vec<CodeArtifact>,
    /// Non-empty packages, sorted and unique.
    pub packages: Vec<String>,
    /// Package each file belongs to, keyed by file path. Files in the
    /// default (unnamed) package are absent.
    pub file_packages: BTreeMap<String, String>,
}

impl CodeModel {
    pub fn file_count(&self) -> usize {
        self.files.len()
    }
}

static PACKAGE_DECL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?m)^\s*package\s+([A-Za-z_$][\w$]*(?:\s*\.\s*[A-Za-z_$][\w$]*)*)\s*;?\s*$").expect("static regex")
});

fn build_excludes(globs: &[String]) -> Result<GlobSet, ScanError> {
    let mut builder = GlobSetBuilder::new();
    for g in globs {
        let glob = Glob::new(g).map_err(|e| ScanError::InvalidGlob {
            glob: g.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| ScanError::InvalidGlob {
        glob: globs.join(","),
        message: e.to_string(),
    })
}

fn relative_slash_path(root: &Path, path: &Path) -> Option<String> {
    let rel = path.strip_prefix(root).ok()?;
    let parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("/"))
    }
}

fn is_test_path(rel: &str) -> bool {
    format!("/{rel}").contains("/test/")
}

/// Returns the package declared in `source`, if any.
pub fn declared_package(source: &str) -> Option<String> {
    PACKAGE_DECL
        .captures(source)
        .map(|c| c[1].chars().filter(|ch| !ch.is_whitespace()).collect::<String>())
}

/// Derives a dotted package name from a file's directory, relative to the
/// longest configured source root that contains it (or the scan root).
pub fn derived_package(rel_path: &str, source_roots: &[String]) -> Option<String> {
    let dir = match rel_path.rsplit_once('/') {
        Some((dir, _)) => dir,
        None => return None,
    };
    let root = source_roots
        .iter()
        .map(|r| r.trim_matches('/'))
        .filter(|r| !r.is_empty())
        .filter(|r| dir == *r || dir.starts_with(&format!("{r}/")))
        .max_by_key(|r| r.len());
    let rest = match root {
        Some(r) => dir[r.len()..].trim_start_matches('/'),
        None => dir,
    };
    if rest.is_empty() {
        None
    } else {
        Some(rest.replace('/', "."))
    }
}

/// Walks `root` and collects matching source files and their packages.
///
/// Files are reported in sorted path order regardless of directory
/// enumeration order.
pub fn scan_source_tree(root: impl AsRef<Path>, config: &ScanConfig) -> Result<CodeModel, ScanError> {
    let root = root.as_ref();
    let meta = fs::metadata(root).map_err(|e| ScanError::UnreadableRoot {
        path: root.to_path_buf(),
        message: e.to_string(),
    })?;
    if !meta.is_dir() {
        return Err(ScanError::UnreadableRoot {
            path: root.to_path_buf(),
            message: "not a directory".into(),
        });
    }
    let excludes = build_excludes(&config.exclude_globs)?;
    let extensions: BTreeSet<String> = config
        .extensions
        .iter()
        .map(|e| e.trim_start_matches('.').to_ascii_lowercase())
        .collect();

    let mut file_packages = BTreeMap::new();
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| ScanError::UnreadableRoot {
            path: root.to_path_buf(),
            message: e.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(rel) = relative_slash_path(root, entry.path()) else {
            continue;
        };
        let ext_ok = rel
            .rsplit_once('.')
            .map(|(_, ext)| extensions.contains(&ext.to_ascii_lowercase()))
            .unwrap_or(false);
        if !ext_ok || excludes.is_match(&rel) {
            continue;
        }
        if config.exclude_test_code && is_test_path(&rel) {
            continue;
        }
        // Unreadable or non-UTF-8 files still count; their package comes from the path.
        let declared = fs::read(entry.path())
            .ok()
            .and_then(|bytes| declared_package(&String::from_utf8_lossy(&bytes)));
        if let Some(pkg) = declared.or_else(|| derived_package(&rel, &config.source_roots)) {
            file_packages.insert(rel.clone(), pkg);
        }
        files.push(CodeArtifact {
            path: rel,
            kind: ArtifactKind::File,
        });
    }
    files.sort();

    let mut model = CodeModel {
        root: root.to_string_lossy().into_owned(),
        files,
        packages: Vec::new(),
        file_packages,
    };
    model.packages = extract_packages(&model);
    Ok(model)
}

/// The sorted, de-duplicated list of packages that directly contain at least
/// one scanned file.
pub fn extract_packages(model: &CodeModel) -> Vec<String> {
    model
        .files
        .iter()
        .filter_map(|f| model.file_packages.get(&f.path))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub const PACKAGES_FEATURE: &str = "Packages";

/// Renders the package list as the feature text handed to the code prompt.
pub fn render_feature_text(packages: &[String]) -> String {
    let mut sorted: Vec<&str> = packages.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let body = if sorted.is_empty() {
        "(none)".to_string()
    } else {
        sorted.join("\n")
    };
    format!("{PACKAGES_FEATURE}:\n{body}")
}
