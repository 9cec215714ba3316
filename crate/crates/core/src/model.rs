//! Domain types for documentation, architecture models, code artifacts and
//! trace links, together with their on-disk formats.
//!
//! Formats:
//! - documentation: UTF-8 text, one sentence per line, line `k` is sentence `k`
//! - component lists: CSV with header `id,name`
//! - link sets and gold standards: CSV with header `left,right`

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} is not valid UTF-8")]
    NotUtf8 { path: PathBuf },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: expected header `{expected}`")]
    MissingHeader { path: PathBuf, expected: &'static str },
    #[error("{path}:{line}: {message}")]
    MalformedRow { path: PathBuf, line: u64, message: String },
    #[error("duplicate component id `{0}`")]
    DuplicateComponent(String),
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error("unknown {what} `{value}`")]
    UnknownVariant { what: &'static str, value: String },
}

/// A single documentation sentence. Ids are 1-based line numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SadDocument {
    pub project: String,
    pub sentences: Vec<Sentence>,
}

impl SadDocument {
    /// Builds a document from sentence texts, numbering them from 1.
    ///
    /// Line breaks inside a text are replaced by spaces so every sentence stays
    /// on a single line.
    pub fn from_lines<I, S>(project: impl Into<String>, lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let sentences = lines
            .into_iter()
            .enumerate()
            .map(|(idx, line)| Sentence {
                id: idx as u32 + 1,
                text: line.as_ref().replace(['\r', '\n'], " "),
            })
            .collect();
        Self {
            project: project.into(),
            sentences,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn sentence(&self, id: u32) -> Option<&Sentence> {
        if id == 0 {
            return None;
        }
        self.sentences.get(id as usize - 1)
    }

    /// The document body, one sentence per line.
    pub fn text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Manual,
    ExtractedDoc,
    ExtractedCode,
    ExtractedCombined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sam {
    pub project: String,
    pub components: Vec<Component>,
    pub provenance: Provenance,
}

impl Sam {
    /// Creates a model, rejecting empty or duplicate ids and empty names.
    pub fn new(
        project: impl Into<String>,
        components: Vec<Component>,
        provenance: Provenance,
    ) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for c in &components {
            if c.id.is_empty() {
                return Err(ModelError::InvalidComponent("empty id".into()));
            }
            if c.name.is_empty() {
                return Err(ModelError::InvalidComponent(format!(
                    "component `{}` has an empty name",
                    c.id
                )));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(ModelError::DuplicateComponent(c.id.clone()));
            }
        }
        Ok(Self {
            project: project.into(),
            components,
            provenance,
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.components.iter().map(|c| c.name.clone()).collect()
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.components.iter().any(|c| c.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    File,
    Package,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodeArtifact {
    /// Relative, `/`-separated path without a leading `/`.
    pub path: String,
    pub kind: ArtifactKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    #[serde(rename = "sad-sam")]
    SadSam,
    #[serde(rename = "sam-code")]
    SamCode,
    #[serde(rename = "sad-code")]
    SadCode,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::SadSam => "sad-sam",
            LinkKind::SamCode => "sam-code",
            LinkKind::SadCode => "sad-code",
        }
    }

    /// Whether the left endpoint is a sentence id.
    fn left_is_sentence(self) -> bool {
        matches!(self, LinkKind::SadSam | LinkKind::SadCode)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sad-sam" => Ok(LinkKind::SadSam),
            "sam-code" => Ok(LinkKind::SamCode),
            "sad-code" => Ok(LinkKind::SadCode),
            other => Err(ModelError::UnknownVariant {
                what: "link kind",
                value: other.to_string(),
            }),
        }
    }
}

/// A directed link between two endpoint ids. Ordering is `(left, right)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceLink {
    pub left: String,
    pub right: String,
}

impl TraceLink {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        Self {
            left: left.into(),
            right: right.into(),
        }
    }
}

/// A set of links of one kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSet {
    kind: LinkKind,
    links: BTreeSet<TraceLink>,
}

impl LinkSet {
    pub fn new(kind: LinkKind) -> Self {
        Self {
            kind,
            links: BTreeSet::new(),
        }
    }

    pub fn from_pairs<I, L, R>(kind: LinkKind, pairs: I) -> Self
    where
        I: IntoIterator<Item = (L, R)>,
        L: Into<String>,
        R: Into<String>,
    {
        let mut set = Self::new(kind);
        for (l, r) in pairs {
            set.insert(TraceLink::new(l, r));
        }
        set
    }

    pub fn kind(&self) -> LinkKind {
        self.kind
    }

    /// Returns `true` if the link was not present yet.
    pub fn insert(&mut self, link: TraceLink) -> bool {
        self.links.insert(link)
    }

    pub fn contains(&self, link: &TraceLink) -> bool {
        self.links.contains(link)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Links in `(left, right)` lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &TraceLink> {
        self.links.iter()
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = TraceLink>) {
        self.links.extend(other);
    }
}

impl<'a> IntoIterator for &'a LinkSet {
    type Item = &'a TraceLink;
    type IntoIter = std::collections::btree_set::Iter<'a, TraceLink>;

    fn into_iter(self) -> Self::IntoIter {
        self.links.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStandard {
    pub links: LinkSet,
}

impl GoldStandard {
    pub fn kind(&self) -> LinkKind {
        self.links.kind()
    }
}

fn read_utf8(path: &Path) -> Result<String, ModelError> {
    let bytes = fs::read(path).map_err(|source| ModelError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| ModelError::NotUtf8 {
        path: path.to_path_buf(),
    })
}

/// Parses one-sentence-per-line documentation text.
///
/// Trailing empty lines are dropped; interior empty lines stay as sentences
/// with empty text so ids keep matching line numbers.
pub fn parse_sad(project: impl Into<String>, content: &str) -> SadDocument {
    let mut lines: Vec<&str> = content.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    SadDocument::from_lines(project, lines)
}

/// Loads a documentation file. The project name is the file stem.
pub fn load_sad(path: impl AsRef<Path>) -> Result<SadDocument, ModelError> {
    let path = path.as_ref();
    let content = read_utf8(path)?;
    Ok(parse_sad(project_name(path), &content))
}

fn project_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn csv_reader(content: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes())
}

fn check_header(reader: &mut csv::Reader<&[u8]>, path: &Path, expected: &'static str) -> Result<(), ModelError> {
    let want: Vec<&str> = expected.split(',').collect();
    let ok = match reader.headers() {
        Ok(h) => h.iter().collect::<Vec<_>>() == want,
        Err(_) => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ModelError::MissingHeader {
            path: path.to_path_buf(),
            expected,
        })
    }
}

fn malformed(path: &Path, err: &csv::Error) -> ModelError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    ModelError::MalformedRow {
        path: path.to_path_buf(),
        line,
        message: err.to_string(),
    }
}

/// Loads a hand-made component list (`id,name`) as a manual model.
pub fn load_component_list(path: impl AsRef<Path>) -> Result<Sam, ModelError> {
    let path = path.as_ref();
    let content = read_utf8(path)?;
    let mut reader = csv_reader(&content);
    check_header(&mut reader, path, "id,name")?;
    let mut components = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| malformed(path, &e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(ModelError::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        components.push(Component {
            id: record[0].to_string(),
            name: record[1].to_string(),
        });
    }
    Sam::new(project_name(path), components, Provenance::Manual)
}

/// Renders a component list in the `id,name` format.
pub fn component_list_to_csv(sam: &Sam) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(["id", "name"]).expect("writing to memory");
    for c in &sam.components {
        writer
            .write_record([c.id.as_str(), c.name.as_str()])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("input was UTF-8")
}

pub fn write_component_list(sam: &Sam, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_bytes(path.as_ref(), component_list_to_csv(sam).as_bytes())
}

fn validate_endpoint(kind: LinkKind, left: &str, right: &str) -> Result<(), String> {
    if left.is_empty() || right.is_empty() {
        return Err("empty endpoint".into());
    }
    if kind.left_is_sentence() {
        match left.parse::<u32>() {
            Ok(id) if id >= 1 => {}
            _ => return Err(format!("`{left}` is not a sentence id")),
        }
    }
    Ok(())
}

/// Parses `left,right` CSV text into a link set of the given kind.
pub fn parse_links(kind: LinkKind, content: &str, path: &Path) -> Result<LinkSet, ModelError> {
    let mut reader = csv_reader(content);
    check_header(&mut reader, path, "left,right")?;
    let mut links = LinkSet::new(kind);
    for record in reader.records() {
        let record = record.map_err(|e| malformed(path, &e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(ModelError::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let (left, right) = (&record[0], &record[1]);
        validate_endpoint(kind, left, right).map_err(|message| ModelError::MalformedRow {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        links.insert(TraceLink::new(left, right));
    }
    Ok(links)
}

/// Loads a link set from a `left,right` CSV file.
pub fn load_links(path: impl AsRef<Path>, kind: LinkKind) -> Result<LinkSet, ModelError> {
    let path = path.as_ref();
    let content = read_utf8(path)?;
    parse_links(kind, &content, path)
}

pub fn load_gold_links(path: impl AsRef<Path>, kind: LinkKind) -> Result<GoldStandard, ModelError> {
    Ok(GoldStandard {
        links: load_links(path, kind)?,
    })
}

/// Renders links as `left,right` CSV, rows sorted by `(left, right)`.
pub fn links_to_csv(links: &LinkSet) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(["left", "right"]).expect("writing to memory");
    for link in links {
        writer
            .write_record([link.left.as_str(), link.right.as_str()])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("input was UTF-8")
}

pub fn write_links(links: &LinkSet, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_bytes(path.as_ref(), links_to_csv(links).as_bytes())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), ModelError> {
    fs::write(path, bytes).map_err(|source| ModelError::Write {
        path: path.to_path_buf(),
        source,
    })
}
