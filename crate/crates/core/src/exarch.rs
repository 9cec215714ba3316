//! Component-name extraction from documentation and code features via chained
//! prompts, response parsing, and merging of name lists.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::PACKAGES_FEATURE;
use crate::llm::{ChatMessage, Gateway, LlmError};
use crate::model::{Component, ModelError, Provenance, SadDocument, Sam};
use crate::similarity::normalized_levenshtein_similarity;

pub const DOC_TO_ARCH_1: &str = include_str!("../resources/prompts/doc_to_arch_1.txt");
pub const DOC_TO_ARCH_2: &str = include_str!("../resources/prompts/doc_to_arch_2.txt");
pub const CODE_TO_ARCH_1: &str = include_str!("../resources/prompts/code_to_arch_1.txt");
pub const AGGREGATION: &str = include_str!("../resources/prompts/aggregation.txt");

#[derive(Debug, Error)]
pub enum ExarchError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("no component names could be parsed from the {origin:?} response")]
    EmptyExtraction { origin: NameSource },
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameSource {
    Doc,
    Code,
    CombinedPrompt,
    CombinedSimilarity,
}

impl NameSource {
    pub fn provenance(self) -> Provenance {
        match self {
            NameSource::Doc => Provenance::ExtractedDoc,
            NameSource::Code => Provenance::ExtractedCode,
            NameSource::CombinedPrompt | NameSource::CombinedSimilarity => Provenance::ExtractedCombined,
        }
    }
}

/// Extracted component names: unique, non-empty, whitespace-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentNameList {
    pub names: Vec<String>,
    pub source: NameSource,
}

/// How a multi-word name is turned into a single identifier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Casing {
    /// Capitalize each word, then join: "media access" -> "MediaAccess".
    #[default]
    StrictCamel,
    /// Only remove spaces: "Architecture and Main Entry Point" ->
    /// "ArchitectureandMainEntryPoint".
    LegacySpaceRemoval,
}

impl fmt::Display for Casing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Casing::StrictCamel => "strict-camel",
            Casing::LegacySpaceRemoval => "legacy-space-removal",
        })
    }
}

impl FromStr for Casing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict-camel" => Ok(Casing::StrictCamel),
            "legacy-space-removal" | "legacy" => Ok(Casing::LegacySpaceRemoval),
            other => Err(format!("unknown casing `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationConfig {
    /// Names more similar than this to an accepted name are dropped.
    pub threshold: f64,
    pub casing: Casing,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            casing: Casing::StrictCamel,
        }
    }
}

static COMPONENT_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bcomponents?\b").expect("static regex"));

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Turns a list-style response into component names.
///
/// Only lines whose trimmed form starts with `-` are considered. The marker is
/// stripped, the words "component"/"components" are removed (whole word, any
/// case), and the remainder is collapsed into one identifier according to
/// `casing`. Empty results are dropped and duplicates keep their first
/// occurrence.
pub fn parse_component_list(response: &str, casing: Casing) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut names = Vec::new();
    for line in response.lines() {
        let Some(rest) = line.trim().strip_prefix('-') else {
            continue;
        };
        let cleaned = COMPONENT_WORD.replace_all(rest, " ");
        let words = cleaned.split_whitespace();
        let name: String = match casing {
            Casing::LegacySpaceRemoval => words.collect(),
            Casing::StrictCamel => words.map(capitalize).collect(),
        };
        // joining can re-form the removed word, e.g. "Compo nent"
        if name.is_empty() || name.eq_ignore_ascii_case("component") || name.eq_ignore_ascii_case("components") {
            continue;
        }
        if seen.insert(name.clone()) {
            names.push(name);
        }
    }
    names
}

fn doc_prompt(sad: &SadDocument) -> String {
    DOC_TO_ARCH_1.replace("{Software Architecture Documentation}", &sad.text())
}

/// Fills the code prompt. `features` is rendered feature text such as
/// `"Packages:\na.b\nc"`; it replaces the trailing `{Features}: {Content}`.
fn code_prompt(features: &str) -> String {
    let name = features
        .split_once(':')
        .map(|(n, _)| n.trim())
        .filter(|n| !n.is_empty() && !n.contains('\n'))
        .unwrap_or(PACKAGES_FEATURE);
    CODE_TO_ARCH_1
        .replace("{Features}: {Content}", features)
        .replace("{Features}", name)
}

fn aggregation_prompt(candidates: &[String]) -> String {
    AGGREGATION
        .replace("{Output Format}", output_format())
        .replace("{Possible Component Names}", &candidates.join(", "))
}

fn output_format() -> &'static str {
    let start = DOC_TO_ARCH_2
        .find("Output format:")
        .expect("list prompt carries an output format");
    &DOC_TO_ARCH_2[start..]
}

/// First prompt, its answer, then the list prompt in the same conversation.
fn two_step(
    gateway: &Gateway,
    first_prompt: String,
    casing: Casing,
    source: NameSource,
) -> Result<ComponentNameList, ExarchError> {
    let mut messages = vec![ChatMessage::user(first_prompt)];
    let elaboration = gateway.chat(&gateway.request(messages.clone()))?;
    messages.push(ChatMessage::assistant(elaboration));
    messages.push(ChatMessage::user(DOC_TO_ARCH_2));
    let listing = gateway.chat(&gateway.request(messages))?;
    let names = parse_component_list(&listing, casing);
    if names.is_empty() {
        return Err(ExarchError::EmptyExtraction { origin: source });
    }
    Ok(ComponentNameList { names, source })
}

/// Component names from the documentation alone.
pub fn extract_names_from_sad(
    sad: &SadDocument,
    gateway: &Gateway,
    casing: Casing,
) -> Result<ComponentNameList, ExarchError> {
    if sad.is_empty() {
        return Err(ExarchError::Precondition("documentation is empty"));
    }
    two_step(gateway, doc_prompt(sad), casing, NameSource::Doc)
}

/// Component names from rendered code features (see
/// [`crate::code::render_feature_text`]).
pub fn extract_names_from_code(
    features: &str,
    gateway: &Gateway,
    casing: Casing,
) -> Result<ComponentNameList, ExarchError> {
    if features.trim().is_empty() {
        return Err(ExarchError::Precondition("feature text is empty"));
    }
    two_step(gateway, code_prompt(features), casing, NameSource::Code)
}

/// Merges documentation and code names by string similarity.
///
/// Names are processed in order, documentation first. A name is kept only if
/// its similarity to every kept name is at most `config.threshold`; exact
/// (case-insensitive) repeats are always dropped.
pub fn aggregate_via_similarity(
    doc_names: &[String],
    code_names: &[String],
    config: &AggregationConfig,
) -> ComponentNameList {
    let mut accepted: Vec<String> = Vec::new();
    let mut lowered: HashSet<String> = HashSet::new();
    for name in doc_names.iter().chain(code_names) {
        let key = name.to_lowercase();
        if lowered.contains(&key) {
            continue;
        }
        let distinct = accepted
            .iter()
            .all(|kept| normalized_levenshtein_similarity(kept, name) <= config.threshold);
        if distinct {
            lowered.insert(key);
            accepted.push(name.clone());
        }
    }
    ComponentNameList {
        names: accepted,
        source: NameSource::CombinedSimilarity,
    }
}

/// Merges documentation and code names by asking the model to aggregate them.
pub fn aggregate_via_prompt(
    doc_names: &[String],
    code_names: &[String],
    gateway: &Gateway,
    casing: Casing,
) -> Result<ComponentNameList, ExarchError> {
    let candidates: Vec<String> = doc_names.iter().chain(code_names).cloned().collect();
    if candidates.is_empty() {
        return Err(ExarchError::Precondition("no candidate names to aggregate"));
    }
    let response = gateway.chat(&gateway.request(vec![ChatMessage::user(aggregation_prompt(&candidates))]))?;
    let names = parse_component_list(&response, casing);
    if names.is_empty() {
        return Err(ExarchError::EmptyExtraction {
            origin: NameSource::CombinedPrompt,
        });
    }
    Ok(ComponentNameList {
        names,
        source: NameSource::CombinedPrompt,
    })
}

/// A model whose components are the names, with ids `x-0`, `x-1`, ... in list order.
pub fn build_simple_sam(names: &ComponentNameList, project: &str) -> Result<Sam, ExarchError> {
    if names.names.is_empty() {
        return Err(ExarchError::Precondition(
            "cannot build a model from an empty name list",
        ));
    }
    let components = names
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| Component {
            id: format!("x-{i}"),
            name: name.clone(),
        })
        .collect();
    Ok(Sam::new(project, components, names.source.provenance())?)
}
