//! Heuristic component-to-code linking from component names and file paths.
//!
//! Three heuristics score a (component, file) pair, each in `[0, 1]`:
//!
//! * `segment-token`: 1 if a token of the component name equals a token of
//!   any path segment.
//! * `prefix-similarity`: best normalized Levenshtein similarity between the
//!   joined component tokens and the joined tokens of each path prefix
//!   (`a`, `a/b`, `a/b/File`).
//! * `acronym`: 1 if the component name spells the initials of consecutive
//!   path tokens (`DB` for `data/base`).
//!
//! The candidate confidence is the maximum of the three.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::CodeModel;
use crate::model::{Component, LinkKind, LinkSet, Sam, TraceLink};
use crate::similarity::normalized_levenshtein_similarity;

pub const SEGMENT_TOKEN: &str = "segment-token";
pub const PREFIX_SIMILARITY: &str = "prefix-similarity";
pub const ACRONYM: &str = "acronym";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkCandidate {
    pub component_id: String,
    pub path: String,
    pub confidence: f64,
    pub evidence: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkerConfig {
    /// Minimum confidence for a link.
    pub threshold: f64,
    /// When several components pass for one file, only those within this
    /// distance of the best are kept.
    pub dominance_band: f64,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        Self {
            threshold: 0.6,
            dominance_band: 0.05,
        }
    }
}

/// Splits an identifier or path into lowercase tokens.
///
/// Splits on non-alphanumeric characters (`.`, `/`, `_`, `-`, ...), on
/// lower-to-upper transitions, before the last capital of a capital run that
/// is followed by a lowercase letter (`FSESLAkka` -> `fsesl`, `akka`), and
/// between digits and letters.
pub fn tokenize_name(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in name.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = word.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if i > 0 && !current.is_empty() {
                let prev = chars[i - 1];
                let next = chars.get(i + 1).copied();
                let boundary = (prev.is_lowercase() && c.is_uppercase())
                    || (prev.is_uppercase() && c.is_uppercase() && next.is_some_and(char::is_lowercase))
                    || (prev.is_ascii_digit() != c.is_ascii_digit());
                if boundary {
                    tokens.push(std::mem::take(&mut current).to_lowercase());
                }
            }
            current.push(c);
        }
        if !current.is_empty() {
            tokens.push(current.to_lowercase());
        }
    }
    tokens
}

/// Path segments with the file extension removed from the last one.
fn path_segments(path: &str) -> Vec<&str> {
    let mut segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    if let Some(last) = segments.last_mut() {
        if let Some((stem, _)) = last.rsplit_once('.') {
            if !stem.is_empty() {
                *last = stem;
            }
        }
    }
    segments
}

fn acronym_match(name: &str, tokens: &[String]) -> bool {
    let letters: Vec<char> = name
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.len() < 2 || letters.len() > tokens.len() {
        return false;
    }
    tokens
        .windows(letters.len())
        .any(|window| window.iter().zip(&letters).all(|(t, l)| t.starts_with(*l)))
}

pub fn score_component_file(component: &Component, path: &str) -> LinkCandidate {
    let component_tokens = tokenize_name(&component.name);
    let segments: Vec<Vec<String>> = path_segments(path).into_iter().map(tokenize_name).collect();
    let path_tokens: Vec<String> = segments.iter().flatten().cloned().collect();

    let token_set: HashSet<&str> = path_tokens.iter().map(String::as_str).collect();
    let segment_token = if component_tokens.iter().any(|t| token_set.contains(t.as_str())) {
        1.0
    } else {
        0.0
    };

    let joined_component = component_tokens.concat();
    let mut prefix = String::new();
    let mut prefix_similarity: f64 = 0.0;
    for seg in &segments {
        prefix.push_str(&seg.concat());
        prefix_similarity = prefix_similarity.max(normalized_levenshtein_similarity(&joined_component, &prefix));
    }

    let acronym = if acronym_match(&component.name, &path_tokens) {
        1.0
    } else {
        0.0
    };

    let evidence = vec![
        (SEGMENT_TOKEN, segment_token),
        (PREFIX_SIMILARITY, prefix_similarity),
        (ACRONYM, acronym),
    ];
    let confidence = evidence.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    LinkCandidate {
        component_id: component.id.clone(),
        path: path.to_string(),
        confidence,
        evidence,
    }
}

/// Links every file to the components whose confidence reaches the threshold,
/// keeping only those close to the best component for that file.
pub fn link_sam_to_code(sam: &Sam, code: &CodeModel, config: &LinkerConfig) -> LinkSet {
    let per_file: Vec<Vec<TraceLink>> = code
        .files
        .par_iter()
        .map(|file| {
            let candidates: Vec<LinkCandidate> = sam
                .components
                .iter()
                .map(|c| score_component_file(c, &file.path))
                .filter(|c| c.confidence >= config.threshold)
                .collect();
            let best = candidates.iter().map(|c| c.confidence).fold(f64::MIN, f64::max);
            candidates
                .into_iter()
                .filter(|c| c.confidence >= best - config.dominance_band)
                .map(|c| TraceLink::new(c.component_id, c.path))
                .collect()
        })
        .collect();
    let mut links = LinkSet::new(LinkKind::SamCode);
    links.extend(per_file.into_iter().flatten());
    links
}
