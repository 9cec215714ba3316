//! Architecture entity recognition in documentation and matching of the
//! recognized entities against model components.
//!
//! The pipeline asks for a plain-text answer first and converts it to JSON in
//! a second request. Mentions are returned as raw lines and mapped back onto
//! sentence ids locally; the model is never asked for line numbers.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::llm::{ChatMessage, Gateway, LlmError};
use crate::model::{LinkKind, LinkSet, SadDocument, Sam, TraceLink};
use crate::similarity::{jaro_winkler_similarity, normalized_levenshtein_similarity};

pub const ENTITY_TASK: &str = include_str!("../resources/prompts/entity_task.txt");
pub const ENTITY_FORMAT: &str = include_str!("../resources/prompts/entity_format.txt");

pub const FORMAT_RETRY: &str = "The previous output was not a valid JSON array. Return only the JSON array.";

#[derive(Debug, Error)]
pub enum ArtemisError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("malformed entity response: {0}")]
    MalformedResponse(String),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("cannot write entities to {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecognizedEntity {
    pub name: String,
    pub alternative_names: Vec<String>,
    pub occurrences: Vec<String>,
    /// Sorted, de-duplicated sentence ids; filled by occurrence mapping.
    pub resolved_sentences: Vec<u32>,
}

impl RecognizedEntity {
    /// The primary name followed by the alternatives.
    pub fn variants(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.name.as_str()).chain(self.alternative_names.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub jaro_winkler_threshold: f64,
    pub levenshtein_threshold: f64,
    pub cosine_threshold: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            jaro_winkler_threshold: 0.90,
            levenshtein_threshold: 0.80,
            cosine_threshold: 0.85,
        }
    }
}

fn task_prompt(sad: &SadDocument, sam_names: &[String]) -> String {
    let mut prompt = format!("{}\n\nText:\n{}", ENTITY_TASK.trim_end(), sad.text());
    if !sam_names.is_empty() {
        prompt.push_str("\n\nPositive examples of component names to look out for:\n");
        let list: Vec<String> = sam_names.iter().map(|n| format!("- {n}")).collect();
        prompt.push_str(&list.join("\n"));
    }
    prompt
}

fn format_prompt(plain_text: &str) -> String {
    format!("{}\n\nLast answer:\n{}", ENTITY_FORMAT.trim_end(), plain_text)
}

/// Sends the recognition task for `sad`, listing `sam_names` as positive
/// examples, and returns the model's plain-text answer.
pub fn recognize_entities(sad: &SadDocument, sam_names: &[String], gateway: &Gateway) -> Result<String, ArtemisError> {
    if sad.is_empty() {
        return Err(ArtemisError::Precondition("documentation is empty"));
    }
    let request = gateway.request(vec![ChatMessage::user(task_prompt(sad, sam_names))]);
    Ok(gateway.chat(&request)?)
}

/// Asks the model to convert a plain-text answer into the entity JSON array.
/// The response is returned unparsed.
pub fn format_entities(plain_text: &str, gateway: &Gateway) -> Result<String, ArtemisError> {
    let request = gateway.request(vec![ChatMessage::user(format_prompt(plain_text))]);
    Ok(gateway.chat(&request)?)
}

fn format_entities_retry(plain_text: &str, bad_answer: &str, gateway: &Gateway) -> Result<String, ArtemisError> {
    let request = gateway.request(vec![
        ChatMessage::user(format_prompt(plain_text)),
        ChatMessage::assistant(bad_answer),
        ChatMessage::user(FORMAT_RETRY),
    ]);
    Ok(gateway.chat(&request)?)
}

/// The first JSON array embedded in `text`, skipping brackets that do not
/// start valid JSON (prose, code fences, schema placeholders).
fn first_json_array(text: &str) -> Option<Vec<Value>> {
    text.match_indices('[').find_map(|(start, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Array(items))) => Some(items),
            _ => None,
        }
    })
}

fn string_list(item: &Value, field: &str, index: usize) -> Result<Vec<String>, ArtemisError> {
    match item.get(field) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(values)) => values
            .iter()
            .map(|v| {
                v.as_str().map(str::to_string).ok_or_else(|| {
                    ArtemisError::MalformedResponse(format!("element {index}: `{field}` must hold strings"))
                })
            })
            .collect(),
        Some(_) => Err(ArtemisError::MalformedResponse(format!(
            "element {index}: `{field}` must be a list"
        ))),
    }
}

/// Parses the entity JSON array out of a (possibly chatty) response.
pub fn parse_entities(json_text: &str) -> Result<Vec<RecognizedEntity>, ArtemisError> {
    let items =
        first_json_array(json_text).ok_or_else(|| ArtemisError::MalformedResponse("no JSON array found".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(index, item)| {
            if !item.is_object() {
                return Err(ArtemisError::MalformedResponse(format!(
                    "element {index} is not an object"
                )));
            }
            let name = item
                .get("name")
                .and_then(Value::as_str)
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| ArtemisError::MalformedResponse(format!("element {index} has no name")))?;
            if let Some(kind) = item.get("type") {
                if !kind.is_string() {
                    return Err(ArtemisError::MalformedResponse(format!(
                        "element {index}: `type` must be a string"
                    )));
                }
            }
            Ok(RecognizedEntity {
                name: name.to_string(),
                alternative_names: string_list(item, "alternativeNames", index)?,
                occurrences: string_list(item, "occurrences", index)?,
                resolved_sentences: Vec::new(),
            })
        })
        .collect()
}

/// The sentence an occurrence line refers to: the first exact (trimmed) match,
/// otherwise the most similar sentence by normalized Levenshtein, lowest id on
/// ties. `None` only for an empty document.
pub fn map_occurrence_to_sentence(occurrence: &str, sad: &SadDocument) -> Option<u32> {
    let needle = occurrence.trim();
    if let Some(s) = sad.sentences.iter().find(|s| s.text.trim() == needle) {
        return Some(s.id);
    }
    let mut best: Option<(u32, f64)> = None;
    for s in &sad.sentences {
        let score = normalized_levenshtein_similarity(needle, s.text.trim());
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((s.id, score));
        }
    }
    best.map(|(id, _)| id)
}

/// Fills `resolved_sentences` for every entity.
pub fn resolve_occurrences(entities: &mut [RecognizedEntity], sad: &SadDocument) {
    for entity in entities {
        let ids: BTreeSet<u32> = entity
            .occurrences
            .iter()
            .filter_map(|o| map_occurrence_to_sentence(o, sad))
            .collect();
        entity.resolved_sentences = ids.into_iter().collect();
    }
}

/// Best score per similarity channel over all name variants of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PairScores {
    pub jaro_winkler: f64,
    pub levenshtein: f64,
    pub cosine: f64,
    pub exact: bool,
}

impl PairScores {
    pub fn matches(&self, config: &MatchConfig) -> bool {
        self.exact
            || self.jaro_winkler > config.jaro_winkler_threshold
            || self.levenshtein > config.levenshtein_threshold
            || self.cosine > config.cosine_threshold
    }
}

/// Matches resolved entities against the model's components and emits one
/// link per (resolved sentence, matched component).
pub fn match_entities_to_sam(
    entities: &[RecognizedEntity],
    sam: &Sam,
    gateway: &Gateway,
    config: &MatchConfig,
) -> Result<LinkSet, ArtemisError> {
    let mut links = LinkSet::new(LinkKind::SadSam);
    if entities.is_empty() || sam.components.is_empty() {
        return Ok(links);
    }
    let scores = score_pairs(entities, sam, gateway)?;
    for (e, entity) in entities.iter().enumerate() {
        for (c, component) in sam.components.iter().enumerate() {
            if scores[e][c].matches(config) {
                for sentence in &entity.resolved_sentences {
                    links.insert(TraceLink::new(sentence.to_string(), component.id.clone()));
                }
            }
        }
    }
    Ok(links)
}

/// Scores for every (entity, component) pair, indexed `[entity][component]`.
pub fn score_pairs(
    entities: &[RecognizedEntity],
    sam: &Sam,
    gateway: &Gateway,
) -> Result<Vec<Vec<PairScores>>, ArtemisError> {
    let mut texts: Vec<String> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    let mut intern = |t: &str| {
        let key = t.to_lowercase();
        let next = slot.len();
        *slot.entry(key.clone()).or_insert_with(|| {
            texts.push(key);
            next
        })
    };
    let entity_slots: Vec<Vec<usize>> = entities
        .iter()
        .map(|e| e.variants().map(&mut intern).collect())
        .collect();
    let component_slots: Vec<usize> = sam.components.iter().map(|c| intern(&c.name)).collect();
    let vectors = if texts.is_empty() {
        Vec::new()
    } else {
        gateway.embed(&texts)?
    };

    let mut all = Vec::with_capacity(entities.len());
    for (entity, slots) in entities.iter().zip(&entity_slots) {
        let mut row = Vec::with_capacity(sam.components.len());
        for (component, &cslot) in sam.components.iter().zip(&component_slots) {
            let mut best = PairScores::default();
            for (variant, &vslot) in entity.variants().zip(slots) {
                best.exact |= variant.to_lowercase() == component.name.to_lowercase();
                best.jaro_winkler = best.jaro_winkler.max(jaro_winkler_similarity(variant, &component.name));
                best.levenshtein = best
                    .levenshtein
                    .max(normalized_levenshtein_similarity(variant, &component.name));
                best.cosine = best.cosine.max(vectors[vslot].cosine(&vectors[cslot]));
            }
            row.push(best);
        }
        all.push(row);
    }
    Ok(all)
}

/// Entities and links produced by one recognition run.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtemisRun {
    pub entities: Vec<RecognizedEntity>,
    pub links: LinkSet,
}

/// Recognize, format, parse (retrying the formatting once), map and match.
pub fn run_artemis(
    sad: &SadDocument,
    sam: &Sam,
    gateway: &Gateway,
    config: &MatchConfig,
) -> Result<ArtemisRun, ArtemisError> {
    if sam.components.is_empty() {
        return Ok(ArtemisRun {
            entities: Vec::new(),
            links: LinkSet::new(LinkKind::SadSam),
        });
    }
    let plain = recognize_entities(sad, &sam.names(), gateway)?;
    let formatted = format_entities(&plain, gateway)?;
    let mut entities = match parse_entities(&formatted) {
        Ok(entities) => entities,
        Err(ArtemisError::MalformedResponse(_)) => {
            let retried = format_entities_retry(&plain, &formatted, gateway)?;
            parse_entities(&retried)?
        }
        Err(other) => return Err(other),
    };
    resolve_occurrences(&mut entities, sad);
    let links = match_entities_to_sam(&entities, sam, gateway, config)?;
    Ok(ArtemisRun { entities, links })
}

/// Writes recognized entities as pretty JSON for inspection.
pub fn write_entities_json(entities: &[RecognizedEntity], path: impl AsRef<Path>) -> Result<(), ArtemisError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(entities).expect("entities serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| ArtemisError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
