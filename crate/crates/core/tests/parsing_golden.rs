//! Canned model responses and the component lists they must parse to.

use archtrace::artemis::{parse_entities, ENTITY_FORMAT};
use archtrace::exarch::{parse_component_list, Casing};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    response: String,
    casing: Casing,
    expected: Vec<String>,
}

fn cases() -> Vec<Case> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/parsing/component_lists.json"
    );
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn golden_component_lists() {
    let cases = cases();
    assert!(cases.len() >= 20);
    for case in &cases {
        let parsed = parse_component_list(&case.response, case.casing);
        assert_eq!(parsed, case.expected, "case `{}`", case.name);
    }
}

#[test]
fn parsed_names_are_clean() {
    for case in cases() {
        for name in parse_component_list(&case.response, case.casing) {
            assert!(!name.is_empty() && !name.chars().any(char::is_whitespace), "{name:?}");
        }
    }
}

fn appendix_example() -> &'static str {
    let start = ENTITY_FORMAT.find("Example:").unwrap();
    &ENTITY_FORMAT[start..]
}

#[test]
fn entity_example_from_format_prompt() {
    let entities = parse_entities(appendix_example()).unwrap();
    assert_eq!(entities.len(), 2);
    assert_eq!(entities[0].name, "AuthenticationService");
    assert_eq!(entities[0].alternative_names, ["service"]);
    assert_eq!(entities[0].occurrences.len(), 3);
    assert_eq!(entities[1].name, "UserDatabase");
    assert_eq!(entities[1].alternative_names, ["DB"]);
    assert_eq!(entities[1].occurrences.len(), 2);
}

#[test]
fn entity_json_in_code_fence_and_prose() {
    let fenced = "Sure!\n```json\n[{\"name\": \"Logic\", \"type\": \"COMPONENT\", \"alternativeNames\": [], \"occurrences\": [\"a\"]}]\n```";
    let entities = parse_entities(fenced).unwrap();
    assert_eq!(entities.len(), 1);
    assert_eq!(entities[0].name, "Logic");

    // the schema's `[...]` placeholder must not be mistaken for the answer
    let entities = parse_entities("Format: [...]\n[{\"name\": \"Gui\"}]").unwrap();
    assert_eq!(entities[0].name, "Gui");
    assert!(entities[0].alternative_names.is_empty());
}

#[test]
fn malformed_entity_answers_are_rejected() {
    for bad in [
        "no json here",
        "[{\"name\": \"GUI\",",
        "[{\"type\": \"COMPONENT\"}]",
        "[{\"name\": \"GUI\", \"occurrences\": \"line 1\"}]",
        "[\"GUI\"]",
        "[{\"name\": \"  \"}]",
    ] {
        assert!(parse_entities(bad).is_err(), "{bad}");
    }
}
