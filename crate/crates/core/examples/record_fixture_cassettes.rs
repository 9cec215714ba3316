//! Regenerates the cassettes under `fixtures/`.
//!
//! The fixture projects are small stand-ins for the benchmark projects, so
//! their model answers are scripted here instead of coming from a provider.
//! The real pipelines run in record mode against the scripted backend, which
//! makes the recorded requests byte-identical to the ones a replay run sends.
//!
//! Run with `cargo run -p archtrace-core --example record_fixture_cassettes`.

use std::path::{Path, PathBuf};

use archtrace::artemis::{run_artemis, MatchConfig, ENTITY_FORMAT, ENTITY_TASK, FORMAT_RETRY};
use archtrace::code::{extract_packages, render_feature_text, scan_source_tree, ScanConfig};
use archtrace::exarch::{
    aggregate_via_prompt, build_simple_sam, extract_names_from_code, extract_names_from_sad, Casing, AGGREGATION,
    CODE_TO_ARCH_1, DOC_TO_ARCH_1, DOC_TO_ARCH_2,
};
use archtrace::llm::{Cassette, Gateway, ModelSettings, ScriptedBackend};
use archtrace::model::{load_component_list, load_sad, SadDocument};

fn needle(prompt: &str) -> &str {
    &prompt[..60]
}

/// The code prompt starts with a placeholder, so match on its fixed middle part.
const CODE_NEEDLE: &str = "w.r.t. the high-level architecture of the system";

fn list_needle() -> &'static str {
    needle(DOC_TO_ARCH_2)
}

/// Entity answer in the requested JSON shape; occurrences are quoted sentences.
fn entity_json(sad: &SadDocument, entities: &[(&str, &[&str], &[u32])]) -> String {
    let items: Vec<serde_json::Value> = entities
        .iter()
        .map(|(name, alternatives, lines)| {
            let occurrences: Vec<&str> = lines
                .iter()
                .map(|id| sad.sentence(*id).expect("sentence exists").text.as_str())
                .collect();
            serde_json::json!({
                "name": name,
                "type": "COMPONENT",
                "alternativeNames": alternatives,
                "occurrences": occurrences,
            })
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("json")
}

struct Recorder {
    settings: ModelSettings,
    cassette: Cassette,
}

impl Recorder {
    fn new(settings: ModelSettings) -> Self {
        Self {
            settings,
            cassette: Cassette::new(),
        }
    }

    /// Runs `f` against a fresh recording gateway and keeps what it recorded.
    fn session<T>(&mut self, backend: ScriptedBackend, f: impl FnOnce(&Gateway) -> T) -> T {
        let gateway = Gateway::record(Box::new(backend), self.settings.clone(), Cassette::new(), None);
        let out = f(&gateway);
        for entry in gateway.cassette().expect("record mode keeps a cassette").entries {
            self.cassette.insert(entry);
        }
        out
    }

    fn save(&self, path: &Path) {
        self.cassette.save(path).expect("write cassette");
        println!("{}: {} entries", path.display(), self.cassette.len());
    }
}

fn features(root: &Path) -> String {
    let model = scan_source_tree(root, &ScanConfig::default()).expect("scan fixture tree");
    render_feature_text(&extract_packages(&model))
}

fn record_toy(dir: &Path) {
    let sad = load_sad(dir.join("sad.txt")).unwrap();
    let sam = load_component_list(dir.join("sam.csv")).unwrap();
    let mut rec = Recorder::new(ModelSettings::default());

    let doc = rec.session(
        ScriptedBackend::new()
            .on(
                needle(DOC_TO_ARCH_1),
                "The documentation describes a calculator that is split into two parts. \
                 The GUI renders the main window, collects user input, shows results and applies the color theme. \
                 The Logic validates requests and computes results. \
                 Reading settings from a properties file at startup is a configuration concern rather than a separate component.",
            )
            .on(list_needle(), "- GUI\n- Logic"),
        |gw| extract_names_from_sad(&sad, gw, Casing::StrictCamel).unwrap(),
    );
    // The doc-mode model must be the hand-written one so that the gold
    // standards (written against x-0/x-1) apply to both.
    assert_eq!(build_simple_sam(&doc, "toy").unwrap().components, sam.components);

    let code = rec.session(
        ScriptedBackend::new()
            .on(
                CODE_NEEDLE,
                "The packages toy.gui and toy.logic suggest a split between a graphical user interface \
                 and the calculation logic behind it.",
            )
            .on(list_needle(), "- GUI Component\n- Logic"),
        |gw| extract_names_from_code(&features(&dir.join("code")), gw, Casing::StrictCamel).unwrap(),
    );
    rec.session(ScriptedBackend::new().on(needle(AGGREGATION), "- GUI\n- Logic"), |gw| {
        aggregate_via_prompt(&doc.names, &code.names, gw, Casing::StrictCamel).unwrap()
    });

    // The answer misses the GUI mention in the last sentence.
    let json = entity_json(
        &sad,
        &[
            ("GUI", &[], &[1, 2, 4]),
            ("Logic", &[], &[1, 2, 3, 4]),
            ("Settings", &["properties file"], &[5]),
        ],
    );
    rec.session(
        ScriptedBackend::new().on(needle(ENTITY_FORMAT), json).on(
            needle(ENTITY_TASK),
            "1. GUI\n   Alternative names: none\n   Occurrences: lines 1, 2 and 4\n\
                 2. Logic\n   Alternative names: none\n   Occurrences: lines 1 to 4\n\
                 3. Settings (properties file)\n   Occurrences: line 5",
        ),
        |gw| run_artemis(&sad, &sam, gw, &MatchConfig::default()).unwrap(),
    );
    rec.save(&dir.join("cassette.json"));
}

fn record_jabref(dir: &Path) {
    let sad = load_sad(dir.join("sad.txt")).unwrap();
    let sam = load_component_list(dir.join("sam.csv")).unwrap();
    let mut rec = Recorder::new(ModelSettings::default());

    let doc = rec.session(
        ScriptedBackend::new()
            .on(
                needle(DOC_TO_ARCH_1),
                "JabRef follows a layered architecture. The model holds the core data structures, \
                 the logic implements importers, exporters and search, and the GUI built with JavaFX sits on top. \
                 Preferences store user settings. A command line interface reuses the logic. \
                 Globals provide application-wide singletons, and an EventBus decouples notifications.",
            )
            .on(
                list_needle(),
                "- Cli\n- Gui\n- Logic\n- Model\n- Preferences\n- EventBus",
            ),
        |gw| extract_names_from_sad(&sad, gw, Casing::StrictCamel).unwrap(),
    );
    let code = rec.session(
        ScriptedBackend::new()
            .on(
                CODE_NEEDLE,
                "The packages below org.jabref separate the graphical user interface (gui), \
                 the application logic with its networking helpers (logic, logic.net), \
                 the data model (model), the preferences and a command line front end.",
            )
            .on(list_needle(), "- GUI\n- Logic\n- Model\n- Preferences\n- Networking"),
        |gw| extract_names_from_code(&features(&dir.join("code")), gw, Casing::StrictCamel).unwrap(),
    );
    rec.session(
        ScriptedBackend::new().on(
            needle(AGGREGATION),
            "- Cli\n- Gui\n- Logic\n- Model\n- Preferences\n- EventBus\n- Networking",
        ),
        |gw| aggregate_via_prompt(&doc.names, &code.names, gw, Casing::StrictCamel).unwrap(),
    );

    // The first formatting answer is cut off, so the run asks again. The
    // answer misses the logic mention in sentence 9.
    let json = entity_json(
        &sad,
        &[
            ("GUI", &["gui package", "user interface"], &[3, 5, 6, 7, 8, 10]),
            ("Logic", &["logic package", "business logic"], &[3, 4, 5, 7]),
            ("Model", &["model package"], &[2, 3, 7]),
            ("Preferences", &["preferences package"], &[8]),
            ("CLI", &["command line interface", "cli package"], &[9, 10]),
            ("Globals", &["globals package"], &[11]),
            ("EventBus", &[], &[12]),
        ],
    );
    rec.session(
        ScriptedBackend::new()
            .on(FORMAT_RETRY, format!("```json\n{json}\n```"))
            .on(
                needle(ENTITY_FORMAT),
                "Here is the JSON array:\n[\n    {\n        \"name\": \"GUI\",\n        \"type\": \"COMPONENT\",",
            )
            .on(
                needle(ENTITY_TASK),
                "1. GUI (gui package, user interface): lines 3, 5, 6, 7, 8, 10\n\
                 2. Logic (logic package, business logic): lines 3, 4, 5, 7\n\
                 3. Model (model package): lines 2, 3, 7\n\
                 4. Preferences (preferences package): line 8\n\
                 5. CLI (command line interface, cli package): lines 9, 10\n\
                 6. Globals (globals package): line 11\n\
                 7. EventBus: line 12",
            ),
        |gw| run_artemis(&sad, &sam, gw, &MatchConfig::default()).unwrap(),
    );
    rec.save(&dir.join("cassette.json"));
}

fn record_mediastore(dir: &Path) {
    let sad = load_sad(dir.join("sad.txt")).unwrap();
    let mut rec = Recorder::new(ModelSettings::default());
    rec.session(
        ScriptedBackend::new()
            .on(
                needle(DOC_TO_ARCH_1),
                "The MediaStore is a web shop for audio files. Clients talk to a facade, \
                 user management and media management handle accounts and media, \
                 audio files are watermarked, re-encoded and packaged before download, \
                 and data is kept in a data storage and a database.",
            )
            .on(
                list_needle(),
                "- Facade\n- UserManagement\n- UserDBAdapter\n- MediaManagement\n- MediaAccess\n\
                 - AudioAccess\n- TagWatermarking Component\n- ReEncoder\n- Packaging\n- DataStorage\n- Database",
            ),
        |gw| extract_names_from_sad(&sad, gw, Casing::StrictCamel).unwrap(),
    );
    rec.save(&dir.join("cassette.json"));
}

fn record_teammates(dir: &Path) {
    let settings = ModelSettings {
        chat_model: "gpt-4-turbo".into(),
        ..ModelSettings::default()
    };
    let mut rec = Recorder::new(settings);
    rec.session(
        ScriptedBackend::new()
            .on(
                CODE_NEEDLE,
                "The packages show an application entry point (teammates.main), shared utilities and \
                 data transfer objects (teammates.common), business logic, storage, a web API for the user interface, \
                 client scripts, and separate end-to-end, load and performance, and unit testing code.",
            )
            .on(
                list_needle(),
                "- Architecture and Main Entry Point\n- Client\n- Common Utilities and Data Transfer Objects\n\
                 - End-to-End Testing\n- Load and Performance Testing\n- Logic\n- Storage\n- Testing Utilities\n\
                 - User Interface",
            ),
        |gw| extract_names_from_code(&features(&dir.join("code")), gw, Casing::LegacySpaceRemoval).unwrap(),
    );
    rec.save(&dir.join("cassette.json"));
}

fn main() {
    assert!(CODE_TO_ARCH_1.contains(CODE_NEEDLE));
    let fixtures: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    record_toy(&fixtures.join("toy"));
    record_jabref(&fixtures.join("jabref"));
    record_mediastore(&fixtures.join("mediastore"));
    record_teammates(&fixtures.join("teammates"));
}
