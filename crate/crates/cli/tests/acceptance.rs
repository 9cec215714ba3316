//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always show up in
//! `cargo test` output. Exits non-zero when a criterion fails, except for
//! failures listed in `KNOWN_FAILURES`, which are analysed in the README.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use serde::Deserialize;

use archtrace::artemis::{parse_entities, ENTITY_FORMAT};
use archtrace::eval::{
    format_metric, macro_average, precision_recall_f1, weighted_average, wilcoxon_exact_p, wilcoxon_one_sided,
    ConfusionCounts, Metrics, ProjectResult,
};
use archtrace::exarch::{aggregate_via_similarity, parse_component_list, AggregationConfig, Casing};
use archtrace::model::{LinkKind, LinkSet};
use archtrace::similarity::normalized_levenshtein_similarity;
use archtrace::transitive::compose_links;
use archtrace::Report;

/// Criteria whose failure is understood and documented; the detail text
/// must match exactly so that any other failure still breaks the build.
const KNOWN_FAILURES: &[(u32, &str)] = &[(2, "BBB P=.77 R=.91 gives F1 .8342, printed .84 (off by .0058)")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut outcome = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed >= limit {
            outcome.pass = false;
            outcome.detail = format!("{}; took {elapsed:.2?}, limit {limit:?}", outcome.detail);
        } else {
            outcome.detail = format!("{} ({elapsed:.2?})", outcome.detail);
        }
    }
    outcome
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

// ---------------------------------------------------------------- 1

fn f1_rows(f1s: &[f64], weights: &[usize]) -> Vec<ProjectResult> {
    f1s.iter()
        .zip(weights)
        .enumerate()
        .map(|(i, (&f1, &w))| {
            let m = Metrics {
                precision: f1,
                recall: f1,
                f1,
            };
            ProjectResult::from_metrics(format!("p{i}"), m, w).unwrap()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let rows = f1_rows(&[0.48, 0.79, 0.82, 0.77, 0.94], &[59, 707, 8097, 1529, 8268]);
    let avg = macro_average(&rows).unwrap().f1;
    let wavg = weighted_average(&rows).unwrap().f1;
    let detail = format!(
        "avg {avg:.4} -> {}, w. avg {wavg:.4} -> {}",
        format_metric(avg),
        format_metric(wavg)
    );
    if (avg - 0.76).abs() <= 0.005
        && (wavg - 0.87).abs() <= 0.005
        && format_metric(avg) == ".76"
        && format_metric(wavg) == ".87"
    {
        pass(detail)
    } else {
        fail(detail)
    }
}

// ---------------------------------------------------------------- 2

/// (project, P, R, printed F1) for the manual-model transitive approach.
const TRANSITIVE_ROWS: [(&str, f64, f64, f64); 5] = [
    ("MS", 1.0, 0.52, 0.68),
    ("TS", 1.0, 0.71, 0.83),
    ("TM", 0.71, 0.91, 0.80),
    ("BBB", 0.77, 0.91, 0.84),
    ("JR", 0.89, 1.0, 0.94),
];

fn four(x: f64) -> String {
    format!("{x:.4}").trim_start_matches('0').to_string()
}

fn criterion_2() -> Outcome {
    let mut misses = Vec::new();
    for (project, p, r, printed) in TRANSITIVE_ROWS {
        let f1 = Metrics::from_pr(p, r).f1;
        let off = (f1 - printed).abs();
        if off > 0.005 {
            misses.push(format!(
                "{project} P={} R={} gives F1 {}, printed {} (off by {})",
                format_metric(p),
                format_metric(r),
                four(f1),
                format_metric(printed),
                four(off)
            ));
        }
    }
    if misses.is_empty() {
        pass(format!("all {} rows within .005", TRANSITIVE_ROWS.len()))
    } else {
        fail(misses.join("; "))
    }
}

// ---------------------------------------------------------------- 3

fn enumeration(w_plus: f64, n: usize) -> f64 {
    let at_least = (0u64..1 << n)
        .filter(|signs| {
            let w: usize = (0..n).filter(|i| signs & (1 << i) != 0).map(|i| i + 1).sum();
            w as f64 >= w_plus
        })
        .count();
    at_least as f64 / (1u64 << n) as f64
}

fn criterion_3() -> Outcome {
    // Ours minus the first baseline, F1 per project, all improvements.
    let differences = [0.50 - 0.13, 0.79 - 0.27, 0.80 - 0.11, 0.75 - 0.10, 0.94 - 0.49];
    let result = wilcoxon_one_sided(&differences).unwrap();
    if !result.exact || result.p != 0.03125 {
        return fail(format!("p {} exact {}", result.p, result.exact));
    }
    for w in 0..=15 {
        let (got, want) = (wilcoxon_exact_p(w as f64, 5), enumeration(w as f64, 5));
        if got.to_bits() != want.to_bits() {
            return fail(format!("W+={w}: {got} vs enumeration {want}"));
        }
    }
    let tied = [
        vec![0.1, 0.1, 0.2, -0.3, 0.4],
        vec![0.2, -0.2, 0.3, 0.5, 0.6],
        vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
    ];
    for d in &tied {
        if wilcoxon_one_sided(d).unwrap().exact {
            return fail(format!("{d:?} treated as exact"));
        }
    }
    pass("p = .03125 exact; enumeration agrees bit-for-bit for W+ 0..=15; tied/zero inputs inexact")
}

// ---------------------------------------------------------------- 4

fn levenshtein_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn normalized_oracle(a: &str, b: &str) -> f64 {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        1.0
    } else {
        1.0 - levenshtein_oracle(&a, &b) as f64 / longest as f64
    }
}

fn name_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec![
            "Logic",
            "logic",
            "Logik",
            "Gui",
            "GUI",
            "Model",
            "Models",
            "Storage",
            "Store",
            "Facade",
            "MediaAccess",
            "MediaAcess",
            "DataStorage",
            "Database",
            "DB",
            "UserManagement",
            "UserManager",
            "Cli",
            "Client",
        ])
        .prop_map(str::to_string),
        proptest::string::string_regex("[A-Z][a-z]{1,8}").unwrap(),
    ]
}

fn criterion_4() -> Outcome {
    let lists = (
        prop::collection::vec(name_strategy(), 0..10),
        prop::collection::vec(name_strategy(), 0..10),
        prop::sample::select(vec![0.3, 0.5, 0.7, 0.9]),
    );
    let aggregation = runner(200).run(&lists, |(doc, code, threshold)| {
        let config = AggregationConfig {
            threshold,
            ..AggregationConfig::default()
        };
        let out = aggregate_via_similarity(&doc, &code, &config).names;
        for (i, a) in out.iter().enumerate() {
            for b in &out[i + 1..] {
                prop_assert!(normalized_levenshtein_similarity(a, b) <= threshold, "{} ~ {}", a, b);
            }
        }
        let input: Vec<&String> = doc.iter().chain(&code).collect();
        let mut positions = Vec::new();
        for name in &out {
            let first = input
                .iter()
                .position(|n| n.to_lowercase() == name.to_lowercase())
                .unwrap();
            prop_assert_eq!(input[first], name);
            positions.push(first);
        }
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(&aggregate_via_similarity(&out, &[], &config).names, &out);
        Ok(())
    });
    if let Err(e) = aggregation {
        return fail(format!("aggregation: {e}"));
    }
    let string = || proptest::string::string_regex("[a-dA-DäÄ ]{0,10}").unwrap();
    let levenshtein = runner(1000).run(&(string(), string()), |(a, b)| {
        prop_assert_eq!(normalized_levenshtein_similarity(&a, &b), normalized_oracle(&a, &b));
        Ok(())
    });
    match levenshtein {
        Ok(()) => pass("200 aggregation cases hold all three properties; 1000 Levenshtein pairs equal the DP oracle"),
        Err(e) => fail(format!("levenshtein: {e}")),
    }
}

// ---------------------------------------------------------------- 5

#[derive(Deserialize)]
struct GoldenCase {
    name: String,
    response: String,
    casing: Casing,
    expected: Vec<String>,
}

fn criterion_5() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("parsing/component_lists.json")).unwrap();
    let cases: Vec<GoldenCase> = serde_json::from_str(&text).unwrap();
    let wrong: Vec<&str> = cases
        .iter()
        .filter(|c| parse_component_list(&c.response, c.casing) != c.expected)
        .map(|c| c.name.as_str())
        .collect();
    let legacy = parse_component_list("- Architecture and Main Entry Point", Casing::LegacySpaceRemoval);
    if cases.len() < 20 {
        fail(format!("only {} cases", cases.len()))
    } else if !wrong.is_empty() {
        fail(format!("mismatches: {}", wrong.join(", ")))
    } else if legacy != ["ArchitectureandMainEntryPoint"] {
        fail(format!("legacy case gave {legacy:?}"))
    } else {
        pass(format!(
            "{} canned responses parse exactly, including the legacy-casing case",
            cases.len()
        ))
    }
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let instances = (
        prop::collection::vec((1u32..=10, 0usize..6), 0..30),
        prop::collection::vec((0usize..6, 0usize..30), 0..60),
    );
    let result = runner(500).run(&instances, |(sad_sam, sam_code)| {
        let left = LinkSet::from_pairs(
            LinkKind::SadSam,
            sad_sam.iter().map(|(s, c)| (s.to_string(), format!("c{c}"))),
        );
        let right = LinkSet::from_pairs(
            LinkKind::SamCode,
            sam_code.iter().map(|(c, f)| (format!("c{c}"), format!("f{f}.java"))),
        );
        let mut oracle = BTreeSet::new();
        for (s, c) in &sad_sam {
            for (c2, f) in &sam_code {
                if c == c2 {
                    oracle.insert((s.to_string(), format!("f{f}.java")));
                }
            }
        }
        let expected = LinkSet::from_pairs(LinkKind::SadCode, oracle);
        prop_assert_eq!(compose_links(&left, &right).unwrap(), expected);
        Ok(())
    });
    match result {
        Ok(()) => pass("500 random instances equal the nested-loop join"),
        Err(e) => fail(e.to_string()),
    }
}

// ---------------------------------------------------------------- 7, 8

const TRACE_FILES: [&str; 11] = [
    "sam.csv",
    "entities.json",
    "sad_sam.csv",
    "sam_code.csv",
    "sad_code.csv",
    "report_sad_sam.json",
    "report_sad_sam.txt",
    "report_sam_code.json",
    "report_sam_code.txt",
    "report_sad_code.json",
    "report_sad_code.txt",
];

/// Runs the toy trace in replay mode. The provider URL points at a closed
/// local port, so any attempted network call would fail the run.
fn toy_trace(out: &Path) -> Result<(), String> {
    let toy = fixtures().join("toy");
    let conf = out.with_extension("conf");
    let abs = |f: &str| toy.join(f).display().to_string();
    let text = format!(
        "project=toy\nsad={}\ncode-root={}\nmode=doc\nllm-mode=replay\ncassette-path={}\n\
         gold-sad-sam={}\ngold-sam-code={}\ngold-sad-code={}\nprovider-url=http://127.0.0.1:9\n",
        abs("sad.txt"),
        abs("code"),
        abs("cassette.json"),
        abs("gold_sad_sam.csv"),
        abs("gold_sam_code.csv"),
        abs("gold_sad_code.csv"),
    );
    std::fs::write(&conf, text).map_err(|e| e.to_string())?;
    let output = Command::new(env!("CARGO_BIN_EXE_archtrace"))
        .args([
            "--config",
            conf.to_str().unwrap(),
            "trace",
            "--out",
            out.to_str().unwrap(),
        ])
        .env_remove("ARCHTRACE_API_KEY")
        .env_remove("OPENAI_API_KEY")
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&output.stderr).into_owned())
    }
}

fn criterion_7(scratch: &Path) -> Outcome {
    let runs: Vec<PathBuf> = (1..=3).map(|i| scratch.join(format!("run{i}"))).collect();
    for run in &runs {
        if let Err(e) = toy_trace(run) {
            return fail(format!("trace failed: {e}"));
        }
    }
    for file in TRACE_FILES {
        let first = std::fs::read(runs[0].join(file));
        for run in &runs[1..] {
            match (&first, std::fs::read(run.join(file))) {
                (Ok(a), Ok(b)) if *a == b => {}
                _ => return fail(format!("{file} differs or is missing")),
            }
        }
    }
    pass(format!(
        "{} output files byte-identical across 3 replay runs",
        TRACE_FILES.len()
    ))
}

fn criterion_8(scratch: &Path) -> Outcome {
    let run = scratch.join("run1");
    let f1 = |file: &str| -> Result<f64, String> {
        let json = std::fs::read_to_string(run.join(file)).map_err(|e| e.to_string())?;
        let report = Report::from_json(&json).map_err(|e| e.to_string())?;
        Ok(report.projects[0].metrics.f1)
    };
    match (f1("report_sam_code.json"), f1("report_sad_code.json")) {
        (Ok(sam_code), Ok(sad_code)) => {
            let detail = format!("SAM-code F1 {sam_code:.4}, SAD-code F1 {sad_code:.4}");
            // Cross-check the report against the counts it was built from.
            let analytic = precision_recall_f1(ConfusionCounts { tp: 21, fp: 0, fn_: 3 }).f1;
            if sam_code == 1.0 && sad_code >= 0.8 && (sad_code - analytic).abs() < 1e-12 {
                pass(detail)
            } else {
                fail(detail)
            }
        }
        (a, b) => fail(format!("reports unreadable: {a:?} {b:?}")),
    }
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let Some(start) = ENTITY_FORMAT.find("Example:") else {
        return fail("format prompt has no example");
    };
    let entities = match parse_entities(&ENTITY_FORMAT[start..]) {
        Ok(e) => e,
        Err(e) => return fail(e.to_string()),
    };
    let got: Vec<(&str, Vec<&str>, usize)> = entities
        .iter()
        .map(|e| {
            (
                e.name.as_str(),
                e.alternative_names.iter().map(String::as_str).collect(),
                e.occurrences.len(),
            )
        })
        .collect();
    let want = vec![
        ("AuthenticationService", vec!["service"], 3),
        ("UserDatabase", vec!["DB"], 2),
    ];
    if got == want {
        pass("2 entities: AuthenticationService [service] x3, UserDatabase [DB] x2")
    } else {
        fail(format!("{got:?}"))
    }
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temp dir");
    let second = Duration::from_secs(1);
    let outcomes = [
        (1, timed(Some(second), criterion_1)),
        (2, timed(Some(second), criterion_2)),
        (3, timed(Some(second), criterion_3)),
        (4, timed(None, criterion_4)),
        (5, timed(None, criterion_5)),
        (6, timed(Some(Duration::from_secs(5)), criterion_6)),
        (7, timed(None, || criterion_7(scratch.path()))),
        (8, timed(None, || criterion_8(scratch.path()))),
        (9, timed(None, criterion_9)),
    ];

    let mut unexpected = 0;
    for (n, outcome) in &outcomes {
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {n}: {}", outcome.detail);
        let known = KNOWN_FAILURES
            .iter()
            .any(|(k, d)| k == n && outcome.detail.starts_with(d));
        if !outcome.pass && !known {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|(_, o)| o.pass).count();
    println!("{passed}/{} criteria pass", outcomes.len());
    for (n, _) in outcomes
        .iter()
        .filter(|(n, o)| !o.pass && KNOWN_FAILURES.iter().any(|(k, _)| k == n))
    {
        println!("criterion {n} fails for a documented reason (see README, \"Known acceptance failure\")");
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
