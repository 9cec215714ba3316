//! Evaluation against gold standards: confusion counts, precision/recall/F1,
//! project averages, a one-sided Wilcoxon signed-rank test and report output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::model::{GoldStandard, LinkKind, LinkSet};

pub const REPORT_VERSION: u32 = 1;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Absolute differences closer than this count as tied; differences taken
/// from two-decimal scores are not bit-equal after subtraction.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Above this many non-zero differences the exact distribution is not used.
pub const MAX_EXACT_N: usize = 20;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("found links are {found}, gold standard is {gold}")]
    KindMismatch { found: LinkKind, gold: LinkKind },
    #[error("cannot average an empty list of results")]
    EmptyResults,
    #[error("project {0} has no gold links")]
    EmptyGold(String),
    #[error("no differences given")]
    NoDifferences,
    #[error("all differences are zero; the test is undefined")]
    AllZero,
    #[error("{path}: line {line}: {message}")]
    MetricsCsv { path: String, line: u64, message: String },
    #[error("project {0} appears in only one of the compared result sets")]
    UnpairedProject(String),
    #[error("failed to write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    /// Builds metrics from precision and recall, deriving F1.
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        Self {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Precision,
    Recall,
    F1,
}

impl MetricKind {
    pub fn of(self, m: &Metrics) -> f64 {
        match self {
            MetricKind::Precision => m.precision,
            MetricKind::Recall => m.recall,
            MetricKind::F1 => m.f1,
        }
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "precision" | "p" => Ok(MetricKind::Precision),
            "recall" | "r" => Ok(MetricKind::Recall),
            "f1" => Ok(MetricKind::F1),
            other => Err(format!("unknown metric `{other}` (precision|recall|f1)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectResult {
    pub project: String,
    pub metrics: Metrics,
    pub gold_link_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<ConfusionCounts>,
}

impl ProjectResult {
    pub fn from_counts(project: impl Into<String>, counts: ConfusionCounts) -> Result<Self, EvalError> {
        let project = project.into();
        let gold = counts.tp + counts.fn_;
        if gold == 0 {
            return Err(EvalError::EmptyGold(project));
        }
        Ok(Self {
            project,
            metrics: precision_recall_f1(counts),
            gold_link_count: gold,
            counts: Some(counts),
        })
    }

    pub fn from_metrics(
        project: impl Into<String>,
        metrics: Metrics,
        gold_link_count: usize,
    ) -> Result<Self, EvalError> {
        let project = project.into();
        if gold_link_count == 0 {
            return Err(EvalError::EmptyGold(project));
        }
        Ok(Self {
            project,
            metrics,
            gold_link_count,
            counts: None,
        })
    }
}

pub fn confusion_counts(found: &LinkSet, gold: &GoldStandard) -> Result<ConfusionCounts, EvalError> {
    let gold = &gold.links;
    if found.kind() != gold.kind() {
        return Err(EvalError::KindMismatch {
            found: found.kind(),
            gold: gold.kind(),
        });
    }
    let tp = found.iter().filter(|l| gold.contains(l)).count();
    Ok(ConfusionCounts {
        tp,
        fp: found.len() - tp,
        fn_: gold.len() - tp,
    })
}

fn ratio(tp: usize, other: usize, complement: usize) -> f64 {
    if tp + other == 0 {
        // Nothing returned (or nothing expected): perfect only if the other
        // side is empty too.
        if complement == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        tp as f64 / (tp + other) as f64
    }
}

fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn precision_recall_f1(c: ConfusionCounts) -> Metrics {
    Metrics::from_pr(ratio(c.tp, c.fp, c.fn_), ratio(c.tp, c.fn_, c.fp))
}

pub fn macro_average(results: &[ProjectResult]) -> Result<Metrics, EvalError> {
    weighted_by(results, |_| 1.0)
}

pub fn weighted_average(results: &[ProjectResult]) -> Result<Metrics, EvalError> {
    // Scaling by a common weight can move the last bit; equal weights must
    // reproduce the macro average exactly.
    if results.windows(2).all(|w| w[0].gold_link_count == w[1].gold_link_count) {
        return macro_average(results);
    }
    weighted_by(results, |r| r.gold_link_count as f64)
}

fn weighted_by(results: &[ProjectResult], weight: impl Fn(&ProjectResult) -> f64) -> Result<Metrics, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let total: f64 = results.iter().map(&weight).sum();
    if total <= 0.0 {
        return Err(EvalError::EmptyResults);
    }
    let mean = |f: fn(&Metrics) -> f64| results.iter().map(|r| weight(r) * f(&r.metrics)).sum::<f64>() / total;
    Ok(Metrics {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
    })
}

/// Per-project metrics from a `project,precision,recall,f1` CSV, in file order.
pub fn parse_metrics_csv(content: &str, path: &str) -> Result<Vec<(String, Metrics)>, EvalError> {
    let err = |line: u64, message: String| EvalError::MetricsCsv {
        path: path.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(1, e.to_string()))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    if header != ["project", "precision", "recall", "f1"] {
        return Err(err(1, "expected header `project,precision,recall,f1`".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |i: usize| -> Result<f64, EvalError> {
            let v: f64 = record[i]
                .parse()
                .map_err(|_| err(line, format!("`{}` is not a number", &record[i])))?;
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(err(line, format!("{v} is outside [0, 1]")))
            }
        };
        rows.push((
            record[0].to_string(),
            Metrics {
                precision: number(1)?,
                recall: number(2)?,
                f1: number(3)?,
            },
        ));
    }
    Ok(rows)
}

pub fn load_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<(String, Metrics)>, EvalError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path)?;
    parse_metrics_csv(&content, &path.display().to_string())
}

/// `ours - baseline` for `metric`, paired by project name, in the order of `ours`.
pub fn paired_differences(
    ours: &[(String, Metrics)],
    baseline: &[(String, Metrics)],
    metric: MetricKind,
) -> Result<Vec<f64>, EvalError> {
    let theirs: BTreeMap<&str, &Metrics> = baseline.iter().map(|(p, m)| (p.as_str(), m)).collect();
    if let Some((p, _)) = baseline.iter().find(|(p, _)| !ours.iter().any(|(o, _)| o == p)) {
        return Err(EvalError::UnpairedProject(p.clone()));
    }
    ours.iter()
        .map(|(p, m)| {
            let other = theirs
                .get(p.as_str())
                .ok_or_else(|| EvalError::UnpairedProject(p.clone()))?;
            Ok(metric.of(m) - metric.of(other))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p: f64,
    pub exact: bool,
    /// Sum of the ranks of positive differences.
    pub w_plus: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub zeros_dropped: usize,
    pub has_ties: bool,
}

/// Average ranks (1-based) of `values`, grouping values within
/// [`TIE_TOLERANCE`]. Returns the ranks and the sizes of tie groups.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] - values[order[end - 1]] <= TIE_TOLERANCE {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        groups.push(end - start);
        start = end;
    }
    (ranks, groups)
}

/// `P(W+ >= w_plus)` under the null hypothesis for ranks `1..=n`, counting
/// every one of the `2^n` sign assignments by its rank sum.
pub fn wilcoxon_exact_p(w_plus: f64, n: usize) -> f64 {
    let max_sum = n * (n + 1) / 2;
    let mut counts = vec![0u64; max_sum + 1];
    counts[0] = 1;
    for rank in 1..=n {
        for s in (rank..=max_sum).rev() {
            counts[s] += counts[s - rank];
        }
    }
    let threshold = w_plus.ceil().max(0.0) as usize;
    let tail: u64 = counts.iter().skip(threshold).sum();
    tail as f64 / (1u64 << n) as f64
}

/// Normal approximation of `P(W+ >= w_plus)` with continuity correction and
/// tie correction from the given tie group sizes.
pub fn wilcoxon_normal_p(w_plus: f64, n: usize, tie_groups: &[usize]) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = tie_groups
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    let z = (w_plus - mean - 0.5) / variance.sqrt();
    Normal::standard().sf(z)
}

/// One-sided Wilcoxon signed-rank test with the alternative that the
/// differences are positive.
///
/// Zero differences are dropped. The exact null distribution is used when at
/// most [`MAX_EXACT_N`] differences remain, none are tied and none were
/// dropped; otherwise the normal approximation is used.
pub fn wilcoxon_one_sided(differences: &[f64]) -> Result<WilcoxonResult, EvalError> {
    if differences.is_empty() {
        return Err(EvalError::NoDifferences);
    }
    let nonzero: Vec<f64> = differences
        .iter()
        .copied()
        .filter(|d| d.abs() > TIE_TOLERANCE)
        .collect();
    if nonzero.is_empty() {
        return Err(EvalError::AllZero);
    }
    let zeros_dropped = differences.len() - nonzero.len();
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let (ranks, groups) = average_ranks(&magnitudes);
    let w_plus: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = nonzero.len();
    let has_ties = groups.iter().any(|&g| g > 1);
    let exact = n <= MAX_EXACT_N && !has_ties && zeros_dropped == 0;
    let p = if exact {
        wilcoxon_exact_p(w_plus, n)
    } else {
        wilcoxon_normal_p(w_plus, n, &groups)
    };
    Ok(WilcoxonResult {
        p,
        exact,
        w_plus,
        n,
        zeros_dropped,
        has_ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub result: WilcoxonResult,
    pub significant: bool,
}

impl Comparison {
    pub fn new(name: impl Into<String>, result: WilcoxonResult) -> Self {
        Self {
            name: name.into(),
            significant: result.p < SIGNIFICANCE_LEVEL,
            result,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub projects: Vec<ProjectResult>,
    pub average: Option<Metrics>,
    pub weighted_average: Option<Metrics>,
    pub significance: Vec<Comparison>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

const PROJECT_ORDER: [(&str, &str); 5] = [
    ("MS", "mediastore"),
    ("TS", "teastore"),
    ("TM", "teammates"),
    ("BBB", "bigbluebutton"),
    ("JR", "jabref"),
];

fn project_rank(name: &str) -> usize {
    PROJECT_ORDER
        .iter()
        .position(|(short, long)| name.eq_ignore_ascii_case(short) || name.eq_ignore_ascii_case(long))
        .unwrap_or(PROJECT_ORDER.len())
}

/// Short table label for a benchmark project, the name itself otherwise.
pub fn project_label(name: &str) -> &str {
    PROJECT_ORDER.get(project_rank(name)).map_or(name, |(short, _)| short)
}

pub fn build_report(results: &[ProjectResult], comparisons: Vec<Comparison>) -> Report {
    let mut projects = results.to_vec();
    projects.sort_by_key(|r| project_rank(&r.project));
    Report {
        version: REPORT_VERSION,
        average: macro_average(&projects).ok(),
        weighted_average: weighted_average(&projects).ok(),
        projects,
        significance: comparisons,
        notes: Vec::new(),
    }
}

/// Rounds half away from zero at `decimals` places. A small slack absorbs
/// binary representation error (`0.125` may be stored as `0.12499…`).
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x.abs() * scale;
    let rounded = (scaled + 0.5 + 1e-9).floor() / scale;
    rounded.copysign(x)
}

fn format_fraction(x: f64, decimals: u32) -> String {
    let r = round_half_up(x, decimals);
    if r >= 1.0 {
        return "1.0".to_string();
    }
    let s = format!("{:.*}", decimals as usize, r);
    s.strip_prefix('0').map(str::to_string).unwrap_or(s)
}

/// Table display of a metric: two decimals, half-up, no leading zero.
pub fn format_metric(x: f64) -> String {
    format_fraction(x, 2)
}

/// Table display of a p-value: three decimals, half-up, no leading zero.
pub fn format_p_value(p: f64) -> String {
    format_fraction(p, 3)
}

impl Report {
    pub fn to_json(&self) -> Result<String, EvalError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, Metrics)> = self
            .projects
            .iter()
            .map(|r| (project_label(&r.project).to_string(), r.metrics))
            .collect();
        if let Some(m) = self.average {
            rows.push(("Avg".into(), m));
        }
        if let Some(m) = self.weighted_average {
            rows.push(("w. Avg".into(), m));
        }
        let width = rows
            .iter()
            .map(|(l, _)| l.len())
            .max()
            .unwrap_or(0)
            .max("Project".len());

        let mut out = String::new();
        if !rows.is_empty() {
            let _ = writeln!(out, "{:<width$}  {:>5}  {:>5}  {:>5}", "Project", "P", "R", "F1");
        }
        for (label, m) in &rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>5}  {:>5}",
                label,
                format_metric(m.precision),
                format_metric(m.recall),
                format_metric(m.f1)
            );
        }

        if !self.significance.is_empty() {
            let width = self
                .significance
                .iter()
                .map(|c| c.name.len())
                .max()
                .unwrap_or(0)
                .max("Comparison".len());
            if !out.is_empty() {
                let _ = writeln!(out);
            }
            let _ = writeln!(out, "One-sided Wilcoxon signed-rank test (alpha = .05)");
            let _ = writeln!(out, "{:<width$}  {:>6}  Significant", "Comparison", "p");
            for c in &self.significance {
                let marker = if c.result.exact { "" } else { "*" };
                let p = format!("{}{}", format_p_value(c.result.p), marker);
                let verdict = if c.significant { "yes" } else { "no" };
                let _ = writeln!(out, "{:<width$}  {:>6}  {}", c.name, p, verdict);
            }
            if self.significance.iter().any(|c| !c.result.exact) {
                let _ = writeln!(
                    out,
                    "* normal approximation; exact p not available (ties or zero differences)"
                );
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.txt` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(), EvalError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        std::fs::write(dir.join(format!("{stem}.txt")), self.to_text())?;
        Ok(())
    }
}
