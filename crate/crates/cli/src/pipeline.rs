//! Stage wiring shared by the subcommands.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

use archtrace::artemis::{run_artemis, write_entities_json, MatchConfig, RecognizedEntity};
use archtrace::code::{extract_packages, render_feature_text, scan_source_tree, CodeModel, ScanConfig};
use archtrace::eval::{build_report, confusion_counts, ProjectResult, Report};
use archtrace::exarch::{
    aggregate_via_prompt, aggregate_via_similarity, build_simple_sam, extract_names_from_code, extract_names_from_sad,
    AggregationConfig, ComponentNameList,
};
use archtrace::linker::{link_sam_to_code, LinkerConfig};
use archtrace::llm::Gateway;
use archtrace::model::{links_to_csv, write_component_list, GoldStandard, LinkKind, LinkSet, SadDocument, Sam};
use archtrace::transitive::compose_links;

/// Note attached to reports that contain heuristic model-to-code links.
pub const LINKER_NOTE: &str =
    "sam-code links come from the heuristic name/path linker, a stand-in for a full model-to-code linker";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceMode {
    #[default]
    Doc,
    Code,
    Both,
}

impl FromStr for SourceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "doc" => Ok(SourceMode::Doc),
            "code" => Ok(SourceMode::Code),
            "both" => Ok(SourceMode::Both),
            other => Err(format!("unknown mode `{other}` (doc|code|both)")),
        }
    }
}

impl fmt::Display for SourceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceMode::Doc => "doc",
            SourceMode::Code => "code",
            SourceMode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregationMethod {
    #[default]
    Prompt,
    Similarity,
}

impl FromStr for AggregationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prompt" => Ok(AggregationMethod::Prompt),
            "similarity" => Ok(AggregationMethod::Similarity),
            other => Err(format!("unknown aggregation `{other}` (prompt|similarity)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractionOptions {
    pub mode: SourceMode,
    pub aggregation: AggregationMethod,
    pub config: AggregationConfig,
    pub project: String,
}

/// Extracts a model. The documentation and the code features are only
/// loaded when the mode needs them.
pub fn extract_sam(
    options: &ExtractionOptions,
    sad: impl FnOnce() -> Result<SadDocument>,
    features: impl FnOnce() -> Result<String>,
    gateway: &Gateway,
) -> Result<Sam> {
    let casing = options.config.casing;
    let from_doc = |sad: SadDocument| -> Result<ComponentNameList> {
        extract_names_from_sad(&sad, gateway, casing).context("extract-sam stage failed (documentation)")
    };
    let from_code = |features: String| -> Result<ComponentNameList> {
        extract_names_from_code(&features, gateway, casing).context("extract-sam stage failed (code)")
    };
    let names = match options.mode {
        SourceMode::Doc => from_doc(sad()?)?,
        SourceMode::Code => from_code(features()?)?,
        SourceMode::Both => {
            let doc = from_doc(sad()?)?;
            let code = from_code(features()?)?;
            match options.aggregation {
                AggregationMethod::Similarity => aggregate_via_similarity(&doc.names, &code.names, &options.config),
                AggregationMethod::Prompt => aggregate_via_prompt(&doc.names, &code.names, gateway, casing)
                    .context("extract-sam stage failed (aggregation)")?,
            }
        }
    };
    build_simple_sam(&names, &options.project).context("extract-sam stage failed")
}

pub fn scan(root: &Path, config: &ScanConfig) -> Result<CodeModel> {
    scan_source_tree(root, config).with_context(|| format!("scan stage failed for {}", root.display()))
}

pub fn feature_text(model: &CodeModel) -> String {
    render_feature_text(&extract_packages(model))
}

/// Gold standards to evaluate a trace against; any may be absent.
#[derive(Debug, Clone, Default)]
pub struct Golds {
    pub sad_sam: Option<GoldStandard>,
    pub sam_code: Option<GoldStandard>,
    pub sad_code: Option<GoldStandard>,
}

#[derive(Debug, Clone)]
pub struct TraceOutput {
    pub sam: Sam,
    pub entities: Vec<RecognizedEntity>,
    pub sad_sam: LinkSet,
    pub sam_code: LinkSet,
    pub sad_code: LinkSet,
    /// `(link kind, report)` for every gold standard given.
    pub reports: Vec<(LinkKind, Report)>,
}

pub struct TraceStages<'a> {
    pub sad: &'a SadDocument,
    pub code: &'a CodeModel,
    pub matching: MatchConfig,
    pub linker: LinkerConfig,
}

/// Documentation -> model -> code, given a model (loaded or extracted).
pub fn trace(sam: Sam, stages: &TraceStages<'_>, golds: &Golds, gateway: &Gateway) -> Result<TraceOutput> {
    let run = run_artemis(stages.sad, &sam, gateway, &stages.matching).context("artemis stage failed")?;
    let sam_code = link_sam_to_code(&sam, stages.code, &stages.linker);
    let sad_code = compose_links(&run.links, &sam_code).context("compose stage failed")?;

    let mut reports = Vec::new();
    for (kind, found, gold) in [
        (LinkKind::SadSam, &run.links, &golds.sad_sam),
        (LinkKind::SamCode, &sam_code, &golds.sam_code),
        (LinkKind::SadCode, &sad_code, &golds.sad_code),
    ] {
        if let Some(gold) = gold {
            let mut report = evaluate(&[(sam.project.clone(), found, gold)])?;
            if kind != LinkKind::SadSam {
                report.notes.push(LINKER_NOTE.to_string());
            }
            reports.push((kind, report));
        }
    }
    Ok(TraceOutput {
        sam,
        entities: run.entities,
        sad_sam: run.links,
        sam_code,
        sad_code,
        reports,
    })
}

/// One report over `(project, found, gold)` triples.
pub fn evaluate(items: &[(String, &LinkSet, &GoldStandard)]) -> Result<Report> {
    let mut results = Vec::new();
    for (project, found, gold) in items {
        let counts = confusion_counts(found, gold).with_context(|| format!("eval stage failed for {project}"))?;
        results.push(ProjectResult::from_counts(project.clone(), counts).context("eval stage failed")?);
    }
    Ok(build_report(&results, Vec::new()))
}

/// Writes every trace artifact into `dir` with fixed names.
pub fn write_trace(output: &TraceOutput, dir: &Path) -> Result<()> {
    let write = || -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_component_list(&output.sam, dir.join("sam.csv"))?;
        write_entities_json(&output.entities, dir.join("entities.json"))?;
        std::fs::write(dir.join("sad_sam.csv"), links_to_csv(&output.sad_sam))?;
        std::fs::write(dir.join("sam_code.csv"), links_to_csv(&output.sam_code))?;
        std::fs::write(dir.join("sad_code.csv"), links_to_csv(&output.sad_code))?;
        for (kind, report) in &output.reports {
            report.write_to(dir, &format!("report_{}", kind.as_str().replace('-', "_")))?;
        }
        Ok(())
    };
    write().with_context(|| format!("write stage failed for {}", dir.display()))
}
