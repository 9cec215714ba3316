//! The `archtrace` command line.

pub mod config;
pub mod pipeline;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use archtrace::artemis::{run_artemis, MatchConfig};
use archtrace::code::ScanConfig;
use archtrace::eval::{build_report, load_metrics_csv, paired_differences, wilcoxon_one_sided, Comparison, MetricKind};
use archtrace::exarch::{AggregationConfig, Casing};
use archtrace::linker::{link_sam_to_code, LinkerConfig};
use archtrace::llm::{Cassette, Gateway, HttpBackend, LlmMode, ModelSettings};
use archtrace::model::{
    component_list_to_csv, links_to_csv, load_component_list, load_gold_links, load_links, load_sad, LinkKind,
    SadDocument, Sam,
};

use config::{load_config, Config, ConfigError};
use pipeline::{AggregationMethod, ExtractionOptions, Golds, SourceMode, TraceStages};

pub const DEFAULT_PROVIDER_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_TRACE_OUT: &str = "archtrace-out";
/// Checked first, then `OPENAI_API_KEY`.
pub const API_KEY_ENV: &str = "ARCHTRACE_API_KEY";

#[derive(Debug, Parser)]
#[command(name = "archtrace", version, about = "Architecture-based traceability link recovery")]
pub struct Cli {
    /// Flat key=value run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = LlmMode::from_str)]
    pub llm_mode: Option<LlmMode>,
    /// Cassette file for record/replay.
    #[arg(long, global = true)]
    pub cassette: Option<PathBuf>,
    /// Output directory; single-artifact commands print to stdout without it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a source tree and summarize it.
    Scan {
        root: PathBuf,
        #[arg(long)]
        exclude_test_code: bool,
    },
    /// Extract a simple architecture model (component names).
    ExtractSam(ExtractArgs),
    /// Link documentation sentences to model components.
    Artemis {
        #[arg(long)]
        sad: Option<PathBuf>,
        #[arg(long)]
        sam: Option<PathBuf>,
    },
    /// Link model components to code files.
    Codelink {
        #[arg(long)]
        sam: Option<PathBuf>,
        #[arg(long)]
        root: Option<PathBuf>,
        #[command(flatten)]
        linker: LinkerArgs,
    },
    /// Documentation -> model -> code, end to end.
    Trace {
        #[command(flatten)]
        extract: ExtractArgs,
        /// Use this model instead of extracting one.
        #[arg(long)]
        sam: Option<PathBuf>,
        #[command(flatten)]
        linker: LinkerArgs,
        #[arg(long)]
        gold_sad_sam: Option<PathBuf>,
        #[arg(long)]
        gold_sam_code: Option<PathBuf>,
        #[arg(long)]
        gold_sad_code: Option<PathBuf>,
    },
    /// Precision, recall and F1 of found links against gold standards.
    Eval {
        /// Found links; repeat together with --gold for several projects.
        #[arg(long, required = true)]
        found: Vec<PathBuf>,
        #[arg(long, required = true)]
        gold: Vec<PathBuf>,
        #[arg(long)]
        project: Vec<String>,
        #[arg(long, default_value = "sad-code", value_parser = LinkKind::from_str)]
        kind: LinkKind,
    },
    /// One-sided Wilcoxon signed-rank test of ours > each baseline.
    Significance {
        /// Metrics CSV (`project,precision,recall,f1`).
        #[arg(long)]
        ours: PathBuf,
        #[arg(long, required = true)]
        baseline: Vec<PathBuf>,
        #[arg(long, default_value = "f1", value_parser = MetricKind::from_str)]
        metric: MetricKind,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub sad: Option<PathBuf>,
    #[arg(long)]
    pub code_root: Option<PathBuf>,
    #[arg(long, value_parser = SourceMode::from_str)]
    pub mode: Option<SourceMode>,
    #[arg(long, value_parser = AggregationMethod::from_str)]
    pub aggregation: Option<AggregationMethod>,
    /// Similarity aggregation threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_parser = Casing::from_str)]
    pub casing: Option<Casing>,
    #[arg(long)]
    pub project: Option<String>,
    #[arg(long)]
    pub exclude_test_code: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LinkerArgs {
    #[arg(long)]
    pub link_threshold: Option<f64>,
    #[arg(long)]
    pub dominance_band: Option<f64>,
}

/// A problem with the invocation or configuration rather than the inputs.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

impl From<ConfigError> for UsageError {
    fn from(e: ConfigError) -> Self {
        UsageError(e.to_string())
    }
}

/// Runs the command line and returns the process exit code:
/// 0 on success, 1 when a pipeline stage fails, 2 on usage errors.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => {
            let (config, warnings) = load_config(path).map_err(UsageError::from)?;
            for warning in warnings {
                eprintln!("warning: {warning}");
            }
            if config.get("heuristic-weights").is_some() {
                eprintln!("warning: `heuristic-weights` is reserved and has no effect");
            }
            config
        }
        None => Config::default(),
    };
    let ctx = Session {
        config,
        llm_mode: cli.llm_mode,
        cassette: cli.cassette,
        out: cli.out,
    };
    match cli.command {
        Command::Scan {
            root,
            exclude_test_code,
        } => ctx.scan(&root, exclude_test_code),
        Command::ExtractSam(args) => ctx.extract_sam(&args),
        Command::Artemis { sad, sam } => ctx.artemis(sad, sam),
        Command::Codelink { sam, root, linker } => ctx.codelink(sam, root, &linker),
        Command::Trace {
            extract,
            sam,
            linker,
            gold_sad_sam,
            gold_sam_code,
            gold_sad_code,
        } => ctx.trace(&extract, sam, &linker, [gold_sad_sam, gold_sam_code, gold_sad_code]),
        Command::Eval {
            found,
            gold,
            project,
            kind,
        } => ctx.eval(&found, &gold, &project, kind),
        Command::Significance { ours, baseline, metric } => ctx.significance(&ours, &baseline, metric),
    }
}

/// Resolved global state: flags win over the config file, which wins over
/// built-in defaults.
struct Session {
    config: Config,
    llm_mode: Option<LlmMode>,
    cassette: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Session {
    fn value<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => Ok(self.config.parse(key).map_err(UsageError::from)?),
        }
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.config.path(key))
    }

    fn require_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.path(flag, key)
            .ok_or_else(|| usage(format!("missing --{key} (or `{key}` in the config)")))
    }

    fn out(&self) -> Option<PathBuf> {
        self.path(self.out.clone(), "out")
    }

    /// Writes `content` to `<out>/<file>`, or to stdout without an output directory.
    fn emit(&self, file: &str, content: &str) -> Result<()> {
        match self.out() {
            Some(dir) => {
                let path = dir.join(file);
                std::fs::create_dir_all(&dir)
                    .and_then(|_| std::fs::write(&path, content))
                    .with_context(|| format!("write stage failed for {}", path.display()))
            }
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }

    fn scan_config(&self, exclude_test_code: bool) -> Result<ScanConfig> {
        let mut scan = ScanConfig::default();
        if let Some(roots) = self.config.list("source-roots") {
            scan.source_roots = roots;
        }
        if let Some(extensions) = self.config.list("extensions") {
            scan.extensions = extensions;
        }
        if let Some(globs) = self.config.list("exclude-globs") {
            scan.exclude_globs = globs;
        }
        scan.exclude_test_code = exclude_test_code
            || self
                .config
                .bool("exclude-test-code")
                .map_err(UsageError::from)?
                .unwrap_or(false);
        Ok(scan)
    }

    fn match_config(&self) -> Result<MatchConfig> {
        let d = MatchConfig::default();
        Ok(MatchConfig {
            jaro_winkler_threshold: self
                .value(None, "jaro-winkler-threshold")?
                .unwrap_or(d.jaro_winkler_threshold),
            levenshtein_threshold: self
                .value(None, "levenshtein-threshold")?
                .unwrap_or(d.levenshtein_threshold),
            cosine_threshold: self.value(None, "cosine-threshold")?.unwrap_or(d.cosine_threshold),
        })
    }

    fn linker_config(&self, args: &LinkerArgs) -> Result<LinkerConfig> {
        let d = LinkerConfig::default();
        Ok(LinkerConfig {
            threshold: self
                .value(args.link_threshold, "link-threshold")?
                .unwrap_or(d.threshold),
            dominance_band: self
                .value(args.dominance_band, "dominance-band")?
                .unwrap_or(d.dominance_band),
        })
    }

    fn gateway(&self) -> Result<Gateway> {
        let cassette = self.path(self.cassette.clone(), "cassette-path");
        let mode = match self.value(self.llm_mode, "llm-mode")? {
            Some(mode) => mode,
            None if cassette.is_some() => LlmMode::Replay,
            None => LlmMode::Live,
        };
        let d = ModelSettings::default();
        let settings = ModelSettings {
            chat_model: self.config.get("model").map_or(d.chat_model, str::to_string),
            embedding_model: self
                .config
                .get("embedding-model")
                .map_or(d.embedding_model, str::to_string),
            temperature: self.value(None, "temperature")?.unwrap_or(d.temperature),
            seed: self.value(None, "seed")?.unwrap_or(d.seed),
        };
        if settings.temperature.is_nan() || settings.temperature < 0.0 {
            return Err(usage(format!(
                "temperature {} must be non-negative",
                settings.temperature
            )));
        }
        let backend = || {
            let url = self.config.get("provider-url").unwrap_or(DEFAULT_PROVIDER_URL);
            let key = std::env::var(API_KEY_ENV)
                .or_else(|_| std::env::var("OPENAI_API_KEY"))
                .ok();
            Box::new(HttpBackend::new(url, key))
        };
        Ok(match mode {
            LlmMode::Live => Gateway::live(backend(), settings),
            LlmMode::Replay => {
                let path = cassette.ok_or_else(|| usage("--llm-mode replay needs --cassette (or `cassette-path`)"))?;
                let cassette = Cassette::load(&path).context("llm stage failed")?;
                Gateway::replay(cassette, settings)
            }
            LlmMode::Record => {
                let path = cassette.ok_or_else(|| usage("--llm-mode record needs --cassette (or `cassette-path`)"))?;
                let cassette = Cassette::load_or_new(&path).context("llm stage failed")?;
                Gateway::record(backend(), settings, cassette, Some(path))
            }
        })
    }

    fn load_sad(&self, path: &Path) -> Result<SadDocument> {
        load_sad(path).context("load stage failed")
    }

    fn load_sam(&self, path: &Path) -> Result<Sam> {
        load_component_list(path).context("load stage failed")
    }

    /// Project name: flag, config, then the name of the directory holding
    /// the first input.
    fn project(&self, flag: Option<String>, inputs: &[Option<&Path>]) -> String {
        flag.or_else(|| self.config.get("project").map(str::to_string))
            .or_else(|| {
                inputs.iter().flatten().find_map(|p| {
                    p.canonicalize()
                        .ok()?
                        .parent()?
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                })
            })
            .unwrap_or_else(|| "project".to_string())
    }

    fn scan(&self, root: &Path, exclude_test_code: bool) -> Result<()> {
        let model = pipeline::scan(root, &self.scan_config(exclude_test_code)?)?;
        println!("root: {}", root.display());
        println!("files: {}", model.file_count());
        println!("packages: {}", model.packages.len());
        for package in &model.packages {
            println!("  {package}");
        }
        if let Some(dir) = self.out() {
            let json = serde_json::to_string_pretty(&model).context("write stage failed")? + "\n";
            std::fs::create_dir_all(&dir)
                .and_then(|_| std::fs::write(dir.join("code_model.json"), json))
                .with_context(|| format!("write stage failed for {}", dir.display()))?;
        }
        Ok(())
    }

    fn extraction_options(&self, args: &ExtractArgs, project: String) -> Result<ExtractionOptions> {
        let d = AggregationConfig::default();
        Ok(ExtractionOptions {
            mode: self.value(args.mode, "mode")?.unwrap_or_default(),
            aggregation: self.value(args.aggregation, "aggregation")?.unwrap_or_default(),
            config: AggregationConfig {
                threshold: self.value(args.threshold, "threshold")?.unwrap_or(d.threshold),
                casing: self.value(args.casing, "casing")?.unwrap_or(d.casing),
            },
            project,
        })
    }

    /// Extracts a model, touching only the inputs the mode needs.
    fn extract(&self, args: &ExtractArgs, gateway: &Gateway) -> Result<Sam> {
        let sad_path = self.path(args.sad.clone(), "sad");
        let code_root = self.path(args.code_root.clone(), "code-root");
        let options = self.extraction_options(
            args,
            self.project(args.project.clone(), &[sad_path.as_deref(), code_root.as_deref()]),
        )?;
        let needs_sad = options.mode != SourceMode::Code;
        let needs_code = options.mode != SourceMode::Doc;
        let sad_path = if needs_sad {
            Some(self.require_path(args.sad.clone(), "sad")?)
        } else {
            None
        };
        let code_root = if needs_code {
            Some(self.require_path(args.code_root.clone(), "code-root")?)
        } else {
            None
        };
        let scan = self.scan_config(args.exclude_test_code)?;
        pipeline::extract_sam(
            &options,
            || self.load_sad(sad_path.as_deref().expect("checked above")),
            || {
                Ok(pipeline::feature_text(&pipeline::scan(
                    code_root.as_deref().expect("checked above"),
                    &scan,
                )?))
            },
            gateway,
        )
    }

    fn extract_sam(&self, args: &ExtractArgs) -> Result<()> {
        let gateway = self.gateway()?;
        let sam = self.extract(args, &gateway)?;
        self.emit("sam.csv", &component_list_to_csv(&sam))
    }

    fn artemis(&self, sad: Option<PathBuf>, sam: Option<PathBuf>) -> Result<()> {
        let sad = self.load_sad(&self.require_path(sad, "sad")?)?;
        let sam = self.load_sam(&self.require_path(sam, "sam")?)?;
        let matching = self.match_config()?;
        let gateway = self.gateway()?;
        let run = run_artemis(&sad, &sam, &gateway, &matching).context("artemis stage failed")?;
        self.emit("sad_sam.csv", &links_to_csv(&run.links))
    }

    fn codelink(&self, sam: Option<PathBuf>, root: Option<PathBuf>, linker: &LinkerArgs) -> Result<()> {
        let sam = self.load_sam(&self.require_path(sam, "sam")?)?;
        let root = self.require_path(root, "code-root")?;
        let linker = self.linker_config(linker)?;
        let code = pipeline::scan(&root, &self.scan_config(false)?)?;
        self.emit("sam_code.csv", &links_to_csv(&link_sam_to_code(&sam, &code, &linker)))
    }

    fn trace(
        &self,
        args: &ExtractArgs,
        sam: Option<PathBuf>,
        linker: &LinkerArgs,
        golds: [Option<PathBuf>; 3],
    ) -> Result<()> {
        let [gold_sad_sam, gold_sam_code, gold_sad_code] = golds;
        let sad_path = self.require_path(args.sad.clone(), "sad")?;
        let code_root = self.require_path(args.code_root.clone(), "code-root")?;
        let load_gold = |flag: Option<PathBuf>, key: &str, kind| -> Result<_> {
            self.path(flag, key)
                .map(|p| load_gold_links(p, kind).context("load stage failed"))
                .transpose()
        };
        let golds = Golds {
            sad_sam: load_gold(gold_sad_sam, "gold-sad-sam", LinkKind::SadSam)?,
            sam_code: load_gold(gold_sam_code, "gold-sam-code", LinkKind::SamCode)?,
            sad_code: load_gold(gold_sad_code, "gold-sad-code", LinkKind::SadCode)?,
        };
        let matching = self.match_config()?;
        let linker = self.linker_config(linker)?;
        let out = self.out().unwrap_or_else(|| PathBuf::from(DEFAULT_TRACE_OUT));
        let gateway = self.gateway()?;

        let project = self.project(args.project.clone(), &[Some(&sad_path), Some(&code_root)]);
        let sam = match self.path(sam, "sam") {
            Some(path) => Sam {
                project: project.clone(),
                ..self.load_sam(&path)?
            },
            None => self.extract(args, &gateway)?,
        };
        let sad = self.load_sad(&sad_path)?;
        let code = pipeline::scan(&code_root, &self.scan_config(args.exclude_test_code)?)?;
        let stages = TraceStages {
            sad: &sad,
            code: &code,
            matching,
            linker,
        };
        let output = pipeline::trace(sam, &stages, &golds, &gateway)?;
        pipeline::write_trace(&output, &out)?;
        for (kind, report) in &output.reports {
            println!("{kind}");
            print!("{}", report.to_text());
        }
        println!(
            "wrote {} sad-sam, {} sam-code, {} sad-code links to {}",
            output.sad_sam.len(),
            output.sam_code.len(),
            output.sad_code.len(),
            out.display()
        );
        Ok(())
    }

    fn eval(&self, found: &[PathBuf], gold: &[PathBuf], projects: &[String], kind: LinkKind) -> Result<()> {
        if found.len() != gold.len() {
            return Err(usage(format!("{} --found but {} --gold", found.len(), gold.len())));
        }
        if !projects.is_empty() && projects.len() != found.len() {
            return Err(usage(format!(
                "{} --project for {} link files",
                projects.len(),
                found.len()
            )));
        }
        let mut loaded = Vec::new();
        for (i, (f, g)) in found.iter().zip(gold).enumerate() {
            let name = projects
                .get(i)
                .cloned()
                .unwrap_or_else(|| self.project(None, &[Some(g.as_path())]));
            let found = load_links(f, kind).context("load stage failed")?;
            let gold = load_gold_links(g, kind).context("load stage failed")?;
            loaded.push((name, found, gold));
        }
        let items: Vec<_> = loaded.iter().map(|(n, f, g)| (n.clone(), f, g)).collect();
        let report = pipeline::evaluate(&items)?;
        if let Some(dir) = self.out() {
            report.write_to(&dir, "report").context("write stage failed")?;
        }
        print!("{}", report.to_text());
        Ok(())
    }

    fn significance(&self, ours: &Path, baselines: &[PathBuf], metric: MetricKind) -> Result<()> {
        let ours = load_metrics_csv(ours).context("load stage failed")?;
        let mut comparisons = Vec::new();
        for path in baselines {
            let theirs = load_metrics_csv(path).context("load stage failed")?;
            let name = path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            let run = || -> Result<Comparison> {
                let differences = paired_differences(&ours, &theirs, metric)?;
                Ok(Comparison::new(name.clone(), wilcoxon_one_sided(&differences)?))
            };
            comparisons.push(run().with_context(|| format!("significance stage failed for {name}"))?);
        }
        let report = build_report(&[], comparisons);
        if let Some(dir) = self.out() {
            report.write_to(&dir, "significance").context("write stage failed")?;
        }
        print!("{}", report.to_text());
        Ok(())
    }
}
