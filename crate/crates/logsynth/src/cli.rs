//! The `logsynth` command.
//!
//! Exit codes: 0 on success, 1 on validation or domain errors, 2 on usage
//! errors. Reports are line-oriented and stably ordered.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use logsynth_core::advisor;
use logsynth_core::dataset::{DatasetStats, GRID_FAILURE_PCT, GRID_MLSL, GRID_SIZES};
use logsynth_core::pattern::{check_containment, PatternKind, DEFAULT_SUBSET_BUDGET};
use logsynth_core::{DatasetSpec, SValue};
use serde::Serialize;
use serde_json::json;

use crate::io::{self, DatasetFiles, WriteOptions};
use crate::{audit_dataset_dir, generate, ingest, load_inputs, stats_of, GenerateOptions};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LOGSYNTH_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "logsynth-out";

/// Sizes of the default demo grid; `--full` uses every studied size.
const DEMO_SIZES: [usize; 3] = [200, 500, 1_000];
const DEMO_FAILURE_PCT: [u32; 2] = [5, 50];

#[derive(Debug, Parser)]
#[command(
    name = "logsynth",
    version,
    about = "Synthesize labelled log datasets for failure-prediction research"
)]
struct Cli {
    /// Master seed for randomized commands; a fresh seed is drawn and printed when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    /// Print only errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a behaviour model file and report its sValues.
    ModelValidate { model: PathBuf },
    /// Classify failure patterns and check that the model accepts their languages.
    PatternCheck {
        patterns: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Generate a labelled dataset, or a grid of them.
    Generate(GenerateArgs),
    /// Re-check every record of a dataset directory.
    Audit {
        dir: PathBuf,
        /// Audit a seeded random fraction of the records.
        #[arg(long, value_parser = parse_fraction)]
        sample: Option<f64>,
    },
    /// Turn labelled real-world task logs into a records file.
    Ingest {
        /// CSV with header task_id,timestamp,template_id,is_failure_message.
        #[arg(long)]
        records: PathBuf,
        /// CSV with header task_id,label.
        #[arg(long)]
        labels: PathBuf,
        /// Keep at most this many final messages per task.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
        #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
    },
    /// Recommend a predictor configuration and its training hyperparameters.
    Advise {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        size: u64,
        #[arg(long, value_parser = parse_pct)]
        failure_pct: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        mlsl: u64,
    },
    /// Print statistics of a dataset directory or records file.
    Stats { path: PathBuf },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Behaviour model JSON; its file stem is the model name.
    #[arg(long)]
    model: PathBuf,
    /// Failure patterns of that model.
    #[arg(long)]
    patterns: PathBuf,
    /// Number of records.
    #[arg(long, required_unless_present = "grid", value_parser = clap::value_parser!(u64).range(1..))]
    size: Option<u64>,
    /// Maximum log-sequence length.
    #[arg(long, required_unless_present = "grid", value_parser = clap::value_parser!(u64).range(1..))]
    mlsl: Option<u64>,
    /// Share of failure records, in percent.
    #[arg(long, required_unless_present = "grid", value_parser = parse_pct)]
    failure_pct: Option<f64>,
    /// Failure-pattern type: F (finite language) or I (infinite language).
    #[arg(long = "type", required_unless_present = "grid", value_parser = parse_kind)]
    kind: Option<PatternKind>,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
    /// Record a stratified 64/16/20 train/validation/test split in the manifest.
    #[arg(long)]
    split: bool,
    /// Also write a training split balanced 50:50 by oversampling (implies --split).
    #[arg(long)]
    oversample: bool,
    /// Generate the demo grid: sizes 200, 500, 1000 x MLSL 20, 50, 100, 500, 1000
    /// x failure percentages 5, 50 x types F, I (60 datasets), one directory each.
    #[arg(long, conflicts_with_all = ["size", "mlsl", "failure_pct", "kind"])]
    grid: bool,
    /// With --grid: every studied level (6 sizes up to 50000 x 5 MLSL x 6 failure
    /// percentages x 2 types = 360 datasets).
    #[arg(long, requires = "grid")]
    full: bool,
    /// Draw failures only from these pattern IDs.
    #[arg(long = "pattern")]
    pattern_filter: Vec<String>,
    /// Keep normal sequences clear of every pattern, not only the active type.
    #[arg(long)]
    strict: bool,
    /// Also write records.csv.
    #[arg(long)]
    csv: bool,
    /// Also write records.log with template text in place of IDs.
    #[arg(long)]
    rendered: bool,
}

fn parse_pct(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if v > 0.0 && v <= 100.0 {
        Ok(v)
    } else {
        Err("must be in (0, 100]".to_string())
    }
}

fn parse_fraction(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err("must be in (0, 1]".to_string())
    }
}

fn parse_kind(text: &str) -> Result<PatternKind, String> {
    PatternKind::from_code(text).ok_or_else(|| "must be F or I".to_string())
}

/// Where reports go.
struct Output<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
    quiet: bool,
}

impl Output<'_> {
    fn line(&mut self, text: impl AsRef<str>) -> std::io::Result<()> {
        if !self.quiet && !self.json {
            writeln!(self.out, "{}", text.as_ref())?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, value: &T) -> std::io::Result<()> {
        if !self.quiet && self.json {
            let text = serde_json::to_string_pretty(value).expect("serializable report");
            writeln!(self.out, "{text}")?;
        }
        Ok(())
    }

    fn warn(&mut self, text: impl AsRef<str>) -> std::io::Result<()> {
        writeln!(self.err, "warning: {}", text.as_ref())
    }
}

/// A failure after a successful parse, reported with exit code 1.
enum Failure {
    /// Report already printed.
    Reported,
    Error(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.into())
    }
}

impl From<io::FormatError> for Failure {
    fn from(e: io::FormatError) -> Self {
        Failure::Error(e.into())
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => write!(out, "{}", e.render()),
                _ => write!(err, "{}", e.render()),
            };
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut output = Output {
        out,
        err,
        json: cli.json,
        quiet: cli.quiet,
    };
    match dispatch(cli.command, cli.seed, &mut output) {
        Ok(()) => 0,
        Err(Failure::Reported) => 1,
        Err(Failure::Error(e)) => {
            let _ = writeln!(output.err, "error: {}", describe(&e));
            1
        }
    }
}

/// The error and its causes, skipping causes a message already quotes.
fn describe(e: &anyhow::Error) -> String {
    let mut text = e.to_string();
    for cause in e.chain().skip(1) {
        let cause = cause.to_string();
        if !text.contains(&cause) {
            text.push_str(": ");
            text.push_str(&cause);
        }
    }
    text
}

fn dispatch(command: Command, seed: Option<u64>, output: &mut Output<'_>) -> Result<(), Failure> {
    match command {
        Command::ModelValidate { model } => model_validate(&model, output),
        Command::PatternCheck { patterns, model } => pattern_check(&patterns, &model, output),
        Command::Generate(args) => {
            let seed = resolve_seed(seed, output)?;
            generate_cmd(args, seed, output)
        }
        Command::Audit { dir, sample } => {
            let seed = match sample {
                Some(_) => Some(resolve_seed(seed, output)?),
                None => None,
            };
            audit_cmd(&dir, sample.zip(seed), output)
        }
        Command::Ingest {
            records,
            labels,
            cap,
            out,
        } => ingest_cmd(&records, &labels, cap as usize, &out, output),
        Command::Advise {
            size,
            failure_pct,
            mlsl,
        } => advise_cmd(size as usize, failure_pct, mlsl as usize, output),
        Command::Stats { path } => {
            let stats = stats_of(&path)?;
            output.json(&stats)?;
            print_stats(output, &stats)?;
            Ok(())
        }
    }
}

fn resolve_seed(seed: Option<u64>, output: &mut Output<'_>) -> Result<u64, Failure> {
    Ok(match seed {
        Some(seed) => seed,
        None => {
            let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
            let seed = (nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id());
            writeln!(output.err, "seed={seed}")?;
            seed
        }
    })
}

fn model_validate(path: &Path, output: &mut Output<'_>) -> Result<(), Failure> {
    let loaded = io::load_model(path)?;
    let m = &loaded.model;
    let sv = m.s_values();
    let initial = sv.get(m.initial());
    let unreachable: Vec<&str> = sv.unreachable_states().map(|q| m.state_name(q)).collect();
    let isolated: Vec<&str> = m.isolated_states().into_iter().map(|q| m.state_name(q)).collect();

    output.json(&json!({
        "model": loaded.name,
        "states": m.state_count(),
        "transitions": m.transition_count(),
        "alphabet": m.symbol_count(),
        "initial": m.state_name(m.initial()),
        "accepting": m.accepting_states().map(|q| m.state_name(q)).collect::<Vec<_>>(),
        "s_value_initial": initial.finite(),
        "unreachable": unreachable,
        "isolated": isolated,
    }))?;
    output.line(format!(
        "states={} transitions={} sValue({})={}",
        m.state_count(),
        m.transition_count(),
        m.state_name(m.initial()),
        initial
    ))?;
    output.line(format!(
        "alphabet={} accepting={}",
        m.symbol_count(),
        m.accepting_states().count()
    ))?;
    if !unreachable.is_empty() {
        output.line(format!("unreachable: {}", unreachable.join(" ")))?;
    }
    if !isolated.is_empty() {
        output.warn(format!("isolated states: {}", isolated.join(" ")))?;
    }
    if initial == SValue::Unreachable {
        m.compute_s_values()
            .with_context(|| format!("model `{}`", loaded.name))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PatternReport {
    id: String,
    ok: bool,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    kind: Option<PatternKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<logsynth_core::PatternMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    proper: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn pattern_check(patterns: &Path, model_path: &Path, output: &mut Output<'_>) -> Result<(), Failure> {
    let loaded = io::load_model(model_path)?;
    let docs = io::read_pattern_documents(patterns)?;
    let mut reports = Vec::new();
    for doc in &docs {
        let mut report = PatternReport {
            id: doc.id.clone(),
            ok: false,
            kind: None,
            metrics: None,
            proper: None,
            error: None,
        };
        if doc.model != loaded.name {
            report.error = Some(format!("pattern is for model `{}`, not `{}`", doc.model, loaded.name));
            reports.push(report);
            continue;
        }
        match doc.compile(&loaded.model) {
            Err(e) => report.error = Some(e.to_string()),
            Ok(p) => {
                report.kind = Some(p.kind());
                report.metrics = Some(p.metrics());
                match check_containment(p.ast(), &loaded.model, DEFAULT_SUBSET_BUDGET) {
                    Err(e) => report.error = Some(e.to_string()),
                    Ok(c) => match c.witness {
                        Some(w) => {
                            report.error = Some(format!(
                                "not contained in model `{}`: witness [{}]",
                                loaded.name,
                                loaded.model.decode_word(&w).join(" ")
                            ))
                        }
                        None => {
                            report.ok = true;
                            report.proper = c.proper;
                        }
                    },
                }
            }
        }
        reports.push(report);
    }

    output.json(&reports)?;
    for r in &reports {
        match (&r.error, &r.metrics) {
            (Some(e), _) => output.line(format!("{} error: {e}", r.id))?,
            (None, Some(m)) => output.line(format!(
                "{} ok type={} length={} alphabet={} operators={} star_depth={} proper={}",
                r.id,
                r.kind.map_or("?", PatternKind::code),
                m.length,
                m.alphabet_size,
                m.operator_count,
                m.star_depth,
                if r.proper == Some(true) { "yes" } else { "no" }
            ))?,
            (None, None) => unreachable!("a passing pattern has metrics"),
        }
    }
    let failed = reports.iter().filter(|r| !r.ok).count();
    if failed > 0 {
        if output.quiet {
            writeln!(output.err, "{failed} of {} patterns failed", reports.len())?;
        }
        return Err(Failure::Reported);
    }
    Ok(())
}

fn grid_specs(model: &str, full: bool, seed: u64) -> Vec<DatasetSpec> {
    let sizes: &[usize] = if full { &GRID_SIZES } else { &DEMO_SIZES };
    let pcts: &[u32] = if full { &GRID_FAILURE_PCT } else { &DEMO_FAILURE_PCT };
    let mut specs = Vec::new();
    for &size in sizes {
        for &mlsl in &GRID_MLSL {
            for &pct in pcts {
                for kind in [PatternKind::Finite, PatternKind::Infinite] {
                    specs.push(DatasetSpec::new(model, size, mlsl, f64::from(pct), kind, seed));
                }
            }
        }
    }
    specs
}

/// Directory name of a grid dataset.
pub fn grid_dir_name(spec: &DatasetSpec) -> String {
    format!(
        "{}_s{}_m{}_p{}_{}",
        spec.model,
        spec.size,
        spec.mlsl,
        spec.failure_pct,
        spec.pattern_type.code()
    )
}

fn generate_cmd(args: GenerateArgs, seed: u64, output: &mut Output<'_>) -> Result<(), Failure> {
    let (loaded, patterns) = load_inputs(&args.model, &args.patterns)?;
    let configure = |mut spec: DatasetSpec| {
        if !args.pattern_filter.is_empty() {
            spec.pattern_filter = Some(args.pattern_filter.clone());
        }
        spec.strict_normals = args.strict;
        spec
    };
    let jobs: Vec<(PathBuf, DatasetSpec)> = if args.grid {
        grid_specs(&loaded.name, args.full, seed)
            .into_iter()
            .map(|s| (args.out.join(grid_dir_name(&s)), configure(s)))
            .collect()
    } else {
        let (Some(size), Some(mlsl), Some(pct), Some(kind)) = (args.size, args.mlsl, args.failure_pct, args.kind)
        else {
            unreachable!("clap requires the dataset flags without --grid");
        };
        let spec = DatasetSpec::new(&loaded.name, size as usize, mlsl as usize, pct, kind, seed);
        vec![(args.out.clone(), configure(spec))]
    };

    output.line(format!("seed={seed}"))?;
    let options = GenerateOptions {
        split: args.split,
        oversample: args.oversample,
    };
    let mut manifests = Vec::new();
    for (dir, spec) in &jobs {
        let mut generated = generate(&loaded.model, &patterns, spec, options)
            .with_context(|| format!("generating {}", dir.display()))?;
        io::write_dataset(
            dir,
            DatasetFiles {
                dataset: &mut generated.dataset,
                model: &loaded.model,
                catalog: &loaded.catalog,
                patterns: &patterns,
                oversampled_train: generated.oversampled_train.as_deref(),
            },
            WriteOptions {
                csv: args.csv,
                rendered: args.rendered,
            },
        )?;
        let manifest = &generated.dataset.manifest;
        output.line(format!(
            "{}: {} records, {} failure, {} normal",
            dir.display(),
            generated.dataset.records.len(),
            manifest.failure_count,
            manifest.normal_count
        ))?;
        if !args.grid {
            print_stats(output, &manifest.stats)?;
            output.line(format!("duplicates={}", manifest.duplicate_count))?;
            if let Some(s) = &manifest.splits {
                output.line(format!(
                    "split train={} validation={} test={}",
                    s.train.len(),
                    s.validation.len(),
                    s.test.len()
                ))?;
            }
            if let Some(train) = &generated.oversampled_train {
                output.line(format!("oversampled train={}", train.len()))?;
            }
        }
        for w in &manifest.warnings {
            if !args.grid {
                output.warn(w)?;
            }
        }
        manifests.push(json!({
            "dir": dir.display().to_string(),
            "failure_count": manifest.failure_count,
            "normal_count": manifest.normal_count,
            "duplicate_count": manifest.duplicate_count,
            "stats": manifest.stats,
        }));
    }
    if args.grid {
        output.line(format!("{} datasets", jobs.len()))?;
    }
    output.json(&json!({ "seed": seed, "datasets": manifests }))?;
    Ok(())
}

fn print_stats(output: &mut Output<'_>, s: &DatasetStats) -> std::io::Result<()> {
    output.line(format!("{} sequences, {:.2}% failures", s.sequences, s.failure_pct))?;
    output.line(format!(
        "unique_templates={} avg_lsl={:.2} min_lsl={} max_lsl={}",
        s.unique_templates, s.avg_lsl, s.min_lsl, s.max_lsl
    ))
}

fn audit_cmd(dir: &Path, sample: Option<(f64, u64)>, output: &mut Output<'_>) -> Result<(), Failure> {
    let report = audit_dataset_dir(dir, sample)?;
    output.json(&report)?;
    for v in &report.violations {
        output.line(v)?;
    }
    output.line(format!(
        "audited {} of {} records: {} violations",
        report.audited,
        report.total,
        report.violations.len()
    ))?;
    if report.is_clean() {
        return Ok(());
    }
    let flagged: Vec<String> = report.flagged.iter().map(ToString::to_string).collect();
    writeln!(
        output.err,
        "{} violations; records: {}",
        report.violations.len(),
        flagged.join(" ")
    )?;
    Err(Failure::Reported)
}

fn ingest_cmd(records: &Path, labels: &Path, cap: usize, out: &Path, output: &mut Output<'_>) -> Result<(), Failure> {
    let report = ingest(records, labels, cap, out)?;
    output.json(&report)?;
    for d in &report.dropped {
        output.line(format!("dropped task {}: {}", d.task_id, d.reason))?;
    }
    print_stats(output, &report.stats)?;
    output.line(format!("wrote {}", out.join(io::RECORDS_FILE).display()))?;
    Ok(())
}

fn advise_cmd(size: usize, failure_pct: f64, mlsl: usize, output: &mut Output<'_>) -> Result<(), Failure> {
    let advice = advisor::advise(size, failure_pct, mlsl).map_err(anyhow::Error::from)?;
    if advice.extrapolated {
        output.warn("inputs lie outside the studied ranges (size 200-50000, failure 5-50%, MLSL 20-1000); the estimate is extrapolated")?;
    }
    output.json(&advice)?;
    output.line(format!("config={}", advice.config))?;
    output.line(format!("expected_f1={}", advice.expected_f1))?;
    output.line(format!("batch_size={}", advice.batch_size))?;
    output.line(format!("epochs={}", advice.epochs))?;
    Ok(())
}
