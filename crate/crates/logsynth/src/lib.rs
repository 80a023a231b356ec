//! Command-line tool and file formats for synthesizing labelled log datasets.
//!
//! The algorithms live in `logsynth-core`; this crate reads and writes model,
//! pattern and dataset files, generates records in parallel and exposes the
//! `logsynth` command.

pub mod cli;
pub mod io;

use std::path::Path;

use logsynth_core::dataset::{
    audit_records, compute_stats, prepare_real_world, AssembleError, Assembly, DatasetStats, DropReason, Violation,
};
use logsynth_core::pattern::FailurePattern;
use logsynth_core::{BehaviourModel, Dataset, DatasetSpec, Label, LabeledSequence};
use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

pub use logsynth_core;

use crate::io::{FormatError, RawRecords, SymbolTable};

/// Same result as [`logsynth_core::dataset::assemble`], with records
/// generated on the rayon pool.
pub fn assemble_parallel(
    model: &BehaviourModel,
    patterns: &[FailurePattern],
    spec: &DatasetSpec,
) -> Result<Dataset, AssembleError> {
    let plan = Assembly::prepare(model, patterns, spec)?;
    let results: Vec<Result<LabeledSequence, AssembleError>> =
        (0..plan.len()).into_par_iter().map(|i| plan.record(i)).collect();
    // Collected in order so the reported error is the first failing record.
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(plan.finish(records))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GenerateOptions {
    pub split: bool,
    pub oversample: bool,
}

/// A dataset with its optional balanced training set.
pub struct Generated {
    pub dataset: Dataset,
    pub oversampled_train: Option<Vec<LabeledSequence>>,
}

/// Assembles a dataset, then splits and oversamples it as requested.
/// Oversampling implies splitting.
pub fn generate(
    model: &BehaviourModel,
    patterns: &[FailurePattern],
    spec: &DatasetSpec,
    options: GenerateOptions,
) -> Result<Generated, AssembleError> {
    let mut dataset = assemble_parallel(model, patterns, spec)?;
    let mut oversampled_train = None;
    if options.split || options.oversample {
        let splits = dataset.assign_splits().clone();
        if options.oversample {
            oversampled_train = Some(dataset.oversampled_train(&splits)?);
        }
    }
    Ok(Generated {
        dataset,
        oversampled_train,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditReport {
    pub total: usize,
    pub audited: usize,
    pub violations: Vec<String>,
    /// Indices of records with at least one violation.
    pub flagged: Vec<usize>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks a dataset directory against the model and patterns stored in
/// it. With `sample = Some((fraction, seed))` only a seeded random subset of
/// records is checked.
pub fn audit_dataset_dir(dir: &Path, sample: Option<(f64, u64)>) -> Result<AuditReport, FormatError> {
    let dataset = io::read_dataset(dir)?;
    let manifest = &dataset.manifest;
    let spec = &manifest.spec;
    let model_file = manifest.files.get("model").map_or(io::MODEL_FILE, String::as_str);
    let patterns_file = manifest.files.get("patterns").map_or(io::PATTERNS_FILE, String::as_str);
    let loaded = io::load_model_named(&dir.join(model_file), spec.model.clone())?;
    let patterns = io::load_patterns(&dir.join(patterns_file), &loaded.model, &spec.model)?;
    if loaded.model.symbol_names() != manifest.symbols.as_slice() {
        return Err(FormatError::Syntax {
            path: dir.join(io::MANIFEST_FILE),
            line: 0,
            message: "symbol table does not match the model alphabet".to_string(),
        });
    }

    let total = dataset.records.len();
    let selected: Vec<&LabeledSequence> = match sample {
        Some((fraction, seed)) if fraction < 1.0 => {
            let k = ((total as f64 * fraction).ceil() as usize).clamp(1.min(total), total);
            let mut rng = logsynth_core::rng::stream(seed, logsynth_core::rng::AUDIT_STREAM);
            let mut picked = index::sample(&mut rng, total, k).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| &dataset.records[i]).collect()
        }
        _ => dataset.records.iter().collect(),
    };

    let found: Vec<Violation> = audit_records(
        selected.iter().copied(),
        &loaded.model,
        &patterns,
        &manifest.checked_patterns,
        spec.mlsl,
    );
    let mut report = AuditReport {
        total,
        audited: selected.len(),
        violations: found.iter().map(ToString::to_string).collect(),
        flagged: found.iter().map(|v| v.index).collect(),
    };
    report.flagged.dedup();

    if selected.len() == total {
        let failures = dataset.records.iter().filter(|r| r.label == Label::Failure).count();
        if failures != manifest.failure_count {
            report.violations.push(format!(
                "manifest: {} failure records, manifest says {}",
                failures, manifest.failure_count
            ));
        }
        if failures != spec.failure_count() {
            report.violations.push(format!(
                "manifest: {} failure records, spec requires {}",
                failures,
                spec.failure_count()
            ));
        }
        if let Some(splits) = &manifest.splits {
            let mut all: Vec<usize> = splits
                .train
                .iter()
                .chain(&splits.validation)
                .chain(&splits.test)
                .copied()
                .collect();
            all.sort_unstable();
            if all != (0..total).collect::<Vec<_>>() {
                report
                    .violations
                    .push("manifest: splits do not partition the records".to_string());
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DroppedTaskReport {
    pub task_id: String,
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestReport {
    pub cap: usize,
    pub stats: DatasetStats,
    pub dropped: Vec<DroppedTaskReport>,
    pub task_ids: Vec<String>,
}

/// Converts a real-world log and its task labels into a records file in
/// `out`, returning the report also written next to it.
pub fn ingest(records_csv: &Path, labels_csv: &Path, cap: usize, out: &Path) -> Result<IngestReport, FormatError> {
    let raw = io::read_raw_log(records_csv)?;
    let labels = io::read_task_labels(labels_csv)?;
    let corpus = raw.with_records(|records| match records {
        RawRecords::Integer(r) => prepare_real_world(r, &labels, cap),
        RawRecords::Decimal(r) => prepare_real_world(r, &labels, cap),
        RawRecords::Text(r) => prepare_real_world(r, &labels, cap),
    });
    let report = IngestReport {
        cap,
        stats: compute_stats(&corpus.records),
        dropped: corpus
            .dropped
            .iter()
            .map(|d| DroppedTaskReport {
                task_id: d.task_id.clone(),
                reason: match d.reason {
                    DropReason::EmptyAfterTruncation => "first message is a failure message",
                    DropReason::MissingLabel => "no label",
                },
            })
            .collect(),
        task_ids: corpus.task_ids.clone(),
    };
    std::fs::create_dir_all(out).map_err(io::io_err(out))?;
    let path = out.join(io::RECORDS_FILE);
    io::write_records(io::create_file(&path)?, &corpus.records, &corpus.symbols).map_err(io::io_err(&path))?;
    io::write_json(&out.join("ingest.json"), &report)?;
    Ok(report)
}

/// Statistics of a dataset directory or a bare records file.
pub fn stats_of(path: &Path) -> Result<DatasetStats, FormatError> {
    if path.is_dir() {
        let manifest_path = path.join(io::MANIFEST_FILE);
        if manifest_path.exists() {
            return Ok(compute_stats(&io::read_dataset(path)?.records));
        }
        let records = io::read_records(&path.join(io::RECORDS_FILE), &mut SymbolTable::open())?;
        return Ok(compute_stats(&records));
    }
    Ok(compute_stats(&io::read_records(path, &mut SymbolTable::open())?))
}

/// Loads a model file and its pattern file.
pub fn load_inputs(
    model_path: &Path,
    patterns_path: &Path,
) -> Result<(io::LoadedModel, Vec<FailurePattern>), FormatError> {
    let loaded = io::load_model(model_path)?;
    let patterns = io::load_patterns(patterns_path, &loaded.model, &loaded.name)?;
    Ok((loaded, patterns))
}
