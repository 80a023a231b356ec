//! Labelled dataset assembly under controlled characteristics.
//!
//! A [`DatasetSpec`] fixes the dataset size, the maximum log-sequence length
//! (MLSL), the failure percentage and the failure-pattern type. Assembly
//! produces exactly `round(size * failure_pct / 100)` failure sequences and
//! fills the rest with normal sequences, then shuffles with the master seed.
//!
//! Every record is generated from its own random stream, so
//! [`Assembly::record`] can be evaluated in any order or in parallel and the
//! result is always the same.

mod audit;
mod realworld;
mod split;
mod stats;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::automaton::{BehaviourModel, ModelError, SValueMap, SymbolId};
use crate::generator::{
    build_failure_pool, check_walkable, draw_failure_sequence, generate_normal_sequence, FailurePool, GenerateError,
    PoolMetadata, WalkConfig, DEFAULT_MAX_ATTEMPTS, DEFAULT_SAMPLES_PER_PATTERN,
};
use crate::pattern::{check_inclusion, FailurePattern, PatternKind};
use crate::rng;

pub use audit::{audit_records, Violation, ViolationKind};
pub use realworld::{prepare_real_world, DropReason, DroppedTask, RawLogRecord, RealWorldCorpus};
pub use split::{oversample, split, split_sizes, Splits};
pub use stats::{compute_stats, DatasetStats};

/// Dataset sizes studied in the experiment grid.
pub const GRID_SIZES: [usize; 6] = [200, 500, 1_000, 5_000, 10_000, 50_000];
/// Maximum log-sequence lengths studied in the experiment grid.
pub const GRID_MLSL: [usize; 5] = [20, 50, 100, 500, 1_000];
/// Failure percentages studied in the experiment grid.
pub const GRID_FAILURE_PCT: [u32; 6] = [5, 10, 20, 30, 40, 50];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Failure,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Failure => "failure",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One log sequence with its label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSequence {
    pub templates: Vec<SymbolId>,
    pub label: Label,
    /// The pattern a synthetic failure was drawn from.
    pub pattern_id: Option<String>,
    /// Position of the record in its dataset.
    pub index: usize,
    /// Set on oversampling duplicates: the index of the copied record.
    pub origin: Option<usize>,
}

impl LabeledSequence {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub size: usize,
    pub mlsl: usize,
    pub failure_pct: f64,
    pub pattern_type: PatternKind,
    pub model: String,
    pub seed: u64,
    /// Restricts failure generation to these pattern IDs.
    #[serde(default)]
    pub pattern_filter: Option<Vec<String>>,
    /// Normal sequences avoid every pattern of the model, not just the
    /// active ones.
    #[serde(default)]
    pub strict_normals: bool,
    #[serde(default = "default_samples")]
    pub samples_per_pattern: usize,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES_PER_PATTERN
}

fn default_attempts() -> usize {
    DEFAULT_MAX_ATTEMPTS
}

impl DatasetSpec {
    pub fn new(
        model: impl Into<String>,
        size: usize,
        mlsl: usize,
        failure_pct: f64,
        pattern_type: PatternKind,
        seed: u64,
    ) -> Self {
        Self {
            size,
            mlsl,
            failure_pct,
            pattern_type,
            model: model.into(),
            seed,
            pattern_filter: None,
            strict_normals: false,
            samples_per_pattern: DEFAULT_SAMPLES_PER_PATTERN,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn validate(&self) -> Result<(), AssembleError> {
        let bad = |msg: &str| Err(AssembleError::InvalidSpec(msg.to_string()));
        if self.size == 0 {
            return bad("size must be at least 1");
        }
        if self.mlsl == 0 {
            return bad("mlsl must be at least 1");
        }
        if !(self.failure_pct > 0.0 && self.failure_pct <= 100.0) {
            return bad("failure percentage must be in (0, 100]");
        }
        if self.samples_per_pattern == 0 {
            return bad("samples per pattern must be at least 1");
        }
        if self.max_attempts == 0 {
            return bad("max attempts must be at least 1");
        }
        Ok(())
    }

    /// `round(size * failure_pct / 100)`, rounding halves up.
    pub fn failure_count(&self) -> usize {
        round_half_up(self.size as f64 * self.failure_pct / 100.0).min(self.size)
    }

    /// Whether size, MLSL and failure percentage are all grid levels.
    pub fn is_grid_conformant(&self) -> bool {
        GRID_SIZES.contains(&self.size)
            && GRID_MLSL.contains(&self.mlsl)
            && GRID_FAILURE_PCT.iter().any(|&p| f64::from(p) == self.failure_pct)
    }
}

fn round_half_up(x: f64) -> usize {
    // Absorbs representation error such as 2.4999999999999996 for 2.5.
    (x + 0.5 + 1e-9) as usize
}

/// Generation metadata stored next to the records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool_version: String,
    pub spec: DatasetSpec,
    /// Patterns failure sequences were drawn from.
    pub active_patterns: Vec<String>,
    /// Patterns normal sequences were checked against.
    pub checked_patterns: Vec<String>,
    pub pools: Vec<PoolMetadata>,
    pub failure_count: usize,
    pub normal_count: usize,
    /// Records whose sequence repeats an earlier record's sequence.
    pub duplicate_count: usize,
    pub grid_conformant: bool,
    /// Template ID of each interned symbol, by symbol index.
    pub symbols: Vec<String>,
    pub stats: DatasetStats,
    #[serde(default)]
    pub splits: Option<Splits>,
    /// Names of companion files, keyed by role.
    #[serde(default)]
    pub files: BTreeMap<String, String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub records: Vec<LabeledSequence>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn spec(&self) -> &DatasetSpec {
        &self.manifest.spec
    }

    pub fn symbols(&self) -> &[String] {
        &self.manifest.symbols
    }

    /// Computes the stratified splits from the master seed and records them
    /// in the manifest.
    pub fn assign_splits(&mut self) -> &Splits {
        let mut rng = rng::stream(self.manifest.spec.seed, rng::SPLIT_STREAM);
        let splits = split(&self.records, &mut rng);
        self.manifest.splits.insert(splits)
    }

    /// The training split, balanced by oversampling the minority label.
    pub fn oversampled_train(&self, splits: &Splits) -> Result<Vec<LabeledSequence>, AssembleError> {
        let train: Vec<LabeledSequence> = splits.train.iter().map(|&i| self.records[i].clone()).collect();
        let mut rng = rng::stream(self.manifest.spec.seed, rng::OVERSAMPLE_STREAM);
        oversample(&train, &mut rng)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AssembleError {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("model `{model}`: {source}")]
    Model { model: String, source: Box<ModelError> },
    #[error("model `{model}`: initial state `{state}` is accepting, so every walk is empty")]
    EmptyWalks { model: String, state: String },
    #[error("pattern `{pattern}` belongs to model `{pattern_model}`, not `{model}`")]
    ForeignPattern {
        pattern: String,
        pattern_model: String,
        model: String,
    },
    #[error(
        "pattern `{pattern}` is not contained in model `{model}`: it matches [{witness}], which the model rejects"
    )]
    NotContained {
        pattern: String,
        model: String,
        witness: String,
    },
    #[error("no {kind} failure patterns selected for model `{model}`")]
    NoActivePatterns { kind: PatternKind, model: String },
    #[error("{component}: {source}")]
    Generate { component: String, source: GenerateError },
    #[error("both labels are needed, but there are no {0} records")]
    DegenerateClass(Label),
}

/// A prepared assembly: validated inputs, sValues and the failure pool.
pub struct Assembly<'a> {
    model: &'a BehaviourModel,
    spec: DatasetSpec,
    svalues: SValueMap,
    active: Vec<&'a FailurePattern>,
    checked: Vec<&'a FailurePattern>,
    pool: Option<FailurePool>,
    failure_count: usize,
    walk: WalkConfig,
}

impl<'a> Assembly<'a> {
    /// Validates inputs and builds the failure pool.
    ///
    /// `patterns` are all failure patterns of the model; the active ones are
    /// those of the requested type that pass `pattern_filter`.
    pub fn prepare(
        model: &'a BehaviourModel,
        patterns: &'a [FailurePattern],
        spec: &DatasetSpec,
    ) -> Result<Self, AssembleError> {
        spec.validate()?;
        let model_err = |source| AssembleError::Model {
            model: spec.model.clone(),
            source: Box::new(source),
        };
        let svalues = model.compute_s_values().map_err(model_err)?;
        if model.is_accepting(model.initial()) {
            return Err(AssembleError::EmptyWalks {
                model: spec.model.clone(),
                state: model.state_name(model.initial()).to_string(),
            });
        }
        check_walkable(model, &svalues, spec.mlsl).map_err(|source| AssembleError::Generate {
            component: format!("model `{}`", spec.model),
            source,
        })?;

        for p in patterns {
            if p.model != spec.model {
                return Err(AssembleError::ForeignPattern {
                    pattern: p.id.clone(),
                    pattern_model: p.model.clone(),
                    model: spec.model.clone(),
                });
            }
            let report = check_inclusion(p.nfa(), model);
            if let Some(witness) = report.witness {
                return Err(AssembleError::NotContained {
                    pattern: p.id.clone(),
                    model: spec.model.clone(),
                    witness: model.decode_word(&witness).join(" "),
                });
            }
        }

        let active: Vec<&FailurePattern> = patterns
            .iter()
            .filter(|p| p.kind() == spec.pattern_type)
            .filter(|p| spec.pattern_filter.as_ref().map_or(true, |ids| ids.contains(&p.id)))
            .collect();
        let checked: Vec<&FailurePattern> = if spec.strict_normals {
            patterns.iter().collect()
        } else {
            active.clone()
        };

        let failure_count = spec.failure_count();
        let pool = if failure_count > 0 {
            if active.is_empty() {
                return Err(AssembleError::NoActivePatterns {
                    kind: spec.pattern_type,
                    model: spec.model.clone(),
                });
            }
            let mut pool_rng = rng::stream(spec.seed, rng::POOL_STREAM);
            let pool =
                build_failure_pool(&active, spec.mlsl, spec.samples_per_pattern, &mut pool_rng).map_err(|source| {
                    AssembleError::Generate {
                        component: "failure pool".to_string(),
                        source,
                    }
                })?;
            Some(pool)
        } else {
            None
        };

        Ok(Self {
            model,
            spec: spec.clone(),
            svalues,
            active,
            checked,
            pool,
            failure_count,
            walk: WalkConfig {
                mlsl: spec.mlsl,
                max_attempts: spec.max_attempts,
                allow_empty: false,
            },
        })
    }

    /// Number of records to generate.
    pub fn len(&self) -> usize {
        self.spec.size
    }

    pub fn is_empty(&self) -> bool {
        self.spec.size == 0
    }

    pub fn failure_count(&self) -> usize {
        self.failure_count
    }

    /// Generates the record at generation position `i`. Positions below
    /// [`failure_count`](Self::failure_count) are failures.
    pub fn record(&self, i: usize) -> Result<LabeledSequence, AssembleError> {
        let mut rng = rng::record_stream(self.spec.seed, i);
        if i < self.failure_count {
            let pool = self.pool.as_ref().expect("pool exists when failures are requested");
            let (word, id) = draw_failure_sequence(pool, &mut rng).map_err(|source| AssembleError::Generate {
                component: format!("failure record {i}"),
                source,
            })?;
            Ok(LabeledSequence {
                templates: word.to_vec(),
                label: Label::Failure,
                pattern_id: Some(id.to_string()),
                index: i,
                origin: None,
            })
        } else {
            let word = generate_normal_sequence(self.model, &self.svalues, &self.checked, &self.walk, &mut rng)
                .map_err(|source| AssembleError::Generate {
                    component: format!("normal record {i}"),
                    source,
                })?;
            Ok(LabeledSequence {
                templates: word,
                label: Label::Normal,
                pattern_id: None,
                index: i,
                origin: None,
            })
        }
    }

    /// Shuffles records generated in position order and builds the manifest.
    pub fn finish(self, mut records: Vec<LabeledSequence>) -> Dataset {
        assert_eq!(records.len(), self.spec.size, "one record per generation position");
        let mut shuffle = rng::stream(self.spec.seed, rng::SHUFFLE_STREAM);
        records.shuffle(&mut shuffle);
        for (i, r) in records.iter_mut().enumerate() {
            r.index = i;
        }

        let mut distinct = BTreeSet::new();
        let duplicate_count = records.iter().filter(|r| !distinct.insert(&r.templates)).count();
        let stats = compute_stats(&records);

        let mut warnings = Vec::new();
        if !self.spec.is_grid_conformant() {
            warnings.push("size, mlsl or failure percentage is outside the study grid".to_string());
        }
        let pools = self.pool.as_ref().map(FailurePool::metadata).unwrap_or_default();
        for p in pools.iter().filter(|p| p.words == 0) {
            warnings.push(format!(
                "pattern `{}` has no word of length 1..={}",
                p.pattern_id, self.spec.mlsl
            ));
        }

        let manifest = Manifest {
            tool_version: crate::TOOL_VERSION.to_string(),
            spec: self.spec.clone(),
            active_patterns: self.active.iter().map(|p| p.id.clone()).collect(),
            checked_patterns: self.checked.iter().map(|p| p.id.clone()).collect(),
            pools,
            failure_count: stats.failure_count,
            normal_count: records.len() - stats.failure_count,
            duplicate_count,
            grid_conformant: self.spec.is_grid_conformant(),
            symbols: self.model.symbol_names().to_vec(),
            stats,
            splits: None,
            files: BTreeMap::new(),
            warnings,
        };
        Dataset { records, manifest }
    }
}

/// Generates a complete dataset sequentially.
pub fn assemble(
    model: &BehaviourModel,
    patterns: &[FailurePattern],
    spec: &DatasetSpec,
) -> Result<Dataset, AssembleError> {
    let plan = Assembly::prepare(model, patterns, spec)?;
    let records = (0..plan.len()).map(|i| plan.record(i)).collect::<Result<Vec<_>, _>>()?;
    Ok(plan.finish(records))
}
