//! Synthesis of labelled log datasets for failure-prediction research.
//!
//! Normal log sequences come from bounded random walks over a deterministic
//! behaviour model whose alphabet is log template IDs. Failure sequences are
//! drawn from the languages of failure patterns, regular expressions over the
//! same alphabet. The dataset layer controls size, maximum sequence length,
//! failure percentage and pattern type exactly, and handles splitting,
//! oversampling and statistics.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! assembly and the command-line tool live in the `logsynth` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod advisor;
pub mod automaton;
pub mod dataset;
pub mod generator;
pub mod pattern;
pub mod rng;

pub use automaton::{
    BehaviourModel, ModelDocument, ModelError, SValue, SValueMap, StateId, SymbolId, TemplateCatalog,
    TransitionDocument,
};
pub use dataset::{Dataset, DatasetSpec, DatasetStats, Label, LabeledSequence, Splits};
pub use generator::{FailurePool, GenerateError, WalkConfig};
pub use pattern::{FailurePattern, PatternError, PatternKind, PatternMetrics, RegexNode};

/// Version string recorded in dataset manifests.
pub const TOOL_VERSION: &str = concat!("logsynth ", env!("CARGO_PKG_VERSION"));
