//! Model-selection and training-hyperparameter guidance for failure
//! predictors, as fixed lookup rules over dataset characteristics.
//!
//! Thresholds compare with `<=`: a value exactly on a threshold takes the
//! lower branch.

use core::fmt;

use serde::{Deserialize, Serialize};

/// The three predictor configurations (encoder + embedding strategy).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelConfig {
    #[serde(rename = "CNN+L")]
    CnnL,
    #[serde(rename = "CNN+B")]
    CnnB,
    #[serde(rename = "BiLSTM+B")]
    BiLstmB,
}

impl ModelConfig {
    pub const ALL: [ModelConfig; 3] = [ModelConfig::CnnL, ModelConfig::CnnB, ModelConfig::BiLstmB];

    pub fn name(self) -> &'static str {
        match self {
            ModelConfig::CnnL => "CNN+L",
            ModelConfig::CnnB => "CNN+B",
            ModelConfig::BiLstmB => "BiLSTM+B",
        }
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperParams {
    pub batch_size: u32,
    pub epochs: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AdvisorError {
    #[error("dataset size must be at least 1")]
    InvalidSize,
    #[error("failure percentage must be in (0, 100]")]
    InvalidFailurePct,
    #[error("BiLSTM+B estimates need the maximum log-sequence length")]
    MissingMlsl,
}

/// Dataset sizes with tabulated hyperparameters.
pub const SIZE_LEVELS: [usize; 6] = [200, 500, 1_000, 5_000, 10_000, 50_000];
const BATCH_DEFAULT: [u32; 6] = [10, 15, 20, 30, 150, 300];
const BATCH_LOW_FAILURE: [u32; 6] = [10, 15, 30, 60, 300, 600];
const BATCH_LONG_SEQUENCES: u32 = 5;
const EPOCHS_LONG_SEQUENCES: [u32; 6] = [20, 20, 10, 10, 5, 5];
const EPOCHS_DEFAULT: u32 = 20;

fn check(size: usize, failure_pct: f64) -> Result<(), AdvisorError> {
    if size == 0 {
        return Err(AdvisorError::InvalidSize);
    }
    if !(failure_pct > 0.0 && failure_pct <= 100.0) {
        return Err(AdvisorError::InvalidFailurePct);
    }
    Ok(())
}

/// Best configuration for a dataset.
pub fn recommend_configuration(size: usize, failure_pct: f64) -> Result<ModelConfig, AdvisorError> {
    check(size, failure_pct)?;
    Ok(if size > 3000 {
        ModelConfig::CnnL
    } else if failure_pct <= 15.0 {
        ModelConfig::BiLstmB
    } else if size <= 350 {
        ModelConfig::CnnB
    } else {
        ModelConfig::CnnL
    })
}

/// Expected average F1 of `config` on such a dataset.
pub fn expected_f1(
    config: ModelConfig,
    size: usize,
    failure_pct: f64,
    mlsl: Option<usize>,
) -> Result<f64, AdvisorError> {
    check(size, failure_pct)?;
    let small = size <= 350;
    Ok(match config {
        ModelConfig::CnnL => match (small, failure_pct <= 7.5) {
            (true, true) => 0.516,
            (true, false) => 0.906,
            (false, _) => 0.985,
        },
        ModelConfig::CnnB => match (small, failure_pct <= 7.5) {
            (true, true) => 0.35,
            (true, false) => 0.816,
            (false, _) => 0.977,
        },
        ModelConfig::BiLstmB => {
            let mlsl = mlsl.ok_or(AdvisorError::MissingMlsl)?;
            if mlsl > 750 {
                0.664
            } else if !small {
                0.945
            } else if failure_pct <= 15.0 {
                0.355
            } else {
                0.945
            }
        }
    })
}

/// Nearest tabulated size level; ties go to the smaller level.
pub fn size_level(size: usize) -> usize {
    let mut best = 0;
    for (i, &level) in SIZE_LEVELS.iter().enumerate() {
        if level.abs_diff(size) < SIZE_LEVELS[best].abs_diff(size) {
            best = i;
        }
    }
    best
}

/// Training batch size and epochs for a dataset.
pub fn hyperparameters(size: usize, failure_pct: f64, mlsl: usize) -> Result<HyperParams, AdvisorError> {
    check(size, failure_pct)?;
    let level = size_level(size);
    Ok(if mlsl >= 500 {
        HyperParams {
            batch_size: BATCH_LONG_SEQUENCES,
            epochs: EPOCHS_LONG_SEQUENCES[level],
        }
    } else if failure_pct <= 30.0 {
        HyperParams {
            batch_size: BATCH_LOW_FAILURE[level],
            epochs: EPOCHS_DEFAULT,
        }
    } else {
        HyperParams {
            batch_size: BATCH_DEFAULT[level],
            epochs: EPOCHS_DEFAULT,
        }
    })
}

/// Whether the inputs lie outside the studied ranges (size 200..=50 000,
/// failure percentage 5..=50, MLSL 20..=1000).
pub fn is_extrapolated(size: usize, failure_pct: f64, mlsl: usize) -> bool {
    !(200..=50_000).contains(&size) || !(5.0..=50.0).contains(&failure_pct) || !(20..=1_000).contains(&mlsl)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advice {
    pub config: ModelConfig,
    pub expected_f1: f64,
    pub batch_size: u32,
    pub epochs: u32,
    #[serde(skip)]
    pub extrapolated: bool,
}

/// Configuration, its expected F1 and its hyperparameters in one call.
pub fn advise(size: usize, failure_pct: f64, mlsl: usize) -> Result<Advice, AdvisorError> {
    let config = recommend_configuration(size, failure_pct)?;
    let hp = hyperparameters(size, failure_pct, mlsl)?;
    Ok(Advice {
        config,
        expected_f1: expected_f1(config, size, failure_pct, Some(mlsl))?,
        batch_size: hp.batch_size,
        epochs: hp.epochs,
        extrapolated: is_extrapolated(size, failure_pct, mlsl),
    })
}
