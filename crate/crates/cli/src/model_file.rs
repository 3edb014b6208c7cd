//! Versioned JSON model files.

use anyhow::{bail, Context, Result};
use funcboost::{Algorithm, BasisSystem, BoostedModel, LearnerSpec, ResampleMode};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

/// How raw curves were turned into basis coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub basis: BasisSystem<f64>,
    pub lambda: f64,
    pub penalty_order: usize,
}

/// Settings and sample size of the training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Training {
    pub algorithm: Algorithm,
    pub learner: LearnerSpec<f64>,
    pub iterations: usize,
    pub shrinkage: f64,
    pub mode: ResampleMode,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub expansion: Expansion,
    pub training: Training,
    pub model: BoostedModel<f64>,
}

impl ModelFile {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).context("model file is not valid JSON")?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(v) => {
                bail!("unsupported model file version {v} (this build reads {FORMAT_VERSION})")
            }
            None => bail!("model file has no version field"),
        }
        let file: ModelFile = serde_json::from_value(value).context("malformed model file")?;
        file.model.validate().context("inconsistent model")?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("{}", path.display()))
    }
}
