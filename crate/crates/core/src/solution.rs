//! Mined triclusters with their scores and the run that produced them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{score_tricluster, ScoredTricluster};
use crate::mof::MofMode;
use crate::num::Scalar;
use crate::objective::ObjectiveConfig;
use crate::patterns::Tricluster;
use crate::quality::QualityMeasure;
use crate::tensor::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Trimax,
    Trigen,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Trimax => "trimax",
            Algorithm::Trigen => "trigen",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trimax" => Ok(Algorithm::Trimax),
            "trigen" => Ok(Algorithm::Trigen),
            other => Err(Error::InvalidConfig(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub algo: Algorithm,
    pub pqc: QualityMeasure,
    pub mof_mode: MofMode,
    pub seed: u64,
    /// Filled in by callers that hash their resolved configuration.
    #[serde(default)]
    pub config_hash: String,
    /// Objective threshold actually applied, after recalibration.
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl SolutionMeta {
    pub fn new(algo: Algorithm, objective: &ObjectiveConfig, seed: u64) -> Self {
        SolutionMeta {
            algo,
            pqc: objective.measure,
            mof_mode: objective.mode(),
            seed,
            config_hash: String::new(),
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct Solution<T> {
    pub meta: SolutionMeta,
    pub triclusters: Vec<ScoredTricluster<T>>,
}

impl<T: Scalar> Solution<T> {
    /// Scores every tricluster against `d` under `cfg`.
    pub fn assemble(d: &Dataset<T>, found: &[Tricluster], cfg: &ObjectiveConfig, meta: SolutionMeta) -> Result<Self> {
        let triclusters = found
            .par_iter()
            .map(|t| score_tricluster(d, t, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Solution { meta, triclusters })
    }

    pub fn len(&self) -> usize {
        self.triclusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triclusters.is_empty()
    }

    /// Index form of every tricluster, resolved against `d`.
    pub fn resolve(&self, d: &Dataset<T>) -> Result<Vec<Tricluster>> {
        self.triclusters.iter().map(|t| t.resolve(d)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
