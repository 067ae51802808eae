//! Run configuration: one JSON document covering every stage.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tricluster::synthetic::PlantSpec;
use tricluster::tensor::CsvLayout;
use tricluster::{Algorithm, MofConfig, ObjectiveConfig, TrigenConfig, TrimaxConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub tensor: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub layout: CsvLayout,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Min-max scale every variable to `[0, 1]`.
    pub scale: bool,
    /// Reduce contexts to this many windows.
    pub paa: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecalibrateConfig {
    pub delta: f64,
    pub mof: MofConfig,
}

impl Default for RecalibrateConfig {
    fn default() -> Self {
        RecalibrateConfig {
            delta: 0.01,
            mof: MofConfig::with_mode(tricluster::MofMode::Multiplicative),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data: DataConfig,
    pub preprocess: PreprocessConfig,
    pub algo: Algorithm,
    pub trimax: TrimaxConfig,
    pub trigen: TrigenConfig,
    pub synth: PlantSpec,
    pub recalibrate: RecalibrateConfig,
    /// Output directory; not part of the configuration hash.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: DataConfig::default(),
            preprocess: PreprocessConfig::default(),
            algo: Algorithm::Trimax,
            trimax: TrimaxConfig::default(),
            trigen: TrigenConfig::default(),
            synth: PlantSpec::default(),
            recalibrate: RecalibrateConfig::default(),
            out: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file; a `manifest.json` from an earlier run also works.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let inner = match value.get("config") {
            Some(c) if value.get("config_hash").is_some() => c.clone(),
            _ => value,
        };
        Ok(serde_json::from_value(inner)?)
    }

    pub fn objective(&self) -> &ObjectiveConfig {
        match self.algo {
            Algorithm::Trimax => &self.trimax.objective,
            Algorithm::Trigen => &self.trigen.objective,
        }
    }

    pub fn objective_mut(&mut self) -> &mut ObjectiveConfig {
        match self.algo {
            Algorithm::Trimax => &mut self.trimax.objective,
            Algorithm::Trigen => &mut self.trigen.objective,
        }
    }

    pub fn seed_mut(&mut self) -> &mut u64 {
        match self.algo {
            Algorithm::Trimax => &mut self.trimax.seed,
            Algorithm::Trigen => &mut self.trigen.seed,
        }
    }

    pub fn seed(&self) -> u64 {
        match self.algo {
            Algorithm::Trimax => self.trimax.seed,
            Algorithm::Trigen => self.trigen.seed,
        }
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            out: None,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            command: command.to_string(),
            config_hash: config.hash(),
            config: config.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(dir.join("manifest.json"), s)?;
        Ok(())
    }
}
