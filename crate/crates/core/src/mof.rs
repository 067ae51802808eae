//! Composite objective and Monte-Carlo threshold recalibration.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::significance::ssc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum MofMode {
    /// Pattern quality alone.
    #[default]
    #[serde(rename = "none", alias = "original")]
    Original,
    #[serde(rename = "add", alias = "additive")]
    Additive,
    #[serde(rename = "mul", alias = "multiplicative")]
    Multiplicative,
}

impl MofMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MofMode::Original => "none",
            MofMode::Additive => "add",
            MofMode::Multiplicative => "mul",
        }
    }
}

impl fmt::Display for MofMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MofMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "original" => Ok(MofMode::Original),
            "add" | "additive" => Ok(MofMode::Additive),
            "mul" | "multiplicative" => Ok(MofMode::Multiplicative),
            other => Err(Error::InvalidConfig(format!("unknown objective mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MofConfig {
    pub mode: MofMode,
    pub beta: [f64; 3],
    pub alpha: [f64; 3],
    /// Significance threshold used when sampling p-values.
    pub theta: f64,
    pub m_samples: usize,
    /// 1-based order statistic; `ceil(m / 20)` when unset.
    pub percentile_rank: Option<usize>,
    pub seed: u64,
}

impl Default for MofConfig {
    fn default() -> Self {
        MofConfig {
            mode: MofMode::Original,
            beta: [1.0; 3],
            alpha: [1.0 / 3.0; 3],
            theta: 0.05,
            m_samples: 100_000,
            percentile_rank: None,
            seed: 0,
        }
    }
}

impl MofConfig {
    pub fn with_mode(mode: MofMode) -> Self {
        MofConfig {
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidConfig("alpha exponents must be positive".into()));
        }
        if self.beta.iter().any(|&b| !(b >= 0.0)) {
            return Err(Error::InvalidConfig("beta weights must be non-negative".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidConfig(format!("theta {} not in (0, 1)", self.theta)));
        }
        if self.m_samples == 0 {
            return Err(Error::InvalidConfig("m_samples must be positive".into()));
        }
        let rank = self.rank();
        if rank == 0 || rank > self.m_samples {
            return Err(Error::InvalidConfig(format!(
                "percentile rank {rank} outside [1, {}]",
                self.m_samples
            )));
        }
        Ok(())
    }

    /// Nearest-rank index of the 5% order statistic.
    pub fn rank(&self) -> usize {
        self.percentile_rank.unwrap_or_else(|| self.m_samples.div_ceil(20))
    }
}

/// Combines quality, discrimination and significance; lower is better.
pub fn mof_score<T: Scalar>(pqc: T, dpc: T, ssc: T, cfg: &MofConfig) -> Result<T> {
    if !(pqc >= T::zero()) || !pqc.is_finite() {
        return Err(Error::InvalidScore(format!("pattern quality {pqc} must be finite and non-negative")));
    }
    if !dpc.is_finite() || !ssc.is_finite() {
        return Err(Error::InvalidScore("non-finite component".into()));
    }
    let [b1, b2, b3] = cfg.beta.map(T::of);
    let [a1, a2, a3] = cfg.alpha.map(T::of);
    Ok(match cfg.mode {
        MofMode::Original => pqc,
        MofMode::Additive => b1 * pqc.powf(a1) + b2 * (dpc * pqc).powf(a2) + b3 * (ssc * pqc).powf(a3),
        MofMode::Multiplicative => pqc.powf(a1) * dpc.powf(a2) * ssc.powf(a3),
    })
}

const CHUNK: usize = 4096;

/// `m` MOF values at fixed quality with uniform DPC and a two-sided p-value
/// mixture, sorted ascending.
///
/// Chunk `c` draws from stream `c` of a generator keyed by the seed, so the
/// output does not depend on the number of worker threads.
pub fn sample_mof_distribution<T: Scalar>(pqc_const: T, cfg: &MofConfig) -> Result<Vec<T>> {
    cfg.validate()?;
    let m = cfg.m_samples;
    let theta = cfg.theta;
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(m - c * CHUNK);
            (0..len)
                .map(|_| {
                    let dpc: f64 = rng.random();
                    let u: f64 = rng.random();
                    let p = if rng.random_bool(0.5) {
                        u * theta
                    } else {
                        theta + u * (1.0 - theta)
                    };
                    let s = ssc(T::of(p), T::of(theta));
                    mof_score(pqc_const, T::of(dpc), s, cfg)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(m);
    for part in parts {
        out.extend(part?);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// The 5%-lowest boundary of the sampled MOF distribution at `delta_user`.
pub fn recalibrate_threshold<T: Scalar>(delta_user: T, cfg: &MofConfig) -> Result<T> {
    if cfg.mode == MofMode::Original {
        return Err(Error::NoRecalibrationNeeded);
    }
    if !(delta_user > T::zero()) {
        return Err(Error::InvalidScore(format!("threshold {delta_user} must be positive")));
    }
    let sample = sample_mof_distribution(delta_user, cfg)?;
    Ok(sample[cfg.rank() - 1])
}
