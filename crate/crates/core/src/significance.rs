//! Null-model pattern probability, binomial tails and the significance component.
//!
//! Probabilities of long patterns underflow quickly, so everything below is
//! carried in log space and only exponentiated at the API boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::patterns::TriclusterPattern;
use crate::tensor::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceConfig {
    pub theta: f64,
    /// Number of planned patterns for a Bonferroni-adjusted threshold.
    pub bonferroni_n: Option<usize>,
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            theta: 0.05,
            bonferroni_n: None,
        }
    }
}

impl SignificanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidConfig(format!("theta {} not in (0, 1)", self.theta)));
        }
        if self.bonferroni_n == Some(0) {
            return Err(Error::InvalidConfig("bonferroni_n must be positive".into()));
        }
        Ok(())
    }

    /// Threshold after the optional Bonferroni adjustment.
    pub fn effective_theta(&self) -> f64 {
        match self.bonferroni_n {
            Some(n) => bonferroni(self.theta, n),
            None => self.theta,
        }
    }
}

/// Per-cell match probabilities of a pattern under independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullModel<T> {
    pub cell_probabilities: Vec<T>,
    pub ln_pattern_probability: T,
}

impl<T: Scalar> NullModel<T> {
    pub fn pattern_probability(&self) -> T {
        self.ln_pattern_probability.exp()
    }
}

/// Empirical per-cell frequencies, clamped to `[1/(n+1), n/(n+1)]`.
pub fn null_model<T: Scalar>(d: &Dataset<T>, phi: &TriclusterPattern<T>) -> NullModel<T> {
    let n = d.n();
    let lo = T::one() / T::of_usize(n + 1);
    let hi = T::of_usize(n) / T::of_usize(n + 1);
    let mut ln_p = T::zero();
    let cell_probabilities = phi
        .cells()
        .map(|(j, k, c)| {
            let hits = (0..n).filter(|&i| (d.get(i, j, k) - c).abs() <= phi.radius()).count();
            let p = (T::of_usize(hits) / T::of_usize(n)).max(lo).min(hi);
            ln_p = ln_p + p.ln();
            p
        })
        .collect();
    NullModel {
        cell_probabilities,
        ln_pattern_probability: ln_p,
    }
}

pub fn pattern_probability<T: Scalar>(d: &Dataset<T>, phi: &TriclusterPattern<T>) -> T {
    null_model(d, phi).pattern_probability()
}

/// `ln P(X >= support)` for `X ~ Bin(n, p)` with `p = exp(ln_p)`.
pub fn ln_binomial_tail<T: Scalar>(ln_p: T, n: usize, support: usize) -> Result<T> {
    if support > n {
        return Err(Error::InvalidSupport { support, n });
    }
    if support == 0 || ln_p >= T::zero() {
        return Ok(T::zero());
    }
    if ln_p == T::neg_infinity() {
        return Ok(T::neg_infinity());
    }
    let ln_q = (-ln_p.exp()).ln_1p();
    // ln C(n, support), built incrementally
    let mut ln_choose = T::zero();
    for x in 0..support {
        ln_choose = ln_choose + T::of_usize(n - x).ln() - T::of_usize(x + 1).ln();
    }
    let mut terms = Vec::with_capacity(n - support + 1);
    for x in support..=n {
        if x > support {
            ln_choose = ln_choose + T::of_usize(n - x + 1).ln() - T::of_usize(x).ln();
        }
        let tail = if x == n { T::zero() } else { T::of_usize(n - x) * ln_q };
        terms.push(ln_choose + T::of_usize(x) * ln_p + tail);
    }
    let peak = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if peak == T::neg_infinity() {
        return Ok(peak);
    }
    let sum: T = terms.iter().map(|&t| (t - peak).exp()).sum();
    Ok((peak + sum.ln()).min(T::zero()))
}

/// Upper binomial tail `sum_{x >= support} C(n,x) p^x (1-p)^(n-x)`.
pub fn binomial_tail<T: Scalar>(p_phi: T, n: usize, support: usize) -> Result<T> {
    if !(p_phi >= T::zero() && p_phi <= T::one()) {
        return Err(Error::InvalidScore(format!("probability {p_phi} outside [0, 1]")));
    }
    Ok(ln_binomial_tail(p_phi.ln(), n, support)?.exp())
}

pub fn bonferroni(theta: f64, n_patterns: usize) -> f64 {
    theta / n_patterns.max(1) as f64
}

/// Significance component from a log p-value: `1/|ln p|` below `theta`, else 1.
/// Capped at 1, which only matters for `theta > 1/e`.
pub fn ssc_from_ln<T: Scalar>(ln_p: T, theta: T) -> T {
    // p = 0 is clamped to the smallest positive normal value
    let ln_p = ln_p.max(T::min_positive_value().ln());
    if ln_p < theta.ln() {
        (T::one() / ln_p.abs()).min(T::one())
    } else {
        T::one()
    }
}

pub fn ssc<T: Scalar>(p_value: T, theta: T) -> T {
    ssc_from_ln(p_value.max(T::zero()).ln(), theta)
}
