//! Association-rule interestingness of a pattern against the class variable,
//! and the discriminative power component built from it.
//!
//! Rule measures take any field type with exact integer conversion, so the
//! same code runs over `f64` and over exact rationals in tests.

use std::collections::BTreeMap;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::patterns::{matching_observations, TriclusterPattern};
use crate::tensor::{ClassOutcome, Dataset};

/// Field arithmetic needed by the counting measures.
pub trait RuleScalar: Num + Copy + PartialOrd + FromPrimitive {}
impl<T: Num + Copy + PartialOrd + FromPrimitive> RuleScalar for T {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawDiscriminationConfig")]
pub struct DiscriminationConfig {
    pub desired_lift: f64,
    pub w_d1: f64,
    pub w_d2: f64,
}

#[derive(Deserialize)]
struct RawDiscriminationConfig {
    #[serde(default = "default_desired_lift")]
    desired_lift: f64,
    #[serde(default = "half")]
    w_d1: f64,
    #[serde(default = "half")]
    w_d2: f64,
}

fn default_desired_lift() -> f64 {
    1.2
}

fn half() -> f64 {
    0.5
}

impl From<RawDiscriminationConfig> for DiscriminationConfig {
    fn from(r: RawDiscriminationConfig) -> Self {
        DiscriminationConfig::normalized(r.desired_lift, r.w_d1, r.w_d2)
    }
}

impl Default for DiscriminationConfig {
    fn default() -> Self {
        DiscriminationConfig {
            desired_lift: 1.2,
            w_d1: 0.5,
            w_d2: 0.5,
        }
    }
}

impl DiscriminationConfig {
    /// Rescales the weights to sum to one (equal weights if both are zero).
    pub fn normalized(desired_lift: f64, w_d1: f64, w_d2: f64) -> Self {
        let total = w_d1 + w_d2;
        let (w_d1, w_d2) = if total > 0.0 {
            (w_d1 / total, w_d2 / total)
        } else {
            (0.5, 0.5)
        };
        DiscriminationConfig {
            desired_lift,
            w_d1,
            w_d2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.desired_lift > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "desired_lift {} must exceed 1",
                self.desired_lift
            )));
        }
        if self.w_d1 < 0.0 || self.w_d2 < 0.0 {
            return Err(Error::InvalidConfig("DPC weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// Contingency counts of a rule `pattern -> outcome`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleStats {
    pub pattern_count: usize,
    pub outcome_count: usize,
    pub rule_count: usize,
    pub n: usize,
    pub chosen_outcome: ClassOutcome,
}

impl RuleStats {
    pub fn new(pattern_count: usize, outcome_count: usize, rule_count: usize, n: usize, outcome: ClassOutcome) -> Result<Self> {
        if rule_count > pattern_count.min(outcome_count) || pattern_count.max(outcome_count) > n {
            return Err(Error::UndefinedRule(format!(
                "inconsistent counts rule={rule_count} pattern={pattern_count} outcome={outcome_count} n={n}"
            )));
        }
        Ok(RuleStats {
            pattern_count,
            outcome_count,
            rule_count,
            n,
            chosen_outcome: outcome,
        })
    }

    fn require_marginals(&self) -> Result<()> {
        if self.pattern_count == 0 || self.outcome_count == 0 {
            return Err(Error::UndefinedRule(format!(
                "zero marginal (pattern={}, outcome={})",
                self.pattern_count, self.outcome_count
            )));
        }
        Ok(())
    }
}

fn cast<T: RuleScalar>(x: usize) -> T {
    T::from_usize(x).expect("count representable")
}

pub fn confidence<T: RuleScalar>(r: &RuleStats) -> Result<T> {
    if r.pattern_count == 0 {
        return Err(Error::UndefinedRule("pattern never occurs".into()));
    }
    Ok(cast::<T>(r.rule_count) / cast::<T>(r.pattern_count))
}

/// `rule / (pattern * outcome) * n`, evaluated as one integer ratio.
pub fn lift<T: RuleScalar>(r: &RuleStats) -> Result<T> {
    r.require_marginals()?;
    Ok(cast::<T>(r.rule_count * r.n) / cast::<T>(r.pattern_count * r.outcome_count))
}

/// Lift rescaled between its marginal-constrained minimum and maximum.
///
/// With supports `a = pattern/n`, `c = outcome/n`, the bounds are
/// `max(a + c - 1, 1/n) / (a c)` and `1 / max(a, c)`; both are evaluated
/// over integer counts so the maximum is hit exactly.
pub fn standard_lift<T: RuleScalar>(r: &RuleStats) -> Result<T> {
    let value = lift::<T>(r)?;
    let (pc, oc, n) = (r.pattern_count, r.outcome_count, r.n);
    let overlap = (pc + oc).saturating_sub(n).max(1);
    let lower = cast::<T>(overlap * n) / cast::<T>(pc * oc);
    let upper = cast::<T>(n) / cast::<T>(pc.max(oc));
    if upper == lower {
        return Ok(T::one());
    }
    let s = (value - lower) / (upper - lower);
    Ok(if s < T::zero() {
        T::zero()
    } else if s > T::one() {
        T::one()
    } else {
        s
    })
}

pub fn normalized_lift<T: Scalar>(lift_value: T, desired: T) -> T {
    if lift_value > desired {
        desired / lift_value
    } else {
        T::one()
    }
}

/// Discriminative power of a pattern for its best outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrimination<T> {
    pub dpc: T,
    pub lift: T,
    pub standard_lift: T,
    pub normalized_lift: T,
    pub rule: RuleStats,
}

/// Picks the outcome maximizing lift among the matched rows; ties go to the
/// lexicographically smallest symbol. `None` if nothing matches.
pub fn best_rule(labels: &[ClassOutcome], matched: &[usize]) -> Option<RuleStats> {
    if matched.is_empty() {
        return None;
    }
    let mut outcome_counts: BTreeMap<&ClassOutcome, usize> = BTreeMap::new();
    for l in labels {
        *outcome_counts.entry(l).or_default() += 1;
    }
    let mut rule_counts: BTreeMap<&ClassOutcome, usize> = BTreeMap::new();
    for &i in matched {
        *rule_counts.entry(&labels[i]).or_default() += 1;
    }
    let mut best: Option<(&ClassOutcome, usize, usize)> = None;
    for (outcome, &oc) in &outcome_counts {
        let rc = rule_counts.get(outcome).copied().unwrap_or(0);
        // with a shared pattern count, lift order is the order of rc / oc
        let better = match best {
            None => true,
            Some((_, brc, boc)) => rc * boc > brc * oc,
        };
        if better {
            best = Some((outcome, rc, oc));
        }
    }
    best.map(|(outcome, rc, oc)| RuleStats {
        pattern_count: matched.len(),
        outcome_count: oc,
        rule_count: rc,
        n: labels.len(),
        chosen_outcome: outcome.clone(),
    })
}

/// `w1 * normalized_lift + w2 * (1 - standard_lift)` for a given rule.
pub fn dpc_of_rule<T: Scalar>(rule: RuleStats, cfg: &DiscriminationConfig) -> Result<Discrimination<T>> {
    let l = lift::<T>(&rule)?;
    let sl = standard_lift::<T>(&rule)?;
    let nl = normalized_lift(l, T::of(cfg.desired_lift));
    let dpc = T::of(cfg.w_d1) * nl + T::of(cfg.w_d2) * (T::one() - sl);
    Ok(Discrimination {
        dpc,
        lift: l,
        standard_lift: sl,
        normalized_lift: nl,
        rule,
    })
}

pub fn dpc<T: Scalar>(d: &Dataset<T>, phi: &TriclusterPattern<T>, cfg: &DiscriminationConfig) -> Result<Discrimination<T>> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    let matched = matching_observations(d, phi);
    let rule = best_rule(labels, &matched).ok_or_else(|| Error::UndefinedRule("pattern coverage is zero".into()))?;
    dpc_of_rule(rule, cfg)
}
