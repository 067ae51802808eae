//! Scoring a candidate tricluster under a pattern-quality measure and an
//! objective mode. Shared by both searches and by solution evaluation.

use serde::{Deserialize, Serialize};

use crate::discrimination::{best_rule, dpc_of_rule, Discrimination, DiscriminationConfig};
use crate::error::{Error, Result};
use crate::mof::{mof_score, recalibrate_threshold, MofConfig, MofMode};
use crate::num::Scalar;
use crate::patterns::{matching_observations, pattern_of, Tricluster, TriclusterPattern};
use crate::quality::{evaluate_pqc, QualityMeasure};
use crate::significance::{ln_binomial_tail, null_model, ssc_from_ln, SignificanceConfig};
use crate::tensor::Dataset;

pub const DEFAULT_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveConfig {
    pub measure: QualityMeasure,
    pub mof: MofConfig,
    pub discrimination: DiscriminationConfig,
    pub significance: SignificanceConfig,
    /// Half-width of the band an observation must fall in to contain a pattern.
    pub radius: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            measure: QualityMeasure::Msr,
            mof: MofConfig::default(),
            discrimination: DiscriminationConfig::default(),
            significance: SignificanceConfig::default(),
            radius: DEFAULT_RADIUS,
        }
    }
}

impl ObjectiveConfig {
    pub fn new(measure: QualityMeasure, mode: MofMode) -> Self {
        ObjectiveConfig {
            measure,
            mof: MofConfig::with_mode(mode),
            ..Default::default()
        }
    }

    pub fn mode(&self) -> MofMode {
        self.mof.mode
    }

    pub fn validate(&self) -> Result<()> {
        self.mof.validate()?;
        self.discrimination.validate()?;
        self.significance.validate()?;
        if !(self.radius >= 0.0) {
            return Err(Error::InvalidConfig("radius must be non-negative".into()));
        }
        Ok(())
    }

    /// MOF config with the sampling threshold tied to the significance one.
    fn mof_config(&self) -> MofConfig {
        MofConfig {
            theta: self.significance.effective_theta(),
            ..self.mof.clone()
        }
    }

    /// Threshold on the objective scale: `delta` itself for the original
    /// objective, the recalibrated 5% boundary otherwise.
    pub fn threshold<T: Scalar>(&self, delta: T) -> Result<T> {
        match self.mode() {
            MofMode::Original => Ok(delta),
            _ => recalibrate_threshold(delta, &self.mof_config()),
        }
    }
}

/// Everything the objective knows about one candidate.
#[derive(Debug, Clone)]
pub struct Components<T> {
    pub pqc: T,
    /// 1 when the pattern is not contained by any observation.
    pub dpc: T,
    pub ssc: T,
    pub ln_p_value: T,
    pub coverage: usize,
    pub discrimination: Option<Discrimination<T>>,
    pub pattern: TriclusterPattern<T>,
    pub score: T,
}

pub struct Objective<'a> {
    cfg: &'a ObjectiveConfig,
    mof: MofConfig,
}

impl<'a> Objective<'a> {
    pub fn new(cfg: &'a ObjectiveConfig) -> Self {
        Objective {
            mof: cfg.mof_config(),
            cfg,
        }
    }

    pub fn config(&self) -> &ObjectiveConfig {
        self.cfg
    }

    pub fn mode(&self) -> MofMode {
        self.cfg.mode()
    }

    /// Fails early when a labeled objective runs on unlabeled data.
    pub fn check_dataset<T: Scalar>(&self, d: &Dataset<T>) -> Result<()> {
        if self.mode() != MofMode::Original && d.labels().is_none() {
            return Err(Error::MissingLabels);
        }
        Ok(())
    }

    pub fn pqc<T: Scalar>(&self, d: &Dataset<T>, t: &Tricluster) -> Result<T> {
        evaluate_pqc(self.cfg.measure, d, t)
    }

    /// Combines a quality value with previously computed DPC and SSC.
    pub fn compose<T: Scalar>(&self, pqc: T, dpc: T, ssc: T) -> Result<T> {
        mof_score(pqc, dpc, ssc, &self.mof)
    }

    /// Objective value only; skips discrimination and significance for the
    /// original objective.
    pub fn score<T: Scalar>(&self, d: &Dataset<T>, t: &Tricluster) -> Result<T> {
        match self.mode() {
            MofMode::Original => self.pqc(d, t),
            _ => Ok(self.components(d, t)?.score),
        }
    }

    pub fn components<T: Scalar>(&self, d: &Dataset<T>, t: &Tricluster) -> Result<Components<T>> {
        let pqc = self.pqc(d, t)?;
        self.components_with_pqc(d, t, pqc)
    }

    pub fn components_with_pqc<T: Scalar>(&self, d: &Dataset<T>, t: &Tricluster, pqc: T) -> Result<Components<T>> {
        let pattern = pattern_of(d, t, T::of(self.cfg.radius));
        let matched = matching_observations(d, &pattern);
        let coverage = matched.len();
        let null = null_model(d, &pattern);
        let ln_p_value = ln_binomial_tail(null.ln_pattern_probability, d.n(), coverage)?;
        let theta = T::of(self.mof.theta);
        let ssc = ssc_from_ln(ln_p_value, theta);
        let discrimination = match d.labels() {
            Some(labels) => best_rule(labels, &matched)
                .map(|rule| dpc_of_rule(rule, &self.cfg.discrimination))
                .transpose()?,
            None if self.mode() == MofMode::Original => None,
            None => return Err(Error::MissingLabels),
        };
        let dpc = discrimination.as_ref().map_or(T::one(), |x| x.dpc);
        let score = self.compose(pqc, dpc, ssc)?;
        Ok(Components {
            pqc,
            dpc,
            ssc,
            ln_p_value,
            coverage,
            discrimination,
            pattern,
            score,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled() -> Dataset<f64> {
        // rows 0..4 share a flat 0.8 block on every cell; others are spread out
        Dataset::from_fn([10, 2, 3], |i, j, k| {
            if i < 4 {
                0.8
            } else {
                ((i * 7 + j * 3 + k * 5) % 10) as f64 / 20.0
            }
        })
        .with_labels(vec!["a", "a", "a", "a", "b", "b", "b", "c", "c", "c"])
        .unwrap()
    }

    #[test]
    fn original_mode_is_plain_quality() {
        let d = labeled();
        let cfg = ObjectiveConfig::new(QualityMeasure::Msr, MofMode::Original);
        let obj = Objective::new(&cfg);
        let t = Tricluster::new(vec![0, 1, 2, 3], vec![0, 1], vec![0, 1, 2]).unwrap();
        assert_eq!(obj.score(&d, &t).unwrap(), 0.0);
        assert_eq!(cfg.threshold(0.01).unwrap(), 0.01);
    }

    #[test]
    fn components_of_perfect_rule() {
        let d = labeled();
        let cfg = ObjectiveConfig::new(QualityMeasure::Msr, MofMode::Additive);
        let obj = Objective::new(&cfg);
        let t = Tricluster::new(vec![0, 1, 2, 3], vec![0, 1], vec![0, 1, 2]).unwrap();
        let c = obj.components(&d, &t).unwrap();
        assert_eq!(c.coverage, 4);
        let disc = c.discrimination.unwrap();
        assert_eq!(disc.rule.chosen_outcome.as_str(), "a");
        assert_eq!(disc.standard_lift, 1.0);
        assert!(c.ssc < 1.0);
    }

    #[test]
    fn unlabeled_data_rejected_for_composite_modes() {
        let d = labeled().without_labels();
        let cfg = ObjectiveConfig::new(QualityMeasure::Msr, MofMode::Multiplicative);
        let obj = Objective::new(&cfg);
        assert!(matches!(obj.check_dataset(&d), Err(Error::MissingLabels)));
        let t = Tricluster::full(d.dims()).unwrap();
        assert!(matches!(obj.components(&d, &t), Err(Error::MissingLabels)));
    }

    #[test]
    fn uncovered_pattern_has_neutral_components() {
        let d = Dataset::from_fn([6, 2, 2], |i, j, k| ((i * 5 + j * 3 + k * 2) % 7) as f64 / 7.0)
            .with_labels(vec!["x", "y", "x", "y", "x", "y"])
            .unwrap();
        let cfg = ObjectiveConfig {
            radius: 0.0,
            ..ObjectiveConfig::new(QualityMeasure::Msr, MofMode::Additive)
        };
        let obj = Objective::new(&cfg);
        let t = Tricluster::new(vec![0, 1], vec![0, 1], vec![0, 1]).unwrap();
        let c = obj.components(&d, &t).unwrap();
        assert_eq!(c.coverage, 0);
        assert_eq!((c.dpc, c.ssc, c.ln_p_value), (1.0, 1.0, 0.0));
    }
}
