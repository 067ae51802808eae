//! Per-tricluster statistics, solution summaries, profile correlation and
//! Welch's t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::mof::{mof_score, MofConfig, MofMode};
use crate::num::Scalar;
use crate::objective::{Objective, ObjectiveConfig};
use crate::patterns::{Tricluster, TriclusterIds};
use crate::quality::{lsl, msl, msr};
use crate::solution::{Solution, SolutionMeta};
use crate::tensor::{ClassOutcome, Dataset};

/// A tricluster with every score the toolkit knows how to compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct ScoredTricluster<T> {
    #[serde(flatten)]
    pub ids: TriclusterIds,
    /// `pattern[j][k]` over the tricluster's variables and contexts.
    pub pattern: Vec<Vec<T>>,
    /// Value of the configured objective; absent when it needs labels the
    /// dataset lacks.
    pub objective: Option<T>,
    pub pqc_msr: T,
    pub pqc_lsl: Option<T>,
    pub pqc_msl: Option<T>,
    pub coverage: usize,
    pub p_value: T,
    pub ln_p_value: T,
    pub ssc: T,
    pub chosen_outcome: Option<ClassOutcome>,
    pub lift: Option<T>,
    pub standard_lift: Option<T>,
    pub dpc: Option<T>,
    pub mof_add: Option<T>,
    pub mof_mul: Option<T>,
    pub pearson: T,
    pub spearman: T,
    pub degenerate_profiles: usize,
}

impl<T: Scalar> ScoredTricluster<T> {
    pub fn shape(&self) -> [usize; 3] {
        [
            self.ids.observations.len(),
            self.ids.variables.len(),
            self.ids.contexts.len(),
        ]
    }

    pub fn resolve(&self, d: &Dataset<T>) -> Result<Tricluster> {
        Tricluster::from_ids(&self.ids, d)
    }

    /// Value of a summary metric by name, `None` when not computed.
    pub fn metric(&self, name: &str) -> Option<T> {
        match name {
            "objective" => self.objective,
            "msr" => Some(self.pqc_msr),
            "lsl" => self.pqc_lsl,
            "msl" => self.pqc_msl,
            "lift" => self.lift,
            "standard_lift" => self.standard_lift,
            "dpc" => self.dpc,
            "p_value" => Some(self.p_value),
            "ssc" => Some(self.ssc),
            "mof_add" => self.mof_add,
            "mof_mul" => self.mof_mul,
            "pearson" => Some(self.pearson),
            "spearman" => Some(self.spearman),
            "coverage" => Some(T::of_usize(self.coverage)),
            _ => None,
        }
    }
}

pub const METRICS: [&str; 14] = [
    "objective",
    "msr",
    "lsl",
    "msl",
    "lift",
    "standard_lift",
    "dpc",
    "p_value",
    "ssc",
    "mof_add",
    "mof_mul",
    "pearson",
    "spearman",
    "coverage",
];

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateProfile) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn score_tricluster<T: Scalar>(d: &Dataset<T>, t: &Tricluster, cfg: &ObjectiveConfig) -> Result<ScoredTricluster<T>> {
    t.validate(d)?;
    let labeled = d.labels().is_some();
    // without labels only the label-free parts are computed
    let plain = ObjectiveConfig {
        mof: MofConfig {
            mode: MofMode::Original,
            ..cfg.mof.clone()
        },
        ..cfg.clone()
    };
    let c = Objective::new(if labeled { cfg } else { &plain }).components(d, t)?;
    let objective = (labeled || cfg.mode() == MofMode::Original).then_some(c.score);
    let compose = |mode| {
        let m = MofConfig { mode, ..cfg.mof.clone() };
        mof_score(c.pqc, c.dpc, c.ssc, &m)
    };
    let (mof_add, mof_mul) = if labeled {
        (Some(compose(MofMode::Additive)?), Some(compose(MofMode::Multiplicative)?))
    } else {
        (None, None)
    };
    let disc = c.discrimination.as_ref();
    let nk = t.contexts().len();
    let pattern = c.pattern.expectations().chunks(nk).map(|row| row.to_vec()).collect();
    let pearson = profile_correlation_detail(d, t, Correlation::Pearson)?;
    let spearman = profile_correlation_detail(d, t, Correlation::Spearman)?;
    // a pattern nobody matches has no rule; report zero lift for it
    let zero_rule = labeled && disc.is_none();
    Ok(ScoredTricluster {
        ids: t.to_ids(d),
        pattern,
        objective,
        pqc_msr: msr(d, t)?,
        pqc_lsl: optional(lsl(d, t))?,
        pqc_msl: optional(msl(d, t))?,
        coverage: c.coverage,
        p_value: c.ln_p_value.exp(),
        ln_p_value: c.ln_p_value,
        ssc: c.ssc,
        chosen_outcome: disc.map(|x| x.rule.chosen_outcome.clone()),
        lift: disc.map(|x| x.lift).or(zero_rule.then(T::zero)),
        standard_lift: disc.map(|x| x.standard_lift).or(zero_rule.then(T::zero)),
        dpc: disc.map(|x| x.dpc).or(zero_rule.then(T::one)),
        mof_add,
        mof_mul,
        pearson: pearson.value,
        spearman: spearman.value,
        degenerate_profiles: pearson.degenerate_profiles.max(spearman.degenerate_profiles),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCorrelation<T> {
    pub value: T,
    /// Profiles with zero variance; they correlate 0 with every partner.
    pub degenerate_profiles: usize,
}

/// Ranks starting at 1; tied values share their average rank.
pub fn average_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut lo = 0;
    while lo < order.len() {
        let mut hi = lo + 1;
        while hi < order.len() && xs[order[hi]] == xs[order[lo]] {
            hi += 1;
        }
        // positions lo..hi hold ranks lo+1..=hi
        let r = T::of((lo + hi + 1) as f64 / 2.0);
        for &o in &order[lo..hi] {
            ranks[o] = r;
        }
        lo = hi;
    }
    ranks
}

/// Centers and scales to unit norm; `None` for a flat profile.
fn standardize<T: Scalar>(mut xs: Vec<T>) -> Option<Vec<T>> {
    if xs.iter().all(|&x| x == xs[0]) {
        return None;
    }
    let mean = crate::num::mean(&xs);
    xs.iter_mut().for_each(|x| *x = *x - mean);
    let norm = xs.iter().map(|&x| x * x).sum::<T>().sqrt();
    if !(norm > T::zero()) {
        return None;
    }
    xs.iter_mut().for_each(|x| *x = *x / norm);
    Some(xs)
}

pub fn profile_correlation_detail<T: Scalar>(d: &Dataset<T>, t: &Tricluster, method: Correlation) -> Result<ProfileCorrelation<T>> {
    let rows = t.observations();
    if rows.len() < 2 {
        return Err(Error::NotEnoughProfiles(rows.len()));
    }
    let profiles: Vec<Option<Vec<T>>> = rows
        .iter()
        .map(|&i| {
            let mut p = Vec::with_capacity(t.variables().len() * t.contexts().len());
            for &j in t.variables() {
                for &k in t.contexts() {
                    p.push(d.get(i, j, k));
                }
            }
            if p.len() < 2 {
                return None;
            }
            match method {
                Correlation::Pearson => standardize(p),
                Correlation::Spearman => standardize(average_ranks(&p)),
            }
        })
        .collect();
    let mut sum = T::zero();
    let mut pairs = 0usize;
    for a in 0..profiles.len() {
        for b in a + 1..profiles.len() {
            pairs += 1;
            if let (Some(x), Some(y)) = (&profiles[a], &profiles[b]) {
                let r: T = x.iter().zip(y).map(|(&u, &v)| u * v).sum();
                sum = sum + r.max(-T::one()).min(T::one());
            }
        }
    }
    Ok(ProfileCorrelation {
        value: sum / T::of_usize(pairs),
        degenerate_profiles: profiles.iter().filter(|p| p.is_none()).count(),
    })
}

/// Mean pairwise correlation of the observation profiles (values over `J x K`).
pub fn profile_correlation<T: Scalar>(d: &Dataset<T>, t: &Tricluster, method: Correlation) -> Result<T> {
    Ok(profile_correlation_detail(d, t, method)?.value)
}

/// Welch's unequal-variance t-test. Returns `(t, two-sided p)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "sample sizes {} and {} (need at least 2)",
            a.len(),
            b.len()
        )));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return if ma == mb {
            Ok((0.0, 1.0))
        } else {
            Err(Error::DegenerateSample("both samples have zero variance".into()))
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() - 1) as f64 + sb * sb / (b.len() - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateSample(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok((t, p))
}

/// Mean and sample variance (`n - 1` denominator; 0 for a single value).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub meta: SolutionMeta,
    pub triclusters: usize,
    pub mean_dims: [f64; 3],
    pub metrics: Vec<MetricSummary>,
}

impl SolutionSummary {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Mean dimensions rounded for display, e.g. `12x4x19`.
    pub fn dims_label(&self) -> String {
        let [a, b, c] = self.mean_dims.map(|x| x.round() as usize);
        format!("{a}x{b}x{c}")
    }
}

/// Values of one metric across a solution, skipping triclusters without it.
pub fn metric_values<T: Scalar>(s: &Solution<T>, name: &str) -> Vec<f64> {
    s.triclusters.iter().filter_map(|t| t.metric(name)).map(|v| v.as_f64()).collect()
}

pub fn summarize_solution<T: Scalar>(s: &Solution<T>) -> Result<SolutionSummary> {
    if s.triclusters.is_empty() {
        return Err(Error::EmptySolution);
    }
    let count = s.triclusters.len() as f64;
    let mut mean_dims = [0.0; 3];
    for t in &s.triclusters {
        for (acc, d) in mean_dims.iter_mut().zip(t.shape()) {
            *acc += d as f64 / count;
        }
    }
    let metrics = METRICS
        .iter()
        .filter_map(|&name| {
            let xs = metric_values(s, name);
            if xs.is_empty() {
                return None;
            }
            let (mean, var) = mean_var(&xs);
            Some(MetricSummary {
                name: name.to_string(),
                mean,
                std: var.sqrt(),
                count: xs.len(),
            })
        })
        .collect();
    Ok(SolutionSummary {
        meta: s.meta.clone(),
        triclusters: s.triclusters.len(),
        mean_dims,
        metrics,
    })
}

/// Jaccard index of the cell sets of two triclusters.
pub fn cell_jaccard(a: &Tricluster, b: &Tricluster) -> f64 {
    let overlap = |x: &[usize], y: &[usize]| x.iter().filter(|i| y.binary_search(i).is_ok()).count();
    let inter: usize = (0..3).map(|ax| overlap(a.axis(ax), b.axis(ax))).product();
    let union = a.volume() + b.volume() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_profiles_correlate_fully() {
        let d = Dataset::from_fn([3, 2, 3], |_, j, k| (j * 3 + k) as f64 * 0.1);
        let t = Tricluster::full(d.dims()).unwrap();
        assert_abs_diff_eq!(profile_correlation(&d, &t, Correlation::Pearson).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(profile_correlation(&d, &t, Correlation::Spearman).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn negated_profile_anticorrelates() {
        let base = [0.3, -0.1, -0.5, 0.3];
        let d = Dataset::from_fn([2, 1, 4], |i, _, k| if i == 0 { base[k] } else { -base[k] });
        let t = Tricluster::full(d.dims()).unwrap();
        assert_abs_diff_eq!(profile_correlation(&d, &t, Correlation::Pearson).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_profiles_counted() {
        let d = Dataset::from_fn([3, 1, 3], |i, _, k| if i == 0 { 0.5 } else { k as f64 });
        let t = Tricluster::full(d.dims()).unwrap();
        let r = profile_correlation_detail(&d, &t, Correlation::Pearson).unwrap();
        assert_eq!(r.degenerate_profiles, 1);
        // one perfect pair, two zero pairs
        assert_abs_diff_eq!(r.value, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_profile_rejected() {
        let d = Dataset::from_fn([1, 2, 2], |_, _, _| 0.0);
        let t = Tricluster::full(d.dims()).unwrap();
        assert!(matches!(
            profile_correlation(&d, &t, Correlation::Pearson),
            Err(Error::NotEnoughProfiles(1))
        ));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn welch_identical_and_symmetric() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(welch_t_test(&a, &a).unwrap(), (0.0, 1.0));
        let b = [2.0, 2.5, 3.5, 5.0, 7.0, 1.0];
        let (t1, p1) = welch_t_test(&a, &b).unwrap();
        let (t2, p2) = welch_t_test(&b, &a).unwrap();
        assert_eq!(t1, -t2);
        assert_abs_diff_eq!(p1, p2, epsilon = 1e-15);
    }

    #[test]
    fn welch_degenerate_cases() {
        assert_eq!(welch_t_test(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap(), (0.0, 1.0));
        assert!(matches!(welch_t_test(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::DegenerateSample(_))));
        assert!(matches!(welch_t_test(&[1.0], &[2.0, 3.0]), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn jaccard_of_cells() {
        let a = Tricluster::new(vec![0, 1], vec![0, 1], vec![0]).unwrap();
        let b = Tricluster::new(vec![1, 2], vec![0, 1], vec![0]).unwrap();
        assert_abs_diff_eq!(cell_jaccard(&a, &b), 2.0 / 6.0);
        assert_eq!(cell_jaccard(&a, &a), 1.0);
    }
}
