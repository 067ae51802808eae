//! Tricluster subspaces, their patterns, and coverage counts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::tensor::{ClassOutcome, Dataset};

/// Index subsets `(I, J, K)` into a dataset. Each subset is sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tricluster {
    axes: [Vec<usize>; 3],
}

impl Tricluster {
    pub fn new(observations: Vec<usize>, variables: Vec<usize>, contexts: Vec<usize>) -> Result<Self> {
        let mut axes = [observations, variables, contexts];
        for axis in axes.iter_mut() {
            axis.sort_unstable();
            axis.dedup();
            if axis.is_empty() {
                return Err(Error::EmptyTricluster);
            }
        }
        Ok(Tricluster { axes })
    }

    /// Whole-tensor tricluster.
    pub fn full(dims: [usize; 3]) -> Result<Self> {
        Self::new((0..dims[0]).collect(), (0..dims[1]).collect(), (0..dims[2]).collect())
    }

    #[inline]
    pub fn observations(&self) -> &[usize] {
        &self.axes[0]
    }

    #[inline]
    pub fn variables(&self) -> &[usize] {
        &self.axes[1]
    }

    #[inline]
    pub fn contexts(&self) -> &[usize] {
        &self.axes[2]
    }

    #[inline]
    pub fn axis(&self, axis: usize) -> &[usize] {
        &self.axes[axis]
    }

    pub(crate) fn axes_mut(&mut self) -> &mut [Vec<usize>; 3] {
        &mut self.axes
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    pub fn volume(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn contains_cell(&self, i: usize, j: usize, k: usize) -> bool {
        self.axes[0].binary_search(&i).is_ok()
            && self.axes[1].binary_search(&j).is_ok()
            && self.axes[2].binary_search(&k).is_ok()
    }

    /// Copy with `index` removed from `axis` (no-op if absent).
    pub fn without(&self, axis: usize, index: usize) -> Self {
        let mut t = self.clone();
        if let Ok(pos) = t.axes[axis].binary_search(&index) {
            t.axes[axis].remove(pos);
        }
        t
    }

    /// Copy with `index` inserted into `axis` (no-op if present).
    pub fn with(&self, axis: usize, index: usize) -> Self {
        let mut t = self.clone();
        if let Err(pos) = t.axes[axis].binary_search(&index) {
            t.axes[axis].insert(pos, index);
        }
        t
    }

    pub fn validate<T: Scalar>(&self, d: &Dataset<T>) -> Result<()> {
        let dims = d.dims();
        for (axis, idx) in self.axes.iter().enumerate() {
            if idx.is_empty() {
                return Err(Error::EmptyTricluster);
            }
            if let Some(&last) = idx.last() {
                if last >= dims[axis] {
                    return Err(Error::InvalidTricluster(format!(
                        "index {last} out of bounds for axis {axis} of length {}",
                        dims[axis]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_ids<T: Scalar>(&self, d: &Dataset<T>) -> TriclusterIds {
        let ids = |axis: usize| self.axes[axis].iter().map(|&x| d.axis_ids(axis)[x].clone()).collect();
        TriclusterIds {
            observations: ids(0),
            variables: ids(1),
            contexts: ids(2),
        }
    }

    pub fn from_ids<T: Scalar>(ids: &TriclusterIds, d: &Dataset<T>) -> Result<Self> {
        let resolve = |axis: usize, names: &[String]| -> Result<Vec<usize>> {
            let lookup: HashMap<&str, usize> = d
                .axis_ids(axis)
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), i))
                .collect();
            names
                .iter()
                .map(|n| {
                    lookup
                        .get(n.as_str())
                        .copied()
                        .ok_or_else(|| Error::InvalidTricluster(format!("unknown id `{n}` on axis {axis}")))
                })
                .collect()
        };
        Tricluster::new(
            resolve(0, &ids.observations)?,
            resolve(1, &ids.variables)?,
            resolve(2, &ids.contexts)?,
        )
    }
}

/// Serialized form of a tricluster using axis ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriclusterIds {
    #[serde(rename = "I")]
    pub observations: Vec<String>,
    #[serde(rename = "J")]
    pub variables: Vec<String>,
    #[serde(rename = "K")]
    pub contexts: Vec<String>,
}

/// Per-(variable, context) expectations of a tricluster plus the matching band.
#[derive(Debug, Clone, PartialEq)]
pub struct TriclusterPattern<T> {
    variables: Vec<usize>,
    contexts: Vec<usize>,
    /// Row-major over `variables x contexts`.
    expectations: Vec<T>,
    radius: T,
}

impl<T: Scalar> TriclusterPattern<T> {
    pub fn new(variables: Vec<usize>, contexts: Vec<usize>, expectations: Vec<T>, radius: T) -> Result<Self> {
        if expectations.len() != variables.len() * contexts.len() {
            return Err(Error::InvalidTricluster(format!(
                "{} expectations for a {}x{} pattern",
                expectations.len(),
                variables.len(),
                contexts.len()
            )));
        }
        if !(radius >= T::zero()) {
            return Err(Error::InvalidScore("pattern radius must be non-negative".into()));
        }
        Ok(TriclusterPattern {
            variables,
            contexts,
            expectations,
            radius,
        })
    }

    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn contexts(&self) -> &[usize] {
        &self.contexts
    }

    pub fn expectations(&self) -> &[T] {
        &self.expectations
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn expectation(&self, jj: usize, kk: usize) -> T {
        self.expectations[jj * self.contexts.len() + kk]
    }

    pub fn with_radius(&self, radius: T) -> Self {
        TriclusterPattern {
            radius,
            ..self.clone()
        }
    }

    /// Iterates `(j, k, c_jk)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.variables.iter().enumerate().flat_map(move |(jj, &j)| {
            self.contexts
                .iter()
                .enumerate()
                .map(move |(kk, &k)| (j, k, self.expectation(jj, kk)))
        })
    }

    /// Whether observation `i` lies within the band on every pattern cell.
    pub fn matches(&self, d: &Dataset<T>, i: usize) -> bool {
        self.cells().all(|(j, k, c)| (d.get(i, j, k) - c).abs() <= self.radius)
    }
}

/// Column means over `I`, computed as `x0 + mean(x - x0)` so a constant column
/// reproduces its value exactly.
pub fn pattern_of<T: Scalar>(d: &Dataset<T>, t: &Tricluster, radius: T) -> TriclusterPattern<T> {
    let rows = t.observations();
    let inv = T::one() / T::of_usize(rows.len());
    let mut expectations = Vec::with_capacity(t.variables().len() * t.contexts().len());
    for &j in t.variables() {
        for &k in t.contexts() {
            let base = d.get(rows[0], j, k);
            let shift: T = rows.iter().map(|&i| d.get(i, j, k) - base).sum();
            expectations.push(base + shift * inv);
        }
    }
    TriclusterPattern {
        variables: t.variables().to_vec(),
        contexts: t.contexts().to_vec(),
        expectations,
        radius,
    }
}

/// Observations (over the whole dataset) containing the pattern.
pub fn matching_observations<T: Scalar>(d: &Dataset<T>, phi: &TriclusterPattern<T>) -> Vec<usize> {
    (0..d.n()).filter(|&i| phi.matches(d, i)).collect()
}

pub fn pattern_coverage<T: Scalar>(d: &Dataset<T>, phi: &TriclusterPattern<T>) -> usize {
    (0..d.n()).filter(|&i| phi.matches(d, i)).count()
}

pub fn outcome_coverage(labels: &[ClassOutcome], c: &ClassOutcome) -> Result<usize> {
    match labels.iter().filter(|l| *l == c).count() {
        0 => Err(Error::UnknownOutcome(c.0.clone())),
        n => Ok(n),
    }
}

pub fn rule_coverage<T: Scalar>(d: &Dataset<T>, phi: &TriclusterPattern<T>, c: &ClassOutcome) -> Result<usize> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    outcome_coverage(labels, c)?;
    Ok((0..d.n()).filter(|&i| labels[i] == *c && phi.matches(d, i)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tricluster_normalizes_and_rejects_empty() {
        let t = Tricluster::new(vec![3, 1, 3], vec![0], vec![2, 1]).unwrap();
        assert_eq!(t.observations(), &[1, 3]);
        assert_eq!(t.contexts(), &[1, 2]);
        assert!(matches!(Tricluster::new(vec![], vec![0], vec![0]), Err(Error::EmptyTricluster)));
    }

    #[test]
    fn out_of_bounds_is_invalid() {
        let d = Dataset::from_fn([2, 2, 2], |_, _, _| 0.0);
        let t = Tricluster::new(vec![0, 2], vec![0], vec![0]).unwrap();
        assert!(t.validate(&d).is_err());
    }

    #[test]
    fn ids_round_trip() {
        let d = Dataset::from_fn([4, 3, 5], |_, _, _| 0.0_f64);
        let t = Tricluster::new(vec![0, 3], vec![2], vec![1, 4]).unwrap();
        let ids = t.to_ids(&d);
        assert_eq!(ids.observations, ["o0", "o3"]);
        let json = serde_json::to_string(&ids).unwrap();
        assert_eq!(json, r#"{"I":["o0","o3"],"J":["v2"],"K":["t1","t4"]}"#);
        assert_eq!(Tricluster::from_ids(&ids, &d).unwrap(), t);
    }

    #[test]
    fn constant_tricluster_pattern_is_exact() {
        let d = Dataset::from_fn([15, 3, 4], |_, _, _| 0.4);
        let t = Tricluster::full(d.dims()).unwrap();
        let phi = pattern_of(&d, &t, 0.0);
        assert!(phi.expectations().iter().all(|&c| c == 0.4));
        assert_eq!(pattern_coverage(&d, &phi), 15);
    }

    #[test]
    fn pattern_is_column_mean() {
        let d = Dataset::from_fn([2, 1, 1], |i, _, _| if i == 0 { 0.2_f64 } else { 0.6 });
        let t = Tricluster::full(d.dims()).unwrap();
        let phi = pattern_of(&d, &t, 0.05);
        assert!((phi.expectation(0, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn full_radius_covers_everything() {
        let d = Dataset::from_fn([6, 2, 3], |i, j, k| ((i * 5 + j * 3 + k) % 7) as f64 / 7.0);
        let t = Tricluster::new(vec![0, 1], vec![0, 1], vec![0, 1, 2]).unwrap();
        let phi = pattern_of(&d, &t, 1.0);
        assert_eq!(pattern_coverage(&d, &phi), 6);
    }

    #[test]
    fn coverage_counts_rows_in_band() {
        // rows 0..4 sit at 0.5 +- 0.01, rows 4 and 5 are far away
        let vals = [0.5, 0.51, 0.49, 0.5, 0.9, 0.1];
        let d = Dataset::from_fn([6, 1, 2], |i, _, _| vals[i]);
        let phi = TriclusterPattern::new(vec![0], vec![0, 1], vec![0.5, 0.5], 0.02).unwrap();
        let brute = (0..6)
            .filter(|&i| (0..2).all(|k| (d.get(i, 0, k) - 0.5_f64).abs() <= 0.02))
            .count();
        assert_eq!(brute, 4);
        assert_eq!(pattern_coverage(&d, &phi), 4);
    }

    #[test]
    fn outcome_and_rule_coverage() {
        let labels: Vec<ClassOutcome> = ["a", "b", "a", "a"].iter().map(|s| ClassOutcome::new(*s)).collect();
        assert_eq!(outcome_coverage(&labels, &ClassOutcome::new("a")).unwrap(), 3);
        assert_eq!(outcome_coverage(&labels, &ClassOutcome::new("b")).unwrap(), 1);
        assert!(matches!(
            outcome_coverage(&labels, &ClassOutcome::new("z")),
            Err(Error::UnknownOutcome(_))
        ));

        // rows 1..=3 match; their labels are a, a, b
        let vals = [0.0, 1.0, 1.0, 1.0, 0.0];
        let d = Dataset::from_fn([5, 1, 1], |i, _, _| vals[i])
            .with_labels(vec!["b", "a", "a", "b", "a"])
            .unwrap();
        let phi = TriclusterPattern::new(vec![0], vec![0], vec![1.0], 0.0).unwrap();
        assert_eq!(rule_coverage(&d, &phi, &ClassOutcome::new("a")).unwrap(), 2);
        let far = TriclusterPattern::new(vec![0], vec![0], vec![5.0], 0.0).unwrap();
        assert_eq!(rule_coverage(&d, &far, &ClassOutcome::new("a")).unwrap(), 0);
        assert!(matches!(
            rule_coverage(&d.clone().without_labels(), &phi, &ClassOutcome::new("a")),
            Err(Error::MissingLabels)
        ));
    }
}
