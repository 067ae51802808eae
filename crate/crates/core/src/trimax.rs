//! Greedy top-down search: multiple and single node deletion down to the
//! threshold, then node addition, repeated on a masked copy of the data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mof::MofMode;
use crate::num::Scalar;
use crate::objective::{Objective, ObjectiveConfig};
use crate::patterns::Tricluster;
use crate::quality::{msr_breakdown, QualityMeasure};
use crate::solution::{Algorithm, Solution, SolutionMeta};
use crate::tensor::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrimaxConfig {
    /// Threshold on the original objective scale; recalibrated in composite modes.
    pub delta: f64,
    pub lambda: f64,
    pub max_triclusters: usize,
    pub min_dims: [usize; 3],
    pub seed: u64,
    pub objective: ObjectiveConfig,
}

impl Default for TrimaxConfig {
    fn default() -> Self {
        TrimaxConfig {
            delta: 0.001,
            lambda: 1.2,
            max_triclusters: 20,
            min_dims: [2, 2, 2],
            seed: 0,
            objective: ObjectiveConfig::default(),
        }
    }
}

impl TrimaxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!("delta {} must be positive", self.delta)));
        }
        if !(self.lambda > 1.0) {
            return Err(Error::InvalidConfig(format!("lambda {} must exceed 1", self.lambda)));
        }
        if self.max_triclusters == 0 {
            return Err(Error::InvalidConfig("max_triclusters must be positive".into()));
        }
        if self.min_dims.contains(&0) {
            return Err(Error::InvalidConfig("min_dims must be positive".into()));
        }
        self.objective.validate()
    }
}

pub(crate) fn check_size<T: Scalar>(d: &Dataset<T>, min_dims: [usize; 3]) -> Result<()> {
    if (0..3).any(|a| d.dims()[a] < min_dims[a]) {
        return Err(Error::DatasetTooSmall {
            dims: d.dims(),
            min_dims,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct State<T> {
    score: T,
    pqc: T,
    dpc: T,
    ssc: T,
}

/// One extraction with the objective values accepted along the way.
#[derive(Debug, Clone)]
pub struct Extraction<T> {
    pub tricluster: Tricluster,
    pub score: T,
    /// Scores after each accepted multiple-deletion batch (DPC and SSC held
    /// at their values from the start of the phase).
    pub multiple_deletion: Vec<T>,
    pub single_deletion: Vec<T>,
}

struct Search<'a, T> {
    d: &'a Dataset<T>,
    obj: Objective<'a>,
    cfg: &'a TrimaxConfig,
    delta: T,
}

impl<T: Scalar> Search<'_, T> {
    fn state(&self, t: &Tricluster) -> Result<State<T>> {
        let pqc = self.obj.pqc(self.d, t)?;
        if self.obj.mode() == MofMode::Original {
            return Ok(State {
                score: pqc,
                pqc,
                dpc: T::one(),
                ssc: T::one(),
            });
        }
        let c = self.obj.components_with_pqc(self.d, t, pqc)?;
        Ok(State {
            score: c.score,
            pqc,
            dpc: c.dpc,
            ssc: c.ssc,
        })
    }

    fn removable(&self, t: &Tricluster, axis: usize) -> bool {
        t.axis(axis).len() > self.cfg.min_dims[axis]
    }

    /// Per-element contribution to the quality term; `None` where the
    /// dimension is already at its minimum.
    fn contributions(&self, t: &Tricluster, pqc: T) -> Result<[Vec<Option<T>>; 3]> {
        let mut out: [Vec<Option<T>>; 3] = Default::default();
        if self.obj.config().measure == QualityMeasure::Msr {
            let b = msr_breakdown(self.d, t)?;
            for (axis, slices) in b.slice_residues.into_iter().enumerate() {
                let ok = self.removable(t, axis);
                out[axis] = slices.into_iter().map(|r| ok.then_some(r)).collect();
            }
            return Ok(out);
        }
        // other measures: how much the score drops when the element goes,
        // shifted so the mean contribution sits near the score itself
        let jobs: Vec<(usize, usize)> = (0..3)
            .filter(|&a| self.removable(t, a))
            .flat_map(|a| (0..t.axis(a).len()).map(move |e| (a, e)))
            .collect();
        let two = T::of(2.0);
        let values = jobs
            .par_iter()
            .map(|&(a, e)| Ok(two * pqc - self.obj.pqc(self.d, &t.without(a, t.axis(a)[e]))?))
            .collect::<Result<Vec<T>>>()?;
        for a in 0..3 {
            out[a] = vec![None; t.axis(a).len()];
        }
        for (&(a, e), v) in jobs.iter().zip(values) {
            out[a][e] = Some(v);
        }
        Ok(out)
    }

    fn extract(&self) -> Result<Option<Extraction<T>>> {
        let mut t = Tricluster::full(self.d.dims())?;
        let mut cur = self.state(&t)?;
        let mut multiple_deletion = Vec::new();
        let mut single_deletion = Vec::new();
        let lambda = T::of(self.cfg.lambda);

        // multiple node deletion
        while cur.score > self.delta {
            let contrib = self.contributions(&t, cur.pqc)?;
            let cut = lambda * cur.pqc;
            let mut next = t.clone();
            let mut deleted = false;
            for axis in 0..3 {
                let mut flagged: Vec<(T, usize)> = contrib[axis]
                    .iter()
                    .zip(t.axis(axis))
                    .filter_map(|(c, &idx)| c.filter(|&c| c > cut).map(|c| (c, idx)))
                    .collect();
                flagged.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
                let allowed = t.axis(axis).len() - self.cfg.min_dims[axis];
                for &(_, idx) in flagged.iter().take(allowed) {
                    next = next.without(axis, idx);
                    deleted = true;
                }
            }
            if !deleted {
                break;
            }
            let pqc = self.obj.pqc(self.d, &next)?;
            let score = self.obj.compose(pqc, cur.dpc, cur.ssc)?;
            if score > cur.score {
                break;
            }
            t = next;
            cur = State { score, pqc, ..cur };
            multiple_deletion.push(score);
        }

        // single node deletion
        cur = self.state(&t)?;
        while cur.score > self.delta {
            let contrib = self.contributions(&t, cur.pqc)?;
            let mut candidates: Vec<(T, usize, usize)> = contrib
                .iter()
                .enumerate()
                .flat_map(|(axis, cs)| {
                    cs.iter()
                        .zip(t.axis(axis))
                        .filter_map(move |(c, &idx)| c.map(|c| (c, axis, idx)))
                })
                .collect();
            candidates.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.1.cmp(&b.1))
                    .then(a.2.cmp(&b.2))
            });
            let mut accepted = None;
            for &(_, axis, idx) in &candidates {
                let next = t.without(axis, idx);
                let s = self.state(&next)?;
                if s.score <= cur.score {
                    accepted = Some((next, s));
                    break;
                }
            }
            let Some((next, s)) = accepted else {
                return Ok(None);
            };
            t = next;
            cur = s;
            single_deletion.push(cur.score);
        }

        // node addition, contexts first
        loop {
            let mut added = false;
            for axis in [2, 1, 0] {
                for idx in 0..self.d.dims()[axis] {
                    if t.axis(axis).binary_search(&idx).is_ok() {
                        continue;
                    }
                    let next = t.with(axis, idx);
                    let s = self.state(&next)?;
                    if s.score <= self.delta {
                        t = next;
                        cur = s;
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }

        Ok(Some(Extraction {
            tricluster: t,
            score: cur.score,
            multiple_deletion,
            single_deletion,
        }))
    }
}

/// Objective threshold after recalibration for composite modes.
pub fn effective_delta<T: Scalar>(cfg: &TrimaxConfig) -> Result<T> {
    cfg.objective.threshold(T::of(cfg.delta))
}

/// A single extraction on `d` as given, without masking.
pub fn extract_one<T: Scalar>(d: &Dataset<T>, cfg: &TrimaxConfig) -> Result<Option<Extraction<T>>> {
    cfg.validate()?;
    check_size(d, cfg.min_dims)?;
    let obj = Objective::new(&cfg.objective);
    obj.check_dataset(d)?;
    let search = Search {
        d,
        obj,
        cfg,
        delta: effective_delta(cfg)?,
    };
    search.extract()
}

/// Extraction rounds over a progressively masked copy of `d`.
pub fn run_trimax<T: Scalar>(d: &Dataset<T>, cfg: &TrimaxConfig) -> Result<Solution<T>> {
    cfg.validate()?;
    check_size(d, cfg.min_dims)?;
    let obj = Objective::new(&cfg.objective);
    obj.check_dataset(d)?;
    let delta = effective_delta::<T>(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut work = d.clone();
    let mut covered = vec![false; d.values().len()];
    let mut found = Vec::new();

    for _ in 0..2 * cfg.max_triclusters {
        if found.len() >= cfg.max_triclusters {
            break;
        }
        let search = Search {
            d: &work,
            obj: Objective::new(&cfg.objective),
            cfg,
            delta,
        };
        let Some(x) = search.extract()? else {
            break;
        };
        let t = x.tricluster;
        let mut fresh = 0;
        for &i in t.observations() {
            for &j in t.variables() {
                for &k in t.contexts() {
                    let at = d.index(i, j, k);
                    fresh += usize::from(!covered[at]);
                    covered[at] = true;
                    work.set(i, j, k, T::of(rng.random::<f64>()));
                }
            }
        }
        if fresh == 0 {
            break;
        }
        if obj.score(d, &t)? <= delta {
            found.push(t);
        }
    }

    let mut meta = SolutionMeta::new(Algorithm::Trimax, &cfg.objective, cfg.seed);
    meta.threshold = Some(delta.as_f64());
    Solution::assemble(d, &found, &cfg.objective, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_tensor_is_one_tricluster() {
        let d = Dataset::from_fn([6, 4, 5], |_, _, _| 0.3);
        let s = run_trimax(&d, &TrimaxConfig::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.resolve(&d).unwrap()[0], Tricluster::full(d.dims()).unwrap());
        assert_eq!(s.triclusters[0].pqc_msr, 0.0);
    }

    #[test]
    fn too_small_dataset() {
        let d = Dataset::from_fn([1, 4, 5], |_, _, _| 0.3);
        assert!(matches!(
            run_trimax(&d, &TrimaxConfig::default()),
            Err(Error::DatasetTooSmall { .. })
        ));
    }

    #[test]
    fn lambda_must_exceed_one() {
        let cfg = TrimaxConfig {
            lambda: 1.0,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}
