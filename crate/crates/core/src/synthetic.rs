//! Planted-tricluster generators with known ground truth.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::patterns::{Tricluster, TriclusterIds};
use crate::tensor::{ClassOutcome, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coherence {
    Constant,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    Uniform,
    Additive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantSpec {
    pub dims: [usize; 3],
    pub block_dims: [usize; 3],
    pub coherence: Coherence,
    pub noise_sigma: f64,
    pub label_association: f64,
    pub n_outcomes: usize,
    pub background: Background,
    pub seed: u64,
}

impl Default for PlantSpec {
    fn default() -> Self {
        PlantSpec {
            dims: [50, 8, 60],
            block_dims: [15, 4, 20],
            coherence: Coherence::Constant,
            noise_sigma: 0.01,
            label_association: 0.9,
            n_outcomes: 4,
            background: Background::Uniform,
            seed: 0,
        }
    }
}

impl PlantSpec {
    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if self.block_dims[a] == 0 || self.block_dims[a] > self.dims[a] {
                return Err(Error::InvalidSpec(format!(
                    "block {:?} does not fit tensor {:?}",
                    self.block_dims, self.dims
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.label_association) {
            return Err(Error::InvalidSpec(format!(
                "label_association {} outside [0, 1]",
                self.label_association
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!("noise_sigma {}", self.noise_sigma)));
        }
        if self.n_outcomes < 2 {
            return Err(Error::InvalidSpec("need at least two outcomes".into()));
        }
        Ok(())
    }
}

pub fn outcome_name(c: usize) -> String {
    format!("c{c}")
}

#[derive(Debug, Clone)]
pub struct Planted<T> {
    pub dataset: Dataset<T>,
    pub ground_truth: Tricluster,
    pub target: ClassOutcome,
}

/// Ground truth as written next to a generated dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(flatten)]
    pub tricluster: TriclusterIds,
    pub target: ClassOutcome,
}

impl<T: Scalar> Planted<T> {
    pub fn ground_truth_ids(&self) -> GroundTruth {
        GroundTruth {
            tricluster: self.ground_truth.to_ids(&self.dataset),
            target: self.target.clone(),
        }
    }
}

/// `x + e` with `e ~ N(0, sigma)` redrawn until the sum lies in `[0, 1]`.
fn perturb(rng: &mut ChaCha8Rng, noise: Option<&Normal<f64>>, x: f64) -> f64 {
    let Some(noise) = noise else { return x };
    loop {
        let y = x + noise.sample(rng);
        if (0.0..=1.0).contains(&y) {
            return y;
        }
    }
}

fn sorted_subset(rng: &mut ChaCha8Rng, len: usize, amount: usize) -> Vec<usize> {
    let mut v = sample(rng, len, amount).into_vec();
    v.sort_unstable();
    v
}

/// Samples a tensor with one planted block and class labels.
///
/// Rows of the block take the target outcome `c0` with probability
/// `label_association` and one of the other outcomes otherwise; the
/// remaining rows are labeled uniformly over all outcomes.
pub fn generate<T: Scalar>(spec: &PlantSpec) -> Result<Planted<T>> {
    spec.validate()?;
    let [n, m, p] = spec.dims;
    let [bi, bj, bk] = spec.block_dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let rows = sorted_subset(&mut rng, n, bi);
    let vars = sorted_subset(&mut rng, m, bj);
    let start = rng.random_range(0..=p - bk);
    let ctxs: Vec<usize> = (start..start + bk).collect();

    let mut values = match spec.background {
        Background::Uniform => (0..n * m * p).map(|_| rng.random::<f64>()).collect::<Vec<_>>(),
        Background::Additive => {
            let mut effect = |len: usize| (0..len).map(|_| rng.random::<f64>() / 3.0).collect::<Vec<_>>();
            let (a, b, c) = (effect(n), effect(m), effect(p));
            let mut v = Vec::with_capacity(n * m * p);
            for &ai in &a {
                for &bj in &b {
                    for &ck in &c {
                        v.push(ai + bj + ck);
                    }
                }
            }
            v
        }
    };

    let noise = (spec.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidSpec(e.to_string())))
        .transpose()?;
    let block = match spec.coherence {
        Coherence::Constant => {
            let v = rng.random_range(0.2..0.8);
            (vec![v], vec![0.0; bi], vec![0.0; bj], vec![0.0; bk])
        }
        Coherence::Additive => {
            let mut effect = |len: usize| (0..len).map(|_| rng.random_range(0.0..0.2)).collect::<Vec<_>>();
            let (r, c, t) = (effect(bi), effect(bj), effect(bk));
            (vec![rng.random_range(0.2..0.4)], r, c, t)
        }
    };
    let (mu, r, c, t) = block;
    for (ii, &i) in rows.iter().enumerate() {
        for (jj, &j) in vars.iter().enumerate() {
            for (kk, &k) in ctxs.iter().enumerate() {
                let x = mu[0] + r[ii] + c[jj] + t[kk];
                values[(i * m + j) * p + k] = perturb(&mut rng, noise.as_ref(), x);
            }
        }
    }

    let mut labels = Vec::with_capacity(n);
    let mut planted = rows.iter().peekable();
    for i in 0..n {
        let c = if planted.peek() == Some(&&i) {
            planted.next();
            if rng.random_bool(spec.label_association) {
                0
            } else {
                rng.random_range(1..spec.n_outcomes)
            }
        } else {
            rng.random_range(0..spec.n_outcomes)
        };
        labels.push(outcome_name(c));
    }

    let dataset = Dataset::from_fn(spec.dims, |i, j, k| T::of(values[(i * m + j) * p + k])).with_labels(labels)?;
    Ok(Planted {
        dataset,
        ground_truth: Tricluster::new(rows, vars, ctxs)?,
        target: ClassOutcome::new(outcome_name(0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::msr;

    #[test]
    fn noiseless_constant_block_has_zero_residue() {
        let spec = PlantSpec {
            noise_sigma: 0.0,
            ..Default::default()
        };
        let g = generate::<f64>(&spec).unwrap();
        assert_eq!(msr(&g.dataset, &g.ground_truth).unwrap(), 0.0);
        assert_eq!(g.ground_truth.shape(), [15, 4, 20]);
        let k = g.ground_truth.contexts();
        assert!(k.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn values_stay_in_unit_interval() {
        for background in [Background::Uniform, Background::Additive] {
            let spec = PlantSpec {
                noise_sigma: 0.3,
                coherence: Coherence::Additive,
                background,
                ..Default::default()
            };
            let g = generate::<f64>(&spec).unwrap();
            assert!(g.dataset.values().iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn same_seed_same_data() {
        let spec = PlantSpec {
            seed: 9,
            ..Default::default()
        };
        let a = generate::<f64>(&spec).unwrap();
        let b = generate::<f64>(&spec).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.ground_truth, b.ground_truth);
        let c = generate::<f64>(&PlantSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn infeasible_block_rejected() {
        let spec = PlantSpec {
            block_dims: [60, 4, 20],
            ..Default::default()
        };
        assert!(matches!(generate::<f64>(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn ground_truth_round_trips() {
        let g = generate::<f64>(&PlantSpec::default()).unwrap();
        let json = serde_json::to_string(&g.ground_truth_ids()).unwrap();
        let back: GroundTruth = serde_json::from_str(&json).unwrap();
        assert_eq!(Tricluster::from_ids(&back.tricluster, &g.dataset).unwrap(), g.ground_truth);
        assert_eq!(back.target, g.target);
    }
}
