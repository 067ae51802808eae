//! Evolutionary search: a seeded population of candidate triclusters evolved
//! by tournament selection, set crossover, mutation and elitism, extracting
//! one tricluster per round with a penalty on already covered cells.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::objective::{Objective, ObjectiveConfig};
use crate::patterns::Tricluster;
use crate::solution::{Algorithm, Solution, SolutionMeta};
use crate::tensor::Dataset;
use crate::trimax::check_size;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrigenConfig {
    pub n_triclusters: usize,
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elite_fraction: f64,
    pub overlap_penalty_weight: f64,
    /// Weight of the penalty on small triclusters.
    pub volume_weight: f64,
    /// Reference objective value; fitness measures the objective in units of
    /// this (recalibrated in composite modes).
    pub delta: f64,
    pub min_dims: [usize; 3],
    pub seed: u64,
    pub objective: ObjectiveConfig,
}

impl Default for TrigenConfig {
    fn default() -> Self {
        TrigenConfig {
            n_triclusters: 20,
            population_size: 100,
            generations: 250,
            tournament_size: 3,
            crossover_prob: 0.8,
            mutation_prob: 0.1,
            elite_fraction: 0.1,
            overlap_penalty_weight: 0.5,
            volume_weight: 0.5,
            delta: 0.01,
            min_dims: [2, 2, 2],
            seed: 0,
            objective: ObjectiveConfig::default(),
        }
    }
}

impl TrigenConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
            ("elite_fraction", self.elite_fraction),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} {p} not in [0, 1]")));
            }
        }
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.n_triclusters == 0 {
            return Err(Error::InvalidConfig("n_triclusters must be positive".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidConfig("tournament_size must be positive".into()));
        }
        if !(self.overlap_penalty_weight >= 0.0 && self.volume_weight >= 0.0) {
            return Err(Error::InvalidConfig("penalty weights must be non-negative".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!("delta {} must be positive", self.delta)));
        }
        if self.min_dims.contains(&0) {
            return Err(Error::InvalidConfig("min_dims must be positive".into()));
        }
        self.objective.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub tricluster: Tricluster,
    pub fitness: T,
}

/// Fitness of candidates for one extraction round, memoized.
pub struct Fitness<'a, T> {
    d: &'a Dataset<T>,
    obj: Objective<'a>,
    scale: T,
    covered: Vec<bool>,
    overlap_weight: T,
    volume_weight: T,
    cache: Mutex<HashMap<Tricluster, T>>,
}

impl<'a, T: Scalar> Fitness<'a, T> {
    /// `previous` are the triclusters extracted in earlier rounds.
    pub fn new(d: &'a Dataset<T>, cfg: &'a TrigenConfig, previous: &[Tricluster]) -> Result<Self> {
        let mut covered = vec![false; d.values().len()];
        for t in previous {
            for &i in t.observations() {
                for &j in t.variables() {
                    for &k in t.contexts() {
                        covered[d.index(i, j, k)] = true;
                    }
                }
            }
        }
        Ok(Fitness {
            d,
            obj: Objective::new(&cfg.objective),
            scale: cfg.objective.threshold(T::of(cfg.delta))?,
            covered,
            overlap_weight: T::of(cfg.overlap_penalty_weight),
            volume_weight: T::of(cfg.volume_weight),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Share of the tricluster's cells covered by earlier rounds.
    pub fn overlap(&self, t: &Tricluster) -> T {
        if !self.covered.contains(&true) {
            return T::zero();
        }
        let mut hits = 0usize;
        for &i in t.observations() {
            for &j in t.variables() {
                for &k in t.contexts() {
                    hits += usize::from(self.covered[self.d.index(i, j, k)]);
                }
            }
        }
        T::of_usize(hits) / T::of_usize(t.volume())
    }

    /// One minus the mean relative size over the three dimensions.
    pub fn smallness(&self, t: &Tricluster) -> T {
        let dims = self.d.dims();
        let rel: T = (0..3).map(|a| T::of_usize(t.axis(a).len()) / T::of_usize(dims[a])).sum();
        T::one() - rel / T::of(3.0)
    }

    pub fn evaluate(&self, t: &Tricluster) -> Result<T> {
        let objective = self.obj.score(self.d, t)?;
        Ok(objective / self.scale + self.volume_weight * self.smallness(t) + self.overlap_weight * self.overlap(t))
    }

    /// Scores a batch in parallel, reusing cached values; order is preserved.
    pub fn evaluate_all(&self, ts: Vec<Tricluster>) -> Result<Vec<Individual<T>>> {
        let missing: Vec<Tricluster> = {
            let cache = self.cache.lock().unwrap();
            let mut seen = std::collections::HashSet::new();
            ts.iter()
                .filter(|t| !cache.contains_key(*t) && seen.insert(*t))
                .cloned()
                .collect()
        };
        let fresh = missing
            .par_iter()
            .map(|t| self.evaluate(t))
            .collect::<Result<Vec<T>>>()?;
        let mut cache = self.cache.lock().unwrap();
        cache.extend(missing.into_iter().zip(fresh));
        Ok(ts
            .into_iter()
            .map(|t| Individual {
                fitness: cache[&t],
                tricluster: t,
            })
            .collect())
    }
}

fn by_fitness<T: Scalar>(a: &Individual<T>, b: &Individual<T>) -> std::cmp::Ordering {
    a.fitness
        .partial_cmp(&b.fitness)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then_with(|| a.tricluster.cmp(&b.tricluster))
}

fn random_subset(rng: &mut ChaCha8Rng, len: usize, min: usize) -> Vec<usize> {
    let max = min.max(len / 2).min(len);
    let size = rng.random_range(min..=max);
    let mut v = sample(rng, len, size).into_vec();
    v.sort_unstable();
    v
}

/// Random individual: observation and variable subsets of random size, and a
/// contiguous context window.
pub fn random_tricluster(rng: &mut ChaCha8Rng, dims: [usize; 3], min_dims: [usize; 3]) -> Tricluster {
    let rows = random_subset(rng, dims[0], min_dims[0]);
    let vars = random_subset(rng, dims[1], min_dims[1]);
    let max_k = min_dims[2].max(dims[2] / 2).min(dims[2]);
    let len = rng.random_range(min_dims[2]..=max_k);
    let start = rng.random_range(0..=dims[2] - len);
    Tricluster::new(rows, vars, (start..start + len).collect()).expect("non-empty by construction")
}

fn tournament<'p, T: Scalar>(sorted: &'p [Individual<T>], size: usize, rng: &mut ChaCha8Rng) -> &'p Individual<T> {
    // the population is sorted, so the smallest drawn position wins
    let best = (0..size).map(|_| rng.random_range(0..sorted.len())).min().unwrap();
    &sorted[best]
}

/// Re-adds random indices to any dimension below its minimum.
fn repair(t: &mut Tricluster, dims: [usize; 3], min_dims: [usize; 3], rng: &mut ChaCha8Rng) {
    for axis in 0..3 {
        let set = &mut t.axes_mut()[axis];
        while set.len() < min_dims[axis].min(dims[axis]) {
            let idx = rng.random_range(0..dims[axis]);
            if let Err(pos) = set.binary_search(&idx) {
                set.insert(pos, idx);
            }
        }
    }
}

fn mutate(t: &mut Tricluster, dims: [usize; 3], rng: &mut ChaCha8Rng) {
    let axis = rng.random_range(0..3);
    let idx = rng.random_range(0..dims[axis]);
    let set = &mut t.axes_mut()[axis];
    match set.binary_search(&idx) {
        Ok(pos) => {
            set.remove(pos);
        }
        Err(pos) => set.insert(pos, idx),
    }
}

/// Next generation of the same size: elites first, then offspring of
/// tournament-selected parents.
pub fn evolve_generation<T: Scalar>(
    population: &[Individual<T>],
    fitness: &Fitness<'_, T>,
    cfg: &TrigenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Individual<T>>> {
    let dims = fitness.d.dims();
    let mut sorted = population.to_vec();
    sorted.sort_by(by_fitness);
    let elites = ((cfg.elite_fraction * sorted.len() as f64).ceil() as usize).min(sorted.len());
    let mut children = Vec::with_capacity(sorted.len() - elites);
    while elites + children.len() < sorted.len() {
        let a = tournament(&sorted, cfg.tournament_size, rng);
        let mut child = if rng.random_bool(cfg.crossover_prob) {
            let b = tournament(&sorted, cfg.tournament_size, rng);
            let mut c = a.tricluster.clone();
            for axis in 0..3 {
                if rng.random_bool(0.5) {
                    c.axes_mut()[axis] = b.tricluster.axis(axis).to_vec();
                }
            }
            c
        } else {
            a.tricluster.clone()
        };
        if rng.random_bool(cfg.mutation_prob) {
            mutate(&mut child, dims, rng);
        }
        repair(&mut child, dims, cfg.min_dims, rng);
        children.push(child);
    }
    sorted.truncate(elites);
    sorted.extend(fitness.evaluate_all(children)?);
    Ok(sorted)
}

/// Best individual of one extraction round with the best fitness seen after
/// each generation.
#[derive(Debug, Clone)]
pub struct Extraction<T> {
    pub best: Individual<T>,
    pub best_per_generation: Vec<T>,
}

/// Round `round` of the extraction loop; each round draws from its own
/// random stream.
pub fn extract_round<T: Scalar>(d: &Dataset<T>, cfg: &TrigenConfig, previous: &[Tricluster], round: u64) -> Result<Extraction<T>> {
    let fitness = Fitness::new(d, cfg, previous)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(round);
    let initial = (0..cfg.population_size)
        .map(|_| random_tricluster(&mut rng, d.dims(), cfg.min_dims))
        .collect();
    let mut population = fitness.evaluate_all(initial)?;
    let best_of = |p: &[Individual<T>]| p.iter().min_by(|a, b| by_fitness(a, b)).cloned().unwrap();
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(best_of(&population).fitness);
    for _ in 0..cfg.generations {
        population = evolve_generation(&population, &fitness, cfg, &mut rng)?;
        history.push(best_of(&population).fitness);
    }
    Ok(Extraction {
        best: best_of(&population),
        best_per_generation: history,
    })
}

pub fn run_trigen<T: Scalar>(d: &Dataset<T>, cfg: &TrigenConfig) -> Result<Solution<T>> {
    cfg.validate()?;
    check_size(d, cfg.min_dims)?;
    Objective::new(&cfg.objective).check_dataset(d)?;
    let mut found = Vec::with_capacity(cfg.n_triclusters);
    for round in 0..cfg.n_triclusters {
        let x = extract_round(d, cfg, &found, round as u64)?;
        found.push(x.best.tricluster);
    }
    let mut meta = SolutionMeta::new(Algorithm::Trigen, &cfg.objective, cfg.seed);
    meta.threshold = Some(cfg.objective.threshold(T::of(cfg.delta))?.as_f64());
    Solution::assemble(d, &found, &cfg.objective, meta)
}
