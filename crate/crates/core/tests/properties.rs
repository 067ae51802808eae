use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tricluster::discrimination::{lift, standard_lift, RuleStats};
use tricluster::evaluation::{profile_correlation, summarize_solution, welch_t_test, Correlation};
use tricluster::mof::mof_score;
use tricluster::patterns::pattern_of;
use tricluster::quality::{evaluate_pqc, lsl, msl, msr};
use tricluster::significance::{binomial_tail, null_model, ssc};
use tricluster::tensor::{min_max_scale, paa, read_tensor_csv, write_tensor_csv, CsvLayout};
use tricluster::trigen::{evolve_generation, random_tricluster, Fitness};
use tricluster::*;

fn tensor(max: [usize; 3]) -> impl Strategy<Value = Dataset64> {
    (2..=max[0], 2..=max[1], 2..=max[2]).prop_flat_map(|(n, m, p)| {
        prop::collection::vec(0.0..1.0f64, n * m * p).prop_map(move |v| Dataset::from_fn([n, m, p], |i, j, k| v[(i * m + j) * p + k]))
    })
}

fn additive(max: usize) -> impl Strategy<Value = Dataset64> {
    (1..=max, 1..=max, 1..=max).prop_flat_map(|(n, m, p)| {
        (
            -5.0..5.0f64,
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(-1.0..1.0f64, m),
            prop::collection::vec(-1.0..1.0f64, p),
        )
            .prop_map(move |(mu, r, c, t)| Dataset::from_fn([n, m, p], |i, j, k| mu + r[i] + c[j] + t[k]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn msr_annihilates_additive_models(d in additive(6)) {
        let t = Tricluster::full(d.dims()).unwrap();
        prop_assert!(msr(&d, &t).unwrap() <= 1e-12);
    }

    #[test]
    fn quality_measures_are_shift_invariant(d in tensor([5, 4, 5]), shift in -3.0..3.0f64) {
        let t = Tricluster::full(d.dims()).unwrap();
        let moved = Dataset::from_fn(d.dims(), |i, j, k| d.get(i, j, k) + shift);
        prop_assert!((msr(&d, &t).unwrap() - msr(&moved, &t).unwrap()).abs() < 1e-9);
        prop_assert!((lsl(&d, &t).unwrap() - lsl(&moved, &t).unwrap()).abs() < 1e-9);
        prop_assert!((msl(&d, &t).unwrap() - msl(&moved, &t).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn slope_measures_are_bounded(d in tensor([5, 4, 5])) {
        let t = Tricluster::full(d.dims()).unwrap();
        for m in [QualityMeasure::Lsl, QualityMeasure::Msl] {
            let v = evaluate_pqc(m, &d, &t).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(msr(&d, &t).unwrap() >= 0.0);
    }

    #[test]
    fn binomial_tail_is_a_decreasing_probability(p in 0.0..=1.0f64, n in 1usize..40) {
        let mut prev = 1.0;
        for s in 0..=n {
            let v = binomial_tail(p, n, s).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn null_probability_is_interior(d in tensor([8, 3, 3]), radius in 0.0..0.5f64) {
        let t = Tricluster::full(d.dims()).unwrap();
        let phi = pattern_of(&d, &t, radius);
        let nm = null_model(&d, &phi);
        let n = d.n() as f64;
        prop_assert!(nm.cell_probabilities.iter().all(|&q| q >= 1.0 / (n + 1.0) - 1e-15 && q <= n / (n + 1.0) + 1e-15));
        let p = nm.pattern_probability();
        prop_assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn ssc_in_unit_interval(p in 0.0..=1.0f64, theta in 0.001..0.999f64) {
        let s = ssc(p, theta);
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert_eq!(s == 1.0, p >= theta || p.ln().abs() <= 1.0);
    }

    #[test]
    fn standard_lift_bounded(n in 1usize..30, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let pc = 1 + (a * (n - 1) as f64) as usize;
        let oc = 1 + (b * (n - 1) as f64) as usize;
        let lo = (pc + oc).saturating_sub(n);
        let rc = lo + (c * (pc.min(oc) - lo) as f64) as usize;
        let r = RuleStats::new(pc, oc, rc, n, ClassOutcome::new("c")).unwrap();
        let sl: f64 = standard_lift(&r).unwrap();
        prop_assert!((0.0..=1.0).contains(&sl));
        prop_assert!(lift::<f64>(&r).unwrap() >= 0.0);
    }

    #[test]
    fn mof_monotone_in_quality(p1 in 0.0..0.5f64, dp in 0.0..0.5f64, dpc in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        for mode in [MofMode::Original, MofMode::Additive, MofMode::Multiplicative] {
            let cfg = MofConfig::with_mode(mode);
            let lo = mof_score(p1, dpc, s, &cfg).unwrap();
            let hi = mof_score(p1 + dp, dpc, s, &cfg).unwrap();
            prop_assert!(lo <= hi + 1e-15);
            prop_assert!(lo >= 0.0);
        }
    }

    #[test]
    fn pearson_shift_invariant_and_order_free(d in tensor([5, 3, 4]), shift in -2.0..2.0f64) {
        let t = Tricluster::full(d.dims()).unwrap();
        let base = profile_correlation(&d, &t, Correlation::Pearson).unwrap();
        prop_assert!((-1.0..=1.0).contains(&base));
        let moved = Dataset::from_fn(d.dims(), |i, j, k| d.get(i, j, k) + shift);
        prop_assert!((profile_correlation(&moved, &t, Correlation::Pearson).unwrap() - base).abs() < 1e-9);
        let n = d.n();
        let reversed = Dataset::from_fn(d.dims(), |i, j, k| d.get(n - 1 - i, j, k));
        prop_assert!((profile_correlation(&reversed, &t, Correlation::Pearson).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn spearman_monotone_invariant(d in tensor([5, 3, 4])) {
        let t = Tricluster::full(d.dims()).unwrap();
        let base = profile_correlation(&d, &t, Correlation::Spearman).unwrap();
        let warped = Dataset::from_fn(d.dims(), |i, j, k| d.get(i, j, k).powi(3).exp());
        prop_assert!((profile_correlation(&warped, &t, Correlation::Spearman).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn welch_p_is_symmetric_probability(
        a in prop::collection::vec(-10.0..10.0f64, 2..12),
        b in prop::collection::vec(-10.0..10.0f64, 2..12),
    ) {
        if let (Ok((t1, p1)), Ok((t2, p2))) = (welch_t_test(&a, &b), welch_t_test(&b, &a)) {
            prop_assert!((0.0..=1.0).contains(&p1));
            prop_assert!((p1 - p2).abs() < 1e-12);
            prop_assert!((t1 + t2).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_lands_in_unit_interval(d in tensor([4, 3, 5]), gain in 0.1..100.0f64) {
        let wide = Dataset::from_fn(d.dims(), |i, j, k| d.get(i, j, k) * gain - 7.0);
        let s = min_max_scale(&wide);
        prop_assert!(s.values().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn paa_keeps_series_mean_on_even_windows(d in tensor([3, 2, 4]), w in 1usize..4) {
        let p = d.p() * w;
        let long = Dataset::from_fn([d.n(), d.m(), p], |i, j, k| d.get(i, j, k / w));
        let short = paa(&long, d.p()).unwrap();
        for (a, b) in short.values().iter().zip(d.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip(d in tensor([4, 3, 3])) {
        let mut buf = Vec::new();
        write_tensor_csv(&mut buf, &d).unwrap();
        let back: Dataset64 = read_tensor_csv(buf.as_slice(), &CsvLayout::default()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn tricluster_axes_sorted_unique(i in prop::collection::vec(0usize..20, 1..10), j in prop::collection::vec(0usize..20, 1..10)) {
        let t = Tricluster::new(i.clone(), j.clone(), vec![3, 1, 3]).unwrap();
        for axis in 0..3 {
            prop_assert!(t.axis(axis).windows(2).all(|w| w[0] < w[1]));
        }
        prop_assert_eq!(t.contexts(), &[1, 3]);
    }

    #[test]
    fn summary_mean_between_extremes(seed in 0u64..1000) {
        let g = synthetic::generate::<f64>(&PlantSpec { seed, dims: [12, 4, 10], block_dims: [4, 2, 3], ..Default::default() }).unwrap();
        let cfg = ObjectiveConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts: Vec<Tricluster> = (0..4).map(|_| random_tricluster(&mut rng, g.dataset.dims(), [2, 2, 2])).collect();
        let s = Solution::assemble(&g.dataset, &ts, &cfg, SolutionMeta::new(Algorithm::Trigen, &cfg, seed)).unwrap();
        let sum = summarize_solution(&s).unwrap();
        for m in &sum.metrics {
            let xs = tricluster::evaluation::metric_values(&s, &m.name);
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m.mean >= lo - 1e-12 && m.mean <= hi + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generations_respect_bounds(seed in 0u64..10_000, mutation in 0.0..=1.0f64, crossover in 0.0..=1.0f64) {
        let d = Dataset::from_fn([9, 4, 7], |i, j, k| ((i * 5 + j * 3 + k * 7 + seed as usize) % 13) as f64 / 13.0);
        let cfg = TrigenConfig {
            population_size: 12,
            mutation_prob: mutation,
            crossover_prob: crossover,
            min_dims: [3, 2, 2],
            ..Default::default()
        };
        let fitness = Fitness::new(&d, &cfg, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = (0..cfg.population_size).map(|_| random_tricluster(&mut rng, d.dims(), cfg.min_dims)).collect();
        let mut pop = fitness.evaluate_all(init).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            pop = evolve_generation(&pop, &fitness, &cfg, &mut rng).unwrap();
            prop_assert_eq!(pop.len(), cfg.population_size);
            for ind in &pop {
                let t = &ind.tricluster;
                prop_assert!(t.validate(&d).is_ok());
                prop_assert!((0..3).all(|a| t.axis(a).len() >= cfg.min_dims[a]));
            }
            let b = pop.iter().map(|x| x.fitness).fold(f64::INFINITY, f64::min);
            prop_assert!(b <= best);
            best = b;
        }
    }
}
