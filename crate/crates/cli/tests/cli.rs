use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tricluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tricluster"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tricluster(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) {
    ok(&["synth", "--seed", "3", "--dims", "30,6,24", "--block", "10,3,8", "--out", path(dir)]);
}

#[test]
fn synth_writes_dataset_and_truth() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    for f in ["tensor.csv", "labels.csv", "ground_truth.json", "manifest.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["I"].as_array().unwrap().len(), 10);
    assert_eq!(truth["target"], "c0");
    let rows = std::fs::read_to_string(tmp.path().join("tensor.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 30 * 6 * 24);
}

#[test]
fn mine_is_deterministic_and_replays_from_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let tensor = data.join("tensor.csv");
    let labels = data.join("labels.csv");
    for algo in ["trimax", "trigen"] {
        let run = |out: &Path| {
            ok(&[
                "mine", "--tensor", path(&tensor), "--labels", path(&labels), "--algo", algo, "--mof", "add",
                "--n", "3", "--generations", "10", "--population", "20", "--seed", "5", "--out", path(out),
            ]);
            std::fs::read(out.join("solution.json")).unwrap()
        };
        let a = run(&tmp.path().join(format!("{algo}-a")));
        let b = run(&tmp.path().join(format!("{algo}-b")));
        assert_eq!(a, b);

        let replay = tmp.path().join(format!("{algo}-replay"));
        let manifest = tmp.path().join(format!("{algo}-a/manifest.json"));
        ok(&["--config", path(&manifest), "mine", "--out", path(&replay)]);
        assert_eq!(std::fs::read(replay.join("solution.json")).unwrap(), a);
        let hash = |p: &Path| {
            let v: serde_json::Value = serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap();
            v["config_hash"].clone()
        };
        assert_eq!(hash(&replay.join("manifest.json")), hash(&manifest));

        let s: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(s["meta"]["algo"], algo);
        assert_eq!(s["meta"]["mof_mode"], "add");
        assert_eq!(s["meta"]["config_hash"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn missing_labels_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let out = tricluster(&[
        "mine", "--tensor", path(&tmp.path().join("tensor.csv")), "--mof", "add", "--out",
        path(&tmp.path().join("m")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("MissingLabels"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tricluster(&["mine", "--algo", "kmeans"]).status.code(), Some(2));
    assert_eq!(tricluster(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tricluster(&[]).status.code(), Some(2));
    assert_eq!(tricluster(&["synth", "--dims", "3,4"]).status.code(), Some(2));
}

#[test]
fn unreadable_input_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "obs,var,ctx,value\no1,v1,t1,0.5\no1,v1,t1,0.6\n").unwrap();
    let out = tricluster(&["ingest", "--tensor", path(&bad), "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("DuplicateCell"));
}

/// Independent sampler: different generator, direct formulas.
fn oracle_quantile(delta: f64, multiplicative: bool, draws: usize, seed: u64) -> f64 {
    let theta: f64 = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut xs: Vec<f64> = (0..draws)
        .map(|_| {
            let dpc: f64 = rng.random();
            let p: f64 = if rng.random::<f64>() < 0.5 {
                rng.random::<f64>() * theta
            } else {
                rng.random_range(theta..1.0)
            };
            let ssc = if p < theta { (1.0 / p.ln().abs()).min(1.0) } else { 1.0 };
            if multiplicative {
                (delta * dpc * ssc).cbrt()
            } else {
                delta.cbrt() + (dpc * delta).cbrt() + (ssc * delta).cbrt()
            }
        })
        .collect();
    let k = draws.div_ceil(20) - 1;
    *xs.select_nth_unstable_by(k, |a, b| a.total_cmp(b)).1
}

#[test]
fn recalibrate_prints_threshold_and_distribution() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "recalibrate", "--delta", "0.01", "--mof", "mul", "--m", "100000", "--seed", "7", "--out", path(tmp.path()),
    ]);
    let threshold: f64 = stdout.trim().parse().unwrap();
    let mut rdr = csv::Reader::from_path(tmp.path().join("distribution.csv")).unwrap();
    let values: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(values.len(), 100_000);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(values[4999], threshold);
    assert!(threshold < 0.01_f64.cbrt());
    let oracle = oracle_quantile(0.01, true, 1_000_000, 7);
    assert!((threshold - oracle).abs() <= 0.01, "{threshold} vs {oracle}");
}

#[test]
fn evaluate_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let tensor = data.join("tensor.csv");
    let labels = data.join("labels.csv");
    let mut sols = Vec::new();
    for mof in ["none", "add"] {
        let out = tmp.path().join(mof);
        ok(&[
            "mine", "--tensor", path(&tensor), "--labels", path(&labels), "--algo", "trigen", "--mof", mof, "--n",
            "4", "--generations", "10", "--population", "20", "--out", path(&out),
        ]);
        sols.push(out.join("solution.json"));
    }
    let cmp = tmp.path().join("cmp");
    ok(&["evaluate", path(&sols[0]), path(&sols[1]), "--out", path(&cmp)]);
    let text = std::fs::read_to_string(cmp.join("comparison.csv")).unwrap();
    assert!(text.starts_with("metric,a,b,t,p\n"));
    assert!(text.lines().any(|l| l.starts_with("lift,")));

    let rep = tmp.path().join("rep");
    ok(&["report", path(&sols[1]), "--profiles", "--out", path(&rep)]);
    let tri = std::fs::read_to_string(rep.join("triclusters.csv")).unwrap();
    assert_eq!(tri.lines().count(), 5);
    let prof = std::fs::read_to_string(rep.join("profiles/tricluster_0.csv")).unwrap();
    assert!(prof.starts_with("variable,context,expectation\n"));
    assert!(rep.join("summary.csv").exists());
}

#[test]
fn ingest_scales_and_reduces() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let out = tmp.path().join("ingested");
    let stdout = ok(&[
        "ingest", "--tensor", path(&data.join("tensor.csv")), "--labels", path(&data.join("labels.csv")), "--scale",
        "--paa", "6", "--out", path(&out),
    ]);
    assert!(stdout.contains("30 observations x 6 variables x 6 contexts"), "{stdout}");
    assert!(out.join("labels.csv").exists());
}
