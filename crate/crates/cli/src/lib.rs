//! Command-line pipeline: ingest, synth, recalibrate, mine, evaluate, report.

pub mod config;

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tricluster::evaluation::{metric_values, summarize_solution, welch_t_test, METRICS};
use tricluster::mof::{recalibrate_threshold, sample_mof_distribution};
use tricluster::tensor::{load_labels, load_tensor_csv, min_max_scale, paa, save_tensor_csv, write_labels_csv};
use tricluster::trigen::run_trigen;
use tricluster::trimax::run_trimax;
use tricluster::{synthetic, Algorithm, Dataset64, MofMode, QualityMeasure, Solution64};

use crate::config::{Manifest, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "tricluster", version, about = "Discriminative and significant triclustering of three-way tensors")]
pub struct Cli {
    /// JSON run configuration (a manifest.json from an earlier run also works).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a long-form tensor and labels, preprocess, and write them back normalized.
    Ingest(IngestArgs),
    /// Generate a tensor with a planted tricluster.
    Synth(SynthArgs),
    /// Recalibrate an objective threshold by Monte-Carlo sampling.
    Recalibrate(RecalibrateArgs),
    /// Mine triclusters.
    Mine(MineArgs),
    /// Compare two solutions metric by metric.
    Evaluate(EvaluateArgs),
    /// Summarize a solution and export pattern profiles.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Long-form CSV with obs, var, ctx and value columns.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    /// CSV with obs and label columns.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Min-max scale each variable.
    #[arg(long)]
    pub scale: bool,
    /// Reduce the context axis to this many windows.
    #[arg(long)]
    pub paa: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tensor dimensions, e.g. 50,8,60.
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<[usize; 3]>,
    /// Planted block dimensions, e.g. 15,4,20.
    #[arg(long, value_parser = parse_dims)]
    pub block: Option<[usize; 3]>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub association: Option<f64>,
    #[arg(long)]
    pub outcomes: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<usize>| format!("expected three sizes, got {}", v.len()))
}

#[derive(Debug, Args)]
pub struct RecalibrateArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub mof: Option<MofMode>,
    /// Number of Monte-Carlo samples.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub algo: Option<Algorithm>,
    #[arg(long)]
    pub pqc: Option<QualityMeasure>,
    #[arg(long)]
    pub mof: Option<MofMode>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of triclusters (at most, for trimax).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub solution: PathBuf,
    /// Also write one profile CSV per tricluster.
    #[arg(long)]
    pub profiles: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn apply_data(cfg: &mut RunConfig, data: &DataArgs) {
    if data.tensor.is_some() {
        cfg.data.tensor = data.tensor.clone();
    }
    if data.labels.is_some() {
        cfg.data.labels = data.labels.clone();
    }
    cfg.preprocess.scale |= data.scale;
    if data.paa.is_some() {
        cfg.preprocess.paa = data.paa;
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Loads the configured tensor and labels and applies preprocessing.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset64> {
    let Some(path) = &cfg.data.tensor else {
        bail!("no tensor given (use --tensor or data.tensor in the config)");
    };
    let mut d: Dataset64 = load_tensor_csv(path, &cfg.data.layout)?;
    if let Some(lp) = &cfg.data.labels {
        let labels = load_labels(lp, d.observation_ids())?;
        d = d.with_labels(labels.into_iter().map(|c| c.0).collect())?;
    }
    if cfg.preprocess.scale {
        d = min_max_scale(&d);
    }
    if let Some(t) = cfg.preprocess.paa {
        d = paa(&d, t)?;
    }
    Ok(d)
}

fn write_dataset(d: &Dataset64, dir: &Path) -> Result<()> {
    save_tensor_csv(dir.join("tensor.csv"), d)?;
    if let Some(labels) = d.labels() {
        write_labels_csv(File::create(dir.join("labels.csv"))?, d.observation_ids(), labels)?;
    }
    Ok(())
}

fn ingest(mut cfg: RunConfig, args: &IngestArgs) -> Result<()> {
    apply_data(&mut cfg, &args.data);
    cfg.out = Some(args.out.clone());
    let d = load_dataset(&cfg)?;
    prepare_out(&args.out)?;
    write_dataset(&d, &args.out)?;
    Manifest::new("ingest", &cfg).write(&args.out)?;
    let [n, m, p] = d.dims();
    println!("{n} observations x {m} variables x {p} contexts");
    Ok(())
}

fn synth(mut cfg: RunConfig, args: &SynthArgs) -> Result<()> {
    let s = &mut cfg.synth;
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    if let Some(d) = args.dims {
        s.dims = d;
    }
    if let Some(b) = args.block {
        s.block_dims = b;
    }
    if let Some(x) = args.noise {
        s.noise_sigma = x;
    }
    if let Some(x) = args.association {
        s.label_association = x;
    }
    if let Some(x) = args.outcomes {
        s.n_outcomes = x;
    }
    cfg.out = Some(args.out.clone());
    let g = synthetic::generate::<f64>(&cfg.synth)?;
    prepare_out(&args.out)?;
    write_dataset(&g.dataset, &args.out)?;
    let mut truth = serde_json::to_string_pretty(&g.ground_truth_ids())?;
    truth.push('\n');
    fs::write(args.out.join("ground_truth.json"), truth)?;
    Manifest::new("synth", &cfg).write(&args.out)?;
    println!("planted {:?} block, target outcome {}", g.ground_truth.shape(), g.target);
    Ok(())
}

fn recalibrate(mut cfg: RunConfig, args: &RecalibrateArgs) -> Result<()> {
    let r = &mut cfg.recalibrate;
    if let Some(x) = args.delta {
        r.delta = x;
    }
    if let Some(x) = args.mof {
        r.mof.mode = x;
    }
    if let Some(x) = args.m {
        r.mof.m_samples = x;
    }
    if let Some(x) = args.seed {
        r.mof.seed = x;
    }
    cfg.out = Some(args.out.clone());
    let r = &cfg.recalibrate;
    let threshold = recalibrate_threshold(r.delta, &r.mof)?;
    let sample = sample_mof_distribution(r.delta, &r.mof)?;
    prepare_out(&args.out)?;
    let mut w = csv::Writer::from_path(args.out.join("distribution.csv"))?;
    w.write_record(["rank", "mof"])?;
    for (i, v) in sample.iter().enumerate() {
        w.write_record([(i + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Manifest::new("recalibrate", &cfg).write(&args.out)?;
    println!("{threshold}");
    Ok(())
}

/// Runs the configured search and stamps the configuration hash.
pub fn mine_solution(cfg: &RunConfig) -> Result<Solution64> {
    let d = load_dataset(cfg)?;
    let mut s = match cfg.algo {
        Algorithm::Trimax => run_trimax(&d, &cfg.trimax)?,
        Algorithm::Trigen => run_trigen(&d, &cfg.trigen)?,
    };
    s.meta.config_hash = cfg.hash();
    Ok(s)
}

fn mine(mut cfg: RunConfig, args: &MineArgs) -> Result<()> {
    apply_data(&mut cfg, &args.data);
    if let Some(a) = args.algo {
        cfg.algo = a;
    }
    if let Some(m) = args.pqc {
        cfg.objective_mut().measure = m;
    }
    if let Some(m) = args.mof {
        cfg.objective_mut().mof.mode = m;
    }
    if let Some(s) = args.seed {
        *cfg.seed_mut() = s;
    }
    match cfg.algo {
        Algorithm::Trimax => {
            if let Some(x) = args.delta {
                cfg.trimax.delta = x;
            }
            if let Some(x) = args.n {
                cfg.trimax.max_triclusters = x;
            }
        }
        Algorithm::Trigen => {
            if let Some(x) = args.delta {
                cfg.trigen.delta = x;
            }
            if let Some(x) = args.n {
                cfg.trigen.n_triclusters = x;
            }
            if let Some(x) = args.generations {
                cfg.trigen.generations = x;
            }
            if let Some(x) = args.population {
                cfg.trigen.population_size = x;
            }
        }
    }
    cfg.out = Some(args.out.clone());
    let s = mine_solution(&cfg)?;
    prepare_out(&args.out)?;
    s.save(args.out.join("solution.json"))?;
    Manifest::new("mine", &cfg).write(&args.out)?;
    println!("{} triclusters", s.len());
    Ok(())
}

fn mean_std(xs: &[f64]) -> String {
    if xs.is_empty() {
        return String::new();
    }
    let (m, v) = tricluster::evaluation::mean_var(xs);
    format!("{m:.6}±{:.6}", v.sqrt())
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let a = Solution64::load(&args.a).with_context(|| format!("reading {}", args.a.display()))?;
    let b = Solution64::load(&args.b).with_context(|| format!("reading {}", args.b.display()))?;
    if a.is_empty() || b.is_empty() {
        return Err(tricluster::Error::EmptySolution.into());
    }
    prepare_out(&args.out)?;
    let mut w = csv::Writer::from_path(args.out.join("comparison.csv"))?;
    w.write_record(["metric", "a", "b", "t", "p"])?;
    for name in METRICS {
        let xa = metric_values(&a, name);
        let xb = metric_values(&b, name);
        if xa.is_empty() && xb.is_empty() {
            continue;
        }
        let (t, p) = match welch_t_test(&xa, &xb) {
            Ok((t, p)) => (t.to_string(), p.to_string()),
            Err(_) => (String::new(), String::new()),
        };
        println!("{name:>14}  {:>22}  {:>22}  t={t:<10} p={p}", mean_std(&xa), mean_std(&xb));
        w.write_record([name, &mean_std(&xa), &mean_std(&xb), &t, &p])?;
    }
    w.flush()?;
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let s = Solution64::load(&args.solution).with_context(|| format!("reading {}", args.solution.display()))?;
    let summary = summarize_solution(&s)?;
    prepare_out(&args.out)?;

    let mut w = csv::Writer::from_path(args.out.join("summary.csv"))?;
    let mut header = vec!["algo".to_string(), "pqc".into(), "mof".into(), "triclusters".into(), "dims".into()];
    let mut row = vec![
        s.meta.algo.to_string(),
        s.meta.pqc.to_string(),
        s.meta.mof_mode.to_string(),
        s.len().to_string(),
        summary.dims_label(),
    ];
    for m in &summary.metrics {
        header.push(m.name.clone());
        row.push(format!("{:.6}±{:.6}", m.mean, m.std));
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;

    let mut w = csv::Writer::from_path(args.out.join("triclusters.csv"))?;
    let mut header = vec!["index".to_string(), "shape".into(), "chosen_outcome".into()];
    header.extend(METRICS.iter().map(|m| m.to_string()));
    w.write_record(&header)?;
    for (r, t) in s.triclusters.iter().enumerate() {
        let [a, b, c] = t.shape();
        let mut row = vec![
            r.to_string(),
            format!("{a}x{b}x{c}"),
            t.chosen_outcome.as_ref().map(|o| o.to_string()).unwrap_or_default(),
        ];
        row.extend(METRICS.iter().map(|m| t.metric(m).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;

    if args.profiles {
        let dir = args.out.join("profiles");
        prepare_out(&dir)?;
        for (r, t) in s.triclusters.iter().enumerate() {
            let mut w = csv::Writer::from_path(dir.join(format!("tricluster_{r}.csv")))?;
            w.write_record(["variable", "context", "expectation"])?;
            for (var, values) in t.ids.variables.iter().zip(&t.pattern) {
                for (ctx, v) in t.ids.contexts.iter().zip(values) {
                    w.write_record([var.as_str(), ctx.as_str(), &v.to_string()])?;
                }
            }
            w.flush()?;
        }
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "{} triclusters, mean dims {}", s.len(), summary.dims_label())?;
    for m in &summary.metrics {
        writeln!(out, "{:>14}  {:.6}±{:.6}", m.name, m.mean, m.std)?;
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = base_config(&cli)?;
    match &cli.command {
        Command::Ingest(a) => ingest(cfg, a),
        Command::Synth(a) => synth(cfg, a),
        Command::Recalibrate(a) => recalibrate(cfg, a),
        Command::Mine(a) => mine(cfg, a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
    }
}

/// Name used in diagnostics: the library error variant when there is one.
pub fn error_name(e: &anyhow::Error) -> &'static str {
    e.chain()
        .find_map(|c| c.downcast_ref::<tricluster::Error>())
        .map_or("Error", |e| e.name())
}
