//! Command-line front end: argument parsing and the subcommand drivers.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! corrupt input, mismatched sizes), 3 unsatisfiable generation request.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::astar::{astar_search, Path};
use crate::dataio::{read_dataset, render_problem, write_dataset, Dataset, Overlays, Sample};
use crate::evalharness::{evaluate_multi, evaluate_single, runtime_study, AStarPlanner, NetworkPlanner, StudyOptions};
use crate::gridworld::{GenConfig, GenError, Generator, PlanProblem};
use crate::netinfer::{fold_batchnorm, forward_maps, load_weights, save_weights, NetworkWeights, ValueMap};
use crate::reconstruct::{reconstruct_multi, ReconstructionConfig};

#[derive(Debug, Parser)]
#[command(name = "gridfcn", version, about = "Grid path planning with A* and fully convolutional value maps")]
pub struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppress the human-readable summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate planning problems into an FPD file.
    Gen(GenArgs),
    /// Attach A* truth masks; flag samples some start cannot reach.
    Oracle(IoArgs),
    /// Run the network on every sample and store its value maps.
    Infer(InferArgs),
    /// Reconstruct paths from stored value maps and report metrics.
    Eval(EvalArgs),
    /// Time A* against the network and fit runtime curves.
    Bench(BenchArgs),
    /// Draw one sample as SVG.
    Render(RenderArgs),
    /// Write randomly initialised network weights (FCNW).
    InitWeights(InitWeightsArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 15)]
    pub size: usize,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0.6)]
    pub p_obstacle: f64,
    /// Minimum Euclidean start-goal distance in cells.
    #[arg(long, default_value_t = 5.0)]
    pub min_dist: f64,
    #[arg(long, default_value_t = 1)]
    pub sources: usize,
    /// Three corner starts and a centre goal; ignores --sources and --min-dist.
    #[arg(long)]
    pub fixed_layout: bool,
    /// Keep problems A* cannot solve.
    #[arg(long)]
    pub allow_unsolvable: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Fold batch normalisation into the convolutions before running.
    #[arg(long)]
    pub fold: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapSource {
    /// Stored network predictions.
    Prediction,
    /// Stored truth masks (perfect predictor).
    Truth,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Evaluate every start separately and report joint rates.
    #[arg(long)]
    pub multi: bool,
    #[arg(long, value_enum, default_value_t = MapSource::Prediction)]
    pub maps: MapSource,
    /// Cells at or below this value are never stepped on.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f32,
    /// JSON report destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// 0-based sample index.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InitWeightsArgs {
    /// Convolutional layers before the output head.
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Unsatisfiable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Unsatisfiable(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Unsatisfiable(m) => write!(f, "unsatisfiable: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn data<E: std::fmt::Display>(context: &FsPath) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", context.display()))
}

fn load(path: &FsPath) -> Result<Dataset, CliError> {
    let f = fs::File::open(path).map_err(data(path))?;
    read_dataset(std::io::BufReader::new(f)).map_err(data(path))
}

fn store(path: &FsPath, ds: &Dataset) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(data(path))?;
    write_dataset(ds, std::io::BufWriter::new(f)).map_err(data(path))
}

fn load_net(path: &FsPath) -> Result<NetworkWeights, CliError> {
    let f = fs::File::open(path).map_err(data(path))?;
    load_weights(std::io::BufReader::new(f)).map_err(data(path))
}

fn write_json(path: &FsPath, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(data(path))?;
    fs::write(path, text + "\n").map_err(data(path))
}

/// Runs a parsed command line and returns the text meant for stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, as when run twice in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, cli.seed),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Infer(a) => cmd_infer(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Render(a) => cmd_render(&a),
        Command::InitWeights(a) => cmd_init_weights(&a, cli.seed),
    }
}

pub fn cmd_gen(a: &GenArgs, seed: u64) -> Result<String, CliError> {
    let cfg = GenConfig {
        n: a.size,
        p_obstacle: a.p_obstacle,
        min_dist: a.min_dist,
        sources: if a.fixed_layout { 3 } else { a.sources },
        seed,
        require_solvable: !a.allow_unsolvable,
        ..GenConfig::default()
    };
    let gen_err = |e: GenError| match e {
        GenError::InvalidConfig(m) => CliError::Usage(m),
        GenError::Unsatisfiable(m) => CliError::Unsatisfiable(m),
    };
    let mut g = Generator::new(cfg).map_err(gen_err)?;
    let mut ds = Dataset::new(a.size);
    for _ in 0..a.count {
        let p = if a.fixed_layout { g.fixed_layout_problem() } else { g.problem() }.map_err(gen_err)?;
        ds.samples.push(Sample::new(p));
    }
    store(&a.out, &ds)?;
    Ok(format!(
        "wrote {} problems ({}x{}) to {}, {} placements rejected",
        ds.samples.len(),
        a.size,
        a.size,
        a.out.display(),
        g.rejected()
    ))
}

/// Union of the A* paths of every start, or `None` if one is unreachable.
pub fn truth_mask(p: &PlanProblem) -> Option<Vec<u8>> {
    let n = p.grid.size();
    let mut mask = vec![0u8; n * n];
    for &s in &p.starts {
        let path = astar_search(&p.grid, s, p.goal).0.ok()?;
        for (m, v) in mask.iter_mut().zip(path.mask(n)) {
            *m |= v;
        }
    }
    Some(mask)
}

pub fn cmd_oracle(a: &IoArgs) -> Result<String, CliError> {
    let mut ds = load(&a.input)?;
    ds.samples.par_iter_mut().for_each(|s| match truth_mask(&s.problem) {
        Some(m) => {
            s.truth = Some(m);
            s.unsolvable = false;
        }
        None => {
            s.truth = None;
            s.unsolvable = true;
        }
    });
    let bad = ds.samples.iter().filter(|s| s.unsolvable).count();
    store(&a.out, &ds)?;
    Ok(format!("labelled {} samples, {bad} unsolvable", ds.samples.len()))
}

pub fn cmd_infer(a: &InferArgs) -> Result<String, CliError> {
    let mut w = load_net(&a.weights)?;
    if a.fold {
        w = fold_batchnorm(&w);
    }
    let mut ds = load(&a.input)?;
    let preds: Result<Vec<ValueMap>, _> =
        ds.samples.par_iter().map(|s| forward_maps(&w, &s.problem.to_maps())).collect();
    let preds = preds.map_err(data(&a.input))?;
    for (s, p) in ds.samples.iter_mut().zip(preds) {
        s.prediction = Some(p);
    }
    store(&a.out, &ds)?;
    Ok(format!("predicted {} value maps", ds.samples.len()))
}

fn value_maps(ds: &Dataset, source: MapSource) -> Result<Vec<ValueMap>, CliError> {
    ds.samples
        .iter()
        .enumerate()
        .map(|(i, s)| match source {
            MapSource::Prediction => s
                .prediction
                .clone()
                .ok_or_else(|| CliError::Data(format!("sample {i} has no prediction; run infer first"))),
            MapSource::Truth => match (&s.truth, s.unsolvable) {
                (Some(t), _) => Ok(ValueMap::from_mask(ds.n, t)),
                (None, true) => Ok(ValueMap::zeros(ds.n)),
                (None, false) => Err(CliError::Data(format!("sample {i} has no truth map; run oracle first"))),
            },
        })
        .collect()
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".into(), |v| format!("{v:.2}"))
}

pub fn cmd_eval(a: &EvalArgs) -> Result<String, CliError> {
    let ds = load(&a.input)?;
    let maps = value_maps(&ds, a.maps)?;
    let problems: Vec<PlanProblem> = ds.samples.iter().map(|s| s.problem.clone()).collect();
    let cfg = ReconstructionConfig { threshold: a.threshold, ..Default::default() };
    let (summary, report) = if a.multi {
        let r = evaluate_multi(&problems, &maps, &cfg).map_err(data(&a.input))?;
        let mut text = format!(
            "samples {} sources {} | pooled SR {} OP {}",
            r.n_samples,
            r.sources,
            fmt_rate(r.per_path.success_rate),
            fmt_rate(r.per_path.optimality_rate)
        );
        for j in &r.joint {
            text.push_str(&format!(" | >={} found {}", j.at_least, fmt_rate(j.rate)));
        }
        (text, json!({ "mode": "multi", "report": r }))
    } else {
        let r = evaluate_single(&problems, &maps, &cfg).map_err(data(&a.input))?;
        let lr = r.length_ratio.mean.map_or_else(|| "n/a".into(), |m| format!("{m:.4}"));
        let text = format!(
            "N_T {} (unsolvable {}) | SR {} OP {} LR {}",
            r.n_total,
            r.n_unsolvable,
            fmt_rate(r.success_rate),
            fmt_rate(r.optimality_rate),
            lr
        );
        (text, json!({ "mode": "single", "report": r }))
    };
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    Ok(summary)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<String, CliError> {
    let w = fold_batchnorm(&load_net(&a.weights)?);
    let ds = load(&a.input)?;
    let problems: Vec<PlanProblem> = ds.samples.into_iter().map(|s| s.problem).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Data(e.to_string()))?;
    let study = pool
        .install(|| {
            runtime_study(
                &problems,
                &mut AStarPlanner::default(),
                &mut NetworkPlanner { weights: &w },
                StudyOptions { warmup: a.warmup },
            )
        })
        .map_err(data(&a.input))?;
    if let Some(path) = &a.report {
        write_json(path, &json!(study))?;
    }
    let cross = study.crossover_steps.map_or_else(|| "none".into(), |c| format!("{c:.1} steps"));
    Ok(format!(
        "{} samples | astar fit {:?} | network fit {:?} | crossover {cross}",
        study.astar.samples.len(),
        study.astar.fit,
        study.network.fit
    ))
}

pub fn cmd_render(a: &RenderArgs) -> Result<String, CliError> {
    let ds = load(&a.input)?;
    let s = ds.samples.get(a.index).ok_or_else(|| {
        CliError::Usage(format!("index {} out of range ({} samples)", a.index, ds.samples.len()))
    })?;
    let p = &s.problem;
    let oracle: Vec<Path> = p.starts.iter().filter_map(|&st| astar_search(&p.grid, st, p.goal).0.ok()).collect();
    let recon: Vec<Path> = s
        .prediction
        .as_ref()
        .map(|m| {
            reconstruct_multi(&p.grid, m, &p.starts, p.goal, &ReconstructionConfig::default())
                .into_iter()
                .filter_map(|o| o.path)
                .collect()
        })
        .unwrap_or_default();
    let svg = render_problem(
        p,
        &Overlays { oracle: &oracle, value_map: s.prediction.as_ref(), reconstructed: &recon },
    );
    fs::write(&a.out, svg).map_err(data(&a.out))?;
    Ok(format!("rendered sample {} to {}", a.index, a.out.display()))
}

pub fn cmd_init_weights(a: &InitWeightsArgs, seed: u64) -> Result<String, CliError> {
    use rand::SeedableRng;
    if a.depth == 0 || a.width == 0 || a.kernel % 2 == 0 {
        return Err(CliError::Usage("depth and width must be positive, kernel odd".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = NetworkWeights::random(a.depth, a.width, a.kernel, &mut rng);
    let f = fs::File::create(&a.out).map_err(data(&a.out))?;
    save_weights(&w, std::io::BufWriter::new(f)).map_err(data(&a.out))?;
    Ok(format!("wrote {} parameters to {}", w.parameter_count(), a.out.display()))
}
