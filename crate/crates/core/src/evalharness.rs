//! Success rate, optimality, length ratio and runtime scaling.
//!
//! * SR = 100·N_S/N_T, the share of problems where a path was reconstructed.
//! * OP = 100·N_O/N_S, optimal paths among the successful ones. Optimality is
//!   exact equality of the `(straight, diagonal)` cost pair with A*.
//! * LR = L/L*, collected for successful non-optimal paths only; reported
//!   with its mean and a normal 95% interval `mean ± 1.96·s/√N`.
//!
//! Problems whose oracle finds no path are left out of N_T and counted
//! separately.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astar::{astar_search, Cost, Path};
use crate::gridworld::PlanProblem;
use crate::netinfer::{forward_maps, NetworkWeights, ValueMap};
use crate::reconstruct::{reconstruct_path, ReconstructionConfig};

/// Minimum samples per algorithm for a runtime fit.
pub const MIN_RUNTIME_SAMPLES: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{problems} problems but {outputs} predictions")]
    LengthMismatch { problems: usize, outputs: usize },
    #[error("problem {index} has {found} starts, expected {expected}")]
    SourceCount { index: usize, found: usize, expected: usize },
    #[error("problem {index}: value map is {map}x{map}, grid is {grid}x{grid}")]
    SizeMismatch { index: usize, map: usize, grid: usize },
    #[error("need at least {need} timing samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("degenerate fit: {0}")]
    Degenerate(String),
}

/// Outcome of one (problem, start) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub problem: usize,
    pub source: usize,
    pub found: bool,
    pub optimal: bool,
    pub length: Option<f64>,
    pub oracle_length: Option<f64>,
    pub cost: Option<Cost>,
    pub oracle_cost: Option<Cost>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthRatioStats {
    pub samples: Vec<f64>,
    pub mean: Option<f64>,
    /// `[low, high]`; needs at least two samples.
    pub ci95: Option<[f64; 2]>,
}

impl LengthRatioStats {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let (mean, ci95) = match mean_ci95(&samples) {
            Some((m, ci)) => (Some(m), ci),
            None => (None, None),
        };
        LengthRatioStats { samples, mean, ci95 }
    }
}

/// Mean and `mean ± 1.96·s/√N` (sample standard deviation).
pub fn mean_ci95(xs: &[f64]) -> Option<(f64, Option<[f64; 2]>)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Some((mean, None));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let half = 1.96 * var.sqrt() / n.sqrt();
    Some((mean, Some([mean - half, mean + half])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_total: usize,
    pub n_success: usize,
    pub n_optimal: usize,
    /// Problems skipped because the oracle found no path.
    pub n_unsolvable: usize,
    pub success_rate: Option<f64>,
    pub optimality_rate: Option<f64>,
    pub length_ratio: LengthRatioStats,
    pub records: Vec<SampleRecord>,
}

impl MetricsReport {
    /// Aggregates records; order of `records` does not affect the rates.
    pub fn from_records(records: Vec<SampleRecord>) -> Self {
        let scored: Vec<&SampleRecord> = records.iter().filter(|r| r.oracle_cost.is_some()).collect();
        let n_total = scored.len();
        let n_success = scored.iter().filter(|r| r.found).count();
        let n_optimal = scored.iter().filter(|r| r.optimal).count();
        let mut ratios: Vec<f64> = scored
            .iter()
            .filter(|r| r.found && !r.optimal)
            .map(|r| r.length.unwrap() / r.oracle_length.unwrap())
            .collect();
        // sorted so the report does not depend on sample order
        ratios.sort_by(f64::total_cmp);
        MetricsReport {
            n_total,
            n_success,
            n_optimal,
            n_unsolvable: records.len() - n_total,
            success_rate: (n_total > 0).then(|| 100.0 * n_success as f64 / n_total as f64),
            optimality_rate: (n_success > 0).then(|| 100.0 * n_optimal as f64 / n_success as f64),
            length_ratio: LengthRatioStats::from_samples(ratios),
            records,
        }
    }
}

/// Scores a candidate path (or failure) against the A* optimum.
pub fn score_path(problem_index: usize, source: usize, problem: &PlanProblem, predicted: Option<&Path>) -> SampleRecord {
    let start = problem.starts[source];
    let oracle = astar_search(&problem.grid, start, problem.goal).0.ok();
    let oracle_cost = oracle.as_ref().map(Path::cost);
    let cost = predicted.map(Path::cost);
    SampleRecord {
        problem: problem_index,
        source,
        found: predicted.is_some() && oracle.is_some(),
        optimal: oracle_cost.is_some() && cost == oracle_cost,
        length: cost.map(Cost::value),
        oracle_length: oracle_cost.map(Cost::value),
        cost,
        oracle_cost,
    }
}

/// Metrics for single-start planner outputs, one optional path per problem.
pub fn score_single(problems: &[PlanProblem], paths: &[Option<Path>]) -> Result<MetricsReport, EvalError> {
    check_lengths(problems.len(), paths.len())?;
    check_sources(problems, 1)?;
    let records = problems
        .par_iter()
        .zip(paths.par_iter())
        .enumerate()
        .map(|(i, (p, path))| score_path(i, 0, p, path.as_ref()))
        .collect();
    Ok(MetricsReport::from_records(records))
}

/// Reconstructs each value map and scores it against A*.
pub fn evaluate_single(
    problems: &[PlanProblem],
    maps: &[ValueMap],
    cfg: &ReconstructionConfig,
) -> Result<MetricsReport, EvalError> {
    check_lengths(problems.len(), maps.len())?;
    check_sources(problems, 1)?;
    check_sizes(problems, maps)?;
    let records = problems
        .par_iter()
        .zip(maps.par_iter())
        .enumerate()
        .map(|(i, (p, m))| {
            let out = reconstruct_path(&p.grid, m, p.starts[0], p.goal, cfg);
            score_path(i, 0, p, out.path.as_ref())
        })
        .collect();
    Ok(MetricsReport::from_records(records))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointRate {
    /// Samples with at least this many paths found.
    pub at_least: usize,
    pub count: usize,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiMetricsReport {
    pub sources: usize,
    pub n_samples: usize,
    /// Every (problem, start) pair pooled.
    pub per_path: MetricsReport,
    /// One report per start index.
    pub per_source: Vec<MetricsReport>,
    /// `joint[j-1]` is the share of samples with at least `j` paths found.
    pub joint: Vec<JointRate>,
}

impl MultiMetricsReport {
    /// Share of samples with all paths found.
    pub fn all_found_rate(&self) -> Option<f64> {
        self.joint.last().and_then(|j| j.rate)
    }
}

/// Multi-source evaluation: every start is reconstructed independently from
/// the shared value map and scored against its own A* path.
pub fn evaluate_multi(
    problems: &[PlanProblem],
    maps: &[ValueMap],
    cfg: &ReconstructionConfig,
) -> Result<MultiMetricsReport, EvalError> {
    check_lengths(problems.len(), maps.len())?;
    let k = problems.first().map_or(1, |p| p.starts.len());
    check_sources(problems, k)?;
    check_sizes(problems, maps)?;
    let per_problem: Vec<Vec<SampleRecord>> = problems
        .par_iter()
        .zip(maps.par_iter())
        .enumerate()
        .map(|(i, (p, m))| {
            (0..k)
                .map(|s| {
                    let out = reconstruct_path(&p.grid, m, p.starts[s], p.goal, cfg);
                    score_path(i, s, p, out.path.as_ref())
                })
                .collect()
        })
        .collect();
    Ok(multi_from_records(k, per_problem))
}

/// Builds the multi-source report from per-problem record groups.
pub fn multi_from_records(k: usize, per_problem: Vec<Vec<SampleRecord>>) -> MultiMetricsReport {
    let n_samples = per_problem.len();
    let found_counts: Vec<usize> = per_problem.iter().map(|rs| rs.iter().filter(|r| r.found).count()).collect();
    let joint = (1..=k)
        .map(|j| {
            let count = found_counts.iter().filter(|&&c| c >= j).count();
            JointRate {
                at_least: j,
                count,
                rate: (n_samples > 0).then(|| 100.0 * count as f64 / n_samples as f64),
            }
        })
        .collect();
    let per_source = (0..k)
        .map(|s| MetricsReport::from_records(per_problem.iter().map(|rs| rs[s].clone()).collect()))
        .collect();
    let per_path = MetricsReport::from_records(per_problem.into_iter().flatten().collect());
    MultiMetricsReport { sources: k, n_samples, per_path, per_source, joint }
}

fn check_lengths(problems: usize, outputs: usize) -> Result<(), EvalError> {
    if problems != outputs {
        return Err(EvalError::LengthMismatch { problems, outputs });
    }
    Ok(())
}

fn check_sources(problems: &[PlanProblem], expected: usize) -> Result<(), EvalError> {
    match problems.iter().position(|p| p.starts.len() != expected) {
        Some(index) => Err(EvalError::SourceCount { index, found: problems[index].starts.len(), expected }),
        None => Ok(()),
    }
}

fn check_sizes(problems: &[PlanProblem], maps: &[ValueMap]) -> Result<(), EvalError> {
    for (index, (p, m)) in problems.iter().zip(maps).enumerate() {
        if p.grid.size() != m.size() {
            return Err(EvalError::SizeMismatch { index, map: m.size(), grid: p.grid.size() });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// runtime study

/// Something whose planning time can be measured on a problem. `steps` is the
/// optimal path length in moves, which synthetic planners may use to fake a
/// timing profile. Implementations must time only the planning work itself.
pub trait TimedPlanner {
    fn name(&self) -> &str;
    fn time(&mut self, problem: &PlanProblem, steps: usize) -> Duration;
}

/// A* search on the first start; path extraction is not timed.
#[derive(Default)]
pub struct AStarPlanner {
    /// Expanded node counts of the most recent call.
    pub last_expanded: usize,
}

impl TimedPlanner for AStarPlanner {
    fn name(&self) -> &str {
        "astar"
    }

    fn time(&mut self, problem: &PlanProblem, _steps: usize) -> Duration {
        let (_, stats) = astar_search(&problem.grid, problem.starts[0], problem.goal);
        self.last_expanded = stats.expanded;
        stats.wall_time
    }
}

/// One forward pass; reconstruction is not timed.
pub struct NetworkPlanner<'a> {
    pub weights: &'a NetworkWeights,
}

impl TimedPlanner for NetworkPlanner<'_> {
    fn name(&self) -> &str {
        "network"
    }

    fn time(&mut self, problem: &PlanProblem, _steps: usize) -> Duration {
        let maps = problem.to_maps();
        let t = Instant::now();
        let out = forward_maps(self.weights, &maps);
        let elapsed = t.elapsed();
        std::hint::black_box(out).expect("forward pass failed during timing");
        elapsed
    }
}

/// Planner reporting a made-up duration computed from the path length.
pub struct SyntheticPlanner<F> {
    pub label: String,
    pub timing: F,
}

impl<F: FnMut(usize) -> Duration> TimedPlanner for SyntheticPlanner<F> {
    fn name(&self) -> &str {
        &self.label
    }

    fn time(&mut self, _problem: &PlanProblem, steps: usize) -> Duration {
        (self.timing)(steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingSample {
    pub problem: usize,
    pub steps: usize,
    /// Median of the repetitions, seconds.
    pub seconds: f64,
    pub raw_seconds: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmTiming {
    pub name: String,
    pub degree: usize,
    pub samples: Vec<TimingSample>,
    /// Ascending powers: `c0 + c1·x + c2·x² …`, seconds vs steps.
    pub fit: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStudy {
    pub astar: AlgorithmTiming,
    pub network: AlgorithmTiming,
    /// Smallest positive path length (steps) where the two fits intersect.
    pub crossover_steps: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct StudyOptions {
    /// Untimed calls before measuring.
    pub warmup: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions { warmup: 3 }
    }
}

/// Times both planners on every solvable problem (median of three runs per
/// sample), then fits a line to `planner_b` (the network) and a quadratic to
/// `planner_a` (A*). Path length is the optimal number of moves for the
/// first start. Run single-threaded to keep timings comparable.
pub fn runtime_study(
    problems: &[PlanProblem],
    planner_a: &mut dyn TimedPlanner,
    planner_b: &mut dyn TimedPlanner,
    opts: StudyOptions,
) -> Result<RuntimeStudy, EvalError> {
    let steps: Vec<(usize, usize)> = problems
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            astar_search(&p.grid, p.starts[0], p.goal)
                .0
                .ok()
                .map(|path| (i, path.steps()))
        })
        .collect();
    if steps.len() < MIN_RUNTIME_SAMPLES {
        return Err(EvalError::InsufficientSamples { got: steps.len(), need: MIN_RUNTIME_SAMPLES });
    }
    let a = time_planner(problems, &steps, planner_a, opts, 2)?;
    let b = time_planner(problems, &steps, planner_b, opts, 1)?;
    let crossover_steps = crossover(&a.fit, &b.fit);
    Ok(RuntimeStudy { astar: a, network: b, crossover_steps })
}

fn time_planner(
    problems: &[PlanProblem],
    steps: &[(usize, usize)],
    planner: &mut dyn TimedPlanner,
    opts: StudyOptions,
    degree: usize,
) -> Result<AlgorithmTiming, EvalError> {
    for &(i, s) in steps.iter().cycle().take(opts.warmup) {
        planner.time(&problems[i], s);
    }
    let samples: Vec<TimingSample> = steps
        .iter()
        .map(|&(i, s)| {
            let mut raw = [0f64; 3];
            for r in &mut raw {
                *r = planner.time(&problems[i], s).as_secs_f64();
            }
            let mut sorted = raw;
            sorted.sort_by(f64::total_cmp);
            TimingSample { problem: i, steps: s, seconds: sorted[1], raw_seconds: raw }
        })
        .collect();
    let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.steps as f64, s.seconds)).collect();
    let fit = fit_polynomial(&points, degree)?;
    Ok(AlgorithmTiming { name: planner.name().to_string(), degree, samples, fit })
}

fn crossover(a: &[f64], b: &[f64]) -> Option<f64> {
    let coef = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let (c0, c1, c2) = (coef(a, 0) - coef(b, 0), coef(a, 1) - coef(b, 1), coef(a, 2) - coef(b, 2));
    let mut roots = Vec::new();
    if c2.abs() < f64::EPSILON * (c0.abs() + c1.abs()).max(1e-300) {
        if c1 != 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push((-c1 - sq) / (2.0 * c2));
            roots.push((-c1 + sq) / (2.0 * c2));
        }
    }
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r > 0.0)
        .min_by(f64::total_cmp)
}

/// Least-squares polynomial fit by Householder QR. Coefficients are in
/// ascending powers.
pub fn fit_polynomial(points: &[(f64, f64)], degree: usize) -> Result<Vec<f64>, EvalError> {
    let cols = degree + 1;
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(EvalError::Degenerate("non-finite sample".into()));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < cols {
        return Err(EvalError::Degenerate(format!(
            "{} distinct abscissae for degree {degree}",
            xs.len()
        )));
    }

    // scale x into [-1, 1] to keep the Vandermonde matrix well conditioned
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let half = if half > 0.0 { half } else { 1.0 };

    let m = points.len();
    let mut a = vec![0f64; m * cols];
    let mut b: Vec<f64> = points.iter().map(|p| p.1).collect();
    for (r, p) in points.iter().enumerate() {
        let t = (p.0 - center) / half;
        let mut v = 1.0;
        for c in 0..cols {
            a[r * cols + c] = v;
            v *= t;
        }
    }
    let scaled = householder_solve(&mut a, &mut b, m, cols)?;

    // expand the polynomial in t = (x - center)/half back into powers of x
    let mut coeffs = vec![0f64; cols];
    for (j, &cj) in scaled.iter().enumerate() {
        // cj · ((x - center)/half)^j = cj/half^j · Σ_i C(j,i) x^i (-center)^(j-i)
        let factor = cj / half.powi(j as i32);
        for i in 0..=j {
            coeffs[i] += factor * binomial(j, i) * (-center).powi((j - i) as i32);
        }
    }
    Ok(coeffs)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn householder_solve(a: &mut [f64], b: &mut [f64], m: usize, n: usize) -> Result<Vec<f64>, EvalError> {
    let scale = a.iter().fold(0f64, |s, v| s.max(v.abs()));
    for k in 0..n {
        let norm = (k..m).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale.max(1.0) * (m as f64).sqrt() {
            return Err(EvalError::Degenerate(format!("rank deficient at column {k}")));
        }
        let alpha = if a[k * n + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * a[i * n + j]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    a[i * n + j] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                b[i] -= f * v[i - k];
            }
        }
    }
    let mut x = vec![0f64; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    Ok(x)
}

/// Evaluates ascending-power coefficients at `x`.
pub fn eval_polynomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Pearson correlation; `None` if either series is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
