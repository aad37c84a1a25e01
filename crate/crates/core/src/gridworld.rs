//! Random occupancy grids and planning problems.
//!
//! Environments are sampled cell-by-cell with obstacle probability `p_o`,
//! never producing a 2×2 window with two obstacles touching only at a corner. Problems place one goal and `k` starts on free cells at least
//! `d_min` apart (Euclidean, in cells).
//!
//! All randomness flows through [`ChaCha8Rng`] seeded from a `u64`, so a
//! `(GenConfig, seed)` pair reproduces the same grids on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::astar::astar_search;

/// A grid cell, `(row, col)`, 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Euclidean distance in cells.
    pub fn distance(self, other: Cell) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }

    /// True when `other` is one of the eight surrounding cells.
    pub fn is_adjacent(self, other: Cell) -> bool {
        self != other && self.row.abs_diff(other.row) <= 1 && self.col.abs_diff(other.col) <= 1
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // external notation is 1-based
        write!(f, "{{{},{}}}", self.row + 1, self.col + 1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("no valid problem found: {0}")]
    Unsatisfiable(String),
}

/// Square binary occupancy grid; `true` marks an obstacle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridMap {
    n: usize,
    cells: Vec<bool>,
}

impl GridMap {
    /// All-free `n × n` grid.
    pub fn empty(n: usize) -> Self {
        assert!(n >= 2, "grid size must be at least 2, got {n}");
        GridMap { n, cells: vec![false; n * n] }
    }

    /// Builds a grid from row-major occupancy. Forbidden diagonal windows are
    /// accepted here; the planners refuse to cut those corners.
    pub fn from_cells(n: usize, cells: Vec<bool>) -> Self {
        assert!(n >= 2, "grid size must be at least 2, got {n}");
        assert_eq!(cells.len(), n * n, "cell count does not match n*n");
        GridMap { n, cells }
    }

    /// Parses rows of `#` (obstacle) and `.` (free).
    pub fn from_ascii(rows: &[&str]) -> Self {
        let n = rows.len();
        let mut cells = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.chars().count(), n, "ascii grid must be square");
            cells.extend(row.chars().map(|c| c == '#'));
        }
        GridMap::from_cells(n, cells)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.n + cell.col
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index / self.n, index % self.n)
    }

    #[inline]
    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.n && cell.col < self.n
    }

    #[inline]
    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.cells[self.index(cell)]
    }

    #[inline]
    pub fn is_free(&self, cell: Cell) -> bool {
        !self.is_obstacle(cell)
    }

    pub fn set_obstacle(&mut self, cell: Cell, obstacle: bool) {
        let i = self.index(cell);
        self.cells[i] = obstacle;
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn free_cells(&self) -> Vec<Cell> {
        (0..self.n * self.n)
            .filter(|&i| !self.cells[i])
            .map(|i| self.cell_at(i))
            .collect()
    }

    /// Iterates the in-bounds 8-neighbours of `cell`, row-major.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let n = self.n as isize;
        let (r, c) = (cell.row as isize, cell.col as isize);
        (-1isize..=1)
            .flat_map(move |dr| (-1isize..=1).map(move |dc| (dr, dc)))
            .filter(|&(dr, dc)| dr != 0 || dc != 0)
            .map(move |(dr, dc)| (r + dr, c + dc))
            .filter(move |&(rr, cc)| rr >= 0 && cc >= 0 && rr < n && cc < n)
            .map(|(rr, cc)| Cell::new(rr as usize, cc as usize))
    }

    /// Whether a single step `from → to` between adjacent cells is allowed:
    /// both cells free and, for a diagonal, not squeezing between two
    /// obstacles that touch at the corner.
    pub fn step_allowed(&self, from: Cell, to: Cell) -> bool {
        if !from.is_adjacent(to) || self.is_obstacle(from) || self.is_obstacle(to) {
            return false;
        }
        if from.row != to.row && from.col != to.col {
            let side_a = Cell::new(from.row, to.col);
            let side_b = Cell::new(to.row, from.col);
            if self.is_obstacle(side_a) && self.is_obstacle(side_b) {
                return false;
            }
        }
        true
    }

    /// Top-left corners of 2×2 windows holding a forbidden diagonal pattern.
    pub fn forbidden_windows(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for r in 0..self.n - 1 {
            for c in 0..self.n - 1 {
                if self.window_is_forbidden(r, c) {
                    out.push(Cell::new(r, c));
                }
            }
        }
        out
    }

    fn window_is_forbidden(&self, r: usize, c: usize) -> bool {
        let tl = self.cells[r * self.n + c];
        let tr = self.cells[r * self.n + c + 1];
        let bl = self.cells[(r + 1) * self.n + c];
        let br = self.cells[(r + 1) * self.n + c + 1];
        tl == br && tr == bl && tl != tr
    }

    /// Frees one obstacle of every forbidden window until none is left.
    /// Every fix removes one obstacle, so at most `n²` fixes happen.
    pub fn repair_forbidden<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let mut fixes = 0;
        loop {
            let mut changed = false;
            for r in 0..self.n - 1 {
                for c in 0..self.n - 1 {
                    if !self.window_is_forbidden(r, c) {
                        continue;
                    }
                    // the obstacle pair is either the main or the anti diagonal
                    let pair = if self.cells[r * self.n + c] {
                        [Cell::new(r, c), Cell::new(r + 1, c + 1)]
                    } else {
                        [Cell::new(r, c + 1), Cell::new(r + 1, c)]
                    };
                    let victim = pair[rng.gen_range(0..2)];
                    self.set_obstacle(victim, false);
                    fixes += 1;
                    changed = true;
                }
            }
            if !changed {
                return fixes;
            }
        }
    }

    /// Renders as `#`/`.` rows.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.n + 1));
        for r in 0..self.n {
            for c in 0..self.n {
                s.push(if self.cells[r * self.n + c] { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

/// Parameters for environment and problem generation.
#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    /// Obstacle probability; the free probability is `1 - p_obstacle`.
    pub p_obstacle: f64,
    pub min_dist: f64,
    pub sources: usize,
    pub seed: u64,
    pub require_solvable: bool,
    /// Start/goal draws on one environment before it is regenerated.
    pub resample_attempts: usize,
    /// Environments tried before giving up with [`GenError::Unsatisfiable`].
    pub environment_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 10,
            p_obstacle: 0.6,
            min_dist: 5.0,
            sources: 1,
            seed: 0,
            require_solvable: true,
            resample_attempts: 100,
            environment_attempts: 1000,
        }
    }
}

impl GenConfig {
    pub fn with_size(n: usize) -> Self {
        GenConfig { n, ..Default::default() }
    }

    pub fn p_free(&self) -> f64 {
        1.0 - self.p_obstacle
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n < 2 {
            return Err(GenError::InvalidConfig(format!("grid size {} < 2", self.n)));
        }
        if !(0.0..=1.0).contains(&self.p_obstacle) {
            return Err(GenError::InvalidConfig(format!(
                "obstacle probability {} outside [0, 1]",
                self.p_obstacle
            )));
        }
        if !(self.min_dist >= 0.0) {
            return Err(GenError::InvalidConfig(format!("min distance {} is negative", self.min_dist)));
        }
        if self.sources == 0 {
            return Err(GenError::InvalidConfig("source count must be positive".into()));
        }
        if self.resample_attempts == 0 || self.environment_attempts == 0 {
            return Err(GenError::InvalidConfig("attempt budgets must be positive".into()));
        }
        Ok(())
    }

    fn diagonal(&self) -> f64 {
        (self.n - 1) as f64 * std::f64::consts::SQRT_2
    }
}

/// An environment with `k ≥ 1` start cells and one goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanProblem {
    pub grid: GridMap,
    pub starts: Vec<Cell>,
    pub goal: Cell,
}

impl PlanProblem {
    /// Checks placement invariants; `min_dist` is the generation-time bound.
    pub fn validate(&self, min_dist: f64) -> Result<(), String> {
        if self.starts.is_empty() {
            return Err("problem has no start".into());
        }
        for &cell in self.starts.iter().chain(std::iter::once(&self.goal)) {
            if !self.grid.in_bounds(cell) {
                return Err(format!("{cell} out of bounds"));
            }
            if self.grid.is_obstacle(cell) {
                return Err(format!("{cell} is an obstacle"));
            }
        }
        for (i, &s) in self.starts.iter().enumerate() {
            if s == self.goal {
                return Err(format!("start {s} equals goal"));
            }
            if self.starts[..i].contains(&s) {
                return Err(format!("duplicate start {s}"));
            }
            if s.distance(self.goal) < min_dist {
                return Err(format!("start {s} closer than {min_dist} to goal"));
            }
        }
        Ok(())
    }

    pub fn to_maps(&self) -> ProblemMaps {
        let n = self.grid.size();
        let env = self.grid.cells().iter().map(|&o| o as u8).collect();
        let mut start = vec![0u8; n * n];
        for &s in &self.starts {
            start[self.grid.index(s)] = 1;
        }
        let mut goal = vec![0u8; n * n];
        goal[self.grid.index(self.goal)] = 1;
        ProblemMaps { n, env, start, goal }
    }
}

/// The three binary input planes of a problem: environment, start(s), goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemMaps {
    pub n: usize,
    pub env: Vec<u8>,
    pub start: Vec<u8>,
    pub goal: Vec<u8>,
}

impl ProblemMaps {
    /// Inverse of [`PlanProblem::to_maps`]; starts come back in row-major order.
    pub fn to_problem(&self) -> Result<PlanProblem, String> {
        let nn = self.n * self.n;
        if self.env.len() != nn || self.start.len() != nn || self.goal.len() != nn {
            return Err("plane sizes do not match n*n".into());
        }
        let grid = GridMap::from_cells(self.n, self.env.iter().map(|&v| v != 0).collect());
        let starts: Vec<Cell> = (0..nn).filter(|&i| self.start[i] != 0).map(|i| grid.cell_at(i)).collect();
        let goals: Vec<Cell> = (0..nn).filter(|&i| self.goal[i] != 0).map(|i| grid.cell_at(i)).collect();
        if goals.len() != 1 {
            return Err(format!("goal map has {} cells set, expected 1", goals.len()));
        }
        Ok(PlanProblem { grid, starts, goal: goals[0] })
    }

    /// Planes as `f32` channels in `[env, start, goal]` order.
    pub fn channels(&self) -> [Vec<f32>; 3] {
        let f = |v: &Vec<u8>| v.iter().map(|&b| b as f32).collect::<Vec<f32>>();
        [f(&self.env), f(&self.start), f(&self.goal)]
    }
}

/// Samples one environment row-major. Each cell is an independent Bernoulli
/// draw, except that a cell which would complete a forbidden diagonal window
/// with its three already-sampled upper-left neighbours takes the opposite
/// value. Forced obstacles and forced free cells occur at the same rate to
/// first order, so the obstacle fraction stays close to `p_obstacle`.
pub fn generate_environment<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> GridMap {
    let n = cfg.n;
    let mut cells = vec![false; n * n];
    for r in 0..n {
        for c in 0..n {
            let drawn = rng.gen_bool(cfg.p_obstacle);
            cells[r * n + c] = if r > 0 && c > 0 {
                let tl = cells[(r - 1) * n + c - 1];
                let tr = cells[(r - 1) * n + c];
                let bl = cells[r * n + c - 1];
                if tr == bl && tl != tr {
                    tr
                } else {
                    drawn
                }
            } else {
                drawn
            };
        }
    }
    let grid = GridMap::from_cells(n, cells);
    debug_assert!(grid.forbidden_windows().is_empty());
    grid
}

/// Draws starts and goal on `grid`. With `require_solvable`, up to
/// `resample_attempts` placements are tried per environment and the
/// environment is regenerated when they all fail. Returns the problem and the
/// number of rejected draws.
pub fn sample_problem<R: Rng + ?Sized>(
    grid: &GridMap,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<(PlanProblem, u64), GenError> {
    cfg.validate()?;
    if grid.size() != cfg.n {
        return Err(GenError::InvalidConfig(format!("grid size {} != config size {}", grid.size(), cfg.n)));
    }
    if cfg.min_dist > cfg.diagonal() {
        return Err(GenError::Unsatisfiable(format!(
            "min distance {} exceeds grid diagonal {:.3}",
            cfg.min_dist,
            cfg.diagonal()
        )));
    }
    let mut rejected = 0u64;
    let mut current = grid.clone();
    for env_attempt in 0..cfg.environment_attempts {
        if env_attempt > 0 {
            current = generate_environment(cfg, rng);
        }
        let free = current.free_cells();
        if free.len() < cfg.sources + 1 {
            rejected += 1;
            continue;
        }
        for _ in 0..cfg.resample_attempts {
            match draw_placement(&current, &free, cfg, rng) {
                Some((starts, goal)) => {
                    let problem = PlanProblem { grid: current.clone(), starts, goal };
                    if !cfg.require_solvable || is_solvable(&problem) {
                        return Ok((problem, rejected));
                    }
                    rejected += 1;
                }
                None => rejected += 1,
            }
        }
    }
    Err(GenError::Unsatisfiable(format!(
        "no placement after {} environments x {} draws",
        cfg.environment_attempts, cfg.resample_attempts
    )))
}

fn draw_placement<R: Rng + ?Sized>(
    grid: &GridMap,
    free: &[Cell],
    cfg: &GenConfig,
    rng: &mut R,
) -> Option<(Vec<Cell>, Cell)> {
    let goal = *free.choose(rng)?;
    let candidates: Vec<Cell> = free
        .iter()
        .copied()
        .filter(|&c| c != goal && c.distance(goal) >= cfg.min_dist)
        .collect();
    if candidates.len() < cfg.sources {
        return None;
    }
    let starts: Vec<Cell> = candidates.choose_multiple(rng, cfg.sources).copied().collect();
    debug_assert!(starts.iter().all(|&s| grid.is_free(s)));
    Some((starts, goal))
}

fn is_solvable(problem: &PlanProblem) -> bool {
    problem
        .starts
        .iter()
        .all(|&s| astar_search(&problem.grid, s, problem.goal).0.is_ok())
}

/// Corner starts `{1,1}`, `{1,n}`, `{n,1}` (1-based) and the centre goal.
pub fn fixed_layout(n: usize) -> (Vec<Cell>, Cell) {
    let last = n - 1;
    let starts = vec![Cell::new(0, 0), Cell::new(0, last), Cell::new(last, 0)];
    (starts, Cell::new(last / 2, last / 2))
}

/// Seeded stream of environments and problems.
pub struct Generator {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    rejected: u64,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Result<Self, GenError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Generator { cfg, rng, rejected: 0 })
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    /// Draws rejected so far because of distance or solvability filtering.
    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn environment(&mut self) -> GridMap {
        generate_environment(&self.cfg, &mut self.rng)
    }

    pub fn problem(&mut self) -> Result<PlanProblem, GenError> {
        let grid = self.environment();
        let (problem, rejected) = sample_problem(&grid, &self.cfg, &mut self.rng)?;
        self.rejected += rejected;
        Ok(problem)
    }

    /// Problem with the fixed three-corner layout; only the environment is
    /// random. The layout cells are forced free and the grid re-repaired.
    /// With `require_solvable`, every start must reach the goal; at
    /// `p_o = 0.6` on 15×15 roughly one environment in 1,100 qualifies.
    pub fn fixed_layout_problem(&mut self) -> Result<PlanProblem, GenError> {
        let n = self.cfg.n;
        if n < 3 {
            return Err(GenError::InvalidConfig("fixed layout needs n >= 3".into()));
        }
        let (starts, goal) = fixed_layout(n);
        // only the environment varies, so it gets the whole draw budget
        let budget = self.cfg.environment_attempts * self.cfg.resample_attempts;
        for _ in 0..budget {
            let mut grid = self.environment();
            for &c in starts.iter().chain(std::iter::once(&goal)) {
                grid.set_obstacle(c, false);
            }
            grid.repair_forbidden(&mut self.rng);
            let problem = PlanProblem { grid, starts: starts.clone(), goal };
            if !self.cfg.require_solvable || is_solvable(&problem) {
                return Ok(problem);
            }
            self.rejected += 1;
        }
        Err(GenError::Unsatisfiable(format!("no solvable fixed-layout environment after {budget} attempts")))
    }
}
