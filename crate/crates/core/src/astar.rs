//! Optimal 8-connected A* with exact path costs.
//!
//! Axis steps cost 1 and diagonal steps √2. Costs are carried as the integer
//! pair `(straight, diagonal)` so optimality checks never depend on float
//! rounding. The heuristic is the Euclidean distance to the goal, which is
//! admissible and consistent for these step costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridworld::{Cell, GridMap};

/// Exact path cost `straight + diagonal·√2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cost {
    pub straight: u32,
    pub diagonal: u32,
}

impl Cost {
    pub const ZERO: Cost = Cost { straight: 0, diagonal: 0 };

    pub const fn new(straight: u32, diagonal: u32) -> Self {
        Cost { straight, diagonal }
    }

    pub fn value(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn steps(self) -> u32 {
        self.straight + self.diagonal
    }

    /// Cost of a single step between adjacent cells.
    pub fn step(from: Cell, to: Cell) -> Cost {
        if from.row != to.row && from.col != to.col {
            Cost::new(0, 1)
        } else {
            Cost::new(1, 0)
        }
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost::new(self.straight + rhs.straight, self.diagonal + rhs.diagonal)
    }
}

impl Ord for Cost {
    /// Sign of `da + db·√2`, decided with integer arithmetic.
    fn cmp(&self, other: &Self) -> Ordering {
        let da = self.straight as i64 - other.straight as i64;
        let db = self.diagonal as i64 - other.diagonal as i64;
        match (da.signum(), db.signum()) {
            (0, s) | (s, 0) => s.cmp(&0),
            (1, 1) => Ordering::Greater,
            (-1, -1) => Ordering::Less,
            // opposite signs: compare |da| with |db|·√2 by squaring
            (sa, _) => {
                let lhs = da * da;
                let rhs = 2 * db * db;
                // lhs != rhs because √2 is irrational
                if sa > 0 {
                    lhs.cmp(&rhs)
                } else {
                    rhs.cmp(&lhs)
                }
            }
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Cost {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+{}√2", self.straight, self.diagonal)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path is empty")]
    Empty,
    #[error("cell {0} is outside the grid or an obstacle")]
    BlockedCell(Cell),
    #[error("step {0} -> {1} is not a legal 8-connected move")]
    IllegalStep(Cell, Cell),
}

/// Ordered cells from start to goal with their exact cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    cells: Vec<Cell>,
    cost: Cost,
}

impl Path {
    /// Validates `cells` against `grid` and computes the cost.
    pub fn new(grid: &GridMap, cells: Vec<Cell>) -> Result<Self, PathError> {
        let first = *cells.first().ok_or(PathError::Empty)?;
        if !grid.in_bounds(first) || grid.is_obstacle(first) {
            return Err(PathError::BlockedCell(first));
        }
        let mut cost = Cost::ZERO;
        for w in cells.windows(2) {
            if !grid.in_bounds(w[1]) || grid.is_obstacle(w[1]) {
                return Err(PathError::BlockedCell(w[1]));
            }
            if !grid.step_allowed(w[0], w[1]) {
                return Err(PathError::IllegalStep(w[0], w[1]));
            }
            cost = cost + Cost::step(w[0], w[1]);
        }
        Ok(Path { cells, cost })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cost(&self) -> Cost {
        self.cost
    }

    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn goal(&self) -> Cell {
        *self.cells.last().unwrap()
    }

    /// Number of moves.
    pub fn steps(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn reversed(&self) -> Path {
        let mut cells = self.cells.clone();
        cells.reverse();
        Path { cells, cost: self.cost }
    }

    /// Binary mask with ones on the path cells.
    pub fn mask(&self, n: usize) -> Vec<u8> {
        let mut m = vec![0u8; n * n];
        for c in &self.cells {
            m[c.row * n + c.col] = 1;
        }
        m
    }
}

/// Sum of Euclidean step lengths along the path.
pub fn path_length(path: &Path) -> f64 {
    path.cells
        .windows(2)
        .map(|w| w[0].distance(w[1]))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no path between start and goal")]
pub struct NotFound;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    /// Search time only; walking the parent links is excluded.
    pub wall_time: Duration,
    pub path_steps: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct OpenEntry {
    f: f64,
    g: Cost,
    index: usize,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // BinaryHeap is a max-heap: "greater" pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.cmp(&other.g))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost path from `start` to `goal`. Open-list ties break on lower
/// f, then higher g, then row-major cell order.
pub fn astar_search(grid: &GridMap, start: Cell, goal: Cell) -> (Result<Path, NotFound>, SearchStats) {
    let mut stats = SearchStats::default();
    if !grid.in_bounds(start) || !grid.in_bounds(goal) || grid.is_obstacle(start) || grid.is_obstacle(goal) {
        return (Err(NotFound), stats);
    }
    let timer = Instant::now();
    let nn = grid.size() * grid.size();
    let mut best: Vec<Option<Cost>> = vec![None; nn];
    let mut parent: Vec<usize> = vec![usize::MAX; nn];
    let mut closed = vec![false; nn];
    let mut open = BinaryHeap::new();

    let start_i = grid.index(start);
    let goal_i = grid.index(goal);
    best[start_i] = Some(Cost::ZERO);
    open.push(OpenEntry { f: start.distance(goal), g: Cost::ZERO, index: start_i });

    let mut reached = false;
    while let Some(OpenEntry { g, index, .. }) = open.pop() {
        if closed[index] || best[index] != Some(g) {
            continue;
        }
        closed[index] = true;
        stats.expanded += 1;
        if index == goal_i {
            reached = true;
            break;
        }
        let cell = grid.cell_at(index);
        for next in grid.neighbors(cell) {
            if !grid.step_allowed(cell, next) {
                continue;
            }
            let ni = grid.index(next);
            if closed[ni] {
                continue;
            }
            let ng = g + Cost::step(cell, next);
            if best[ni].map_or(true, |old| ng < old) {
                best[ni] = Some(ng);
                parent[ni] = index;
                open.push(OpenEntry { f: ng.value() + next.distance(goal), g: ng, index: ni });
            }
        }
    }
    stats.wall_time = timer.elapsed();
    if !reached {
        return (Err(NotFound), stats);
    }

    let mut cells = vec![goal];
    let mut at = goal_i;
    while at != start_i {
        at = parent[at];
        cells.push(grid.cell_at(at));
    }
    cells.reverse();
    let path = Path { cost: best[goal_i].unwrap(), cells };
    debug_assert_eq!(Path::new(grid, path.cells.clone()).map(|p| p.cost), Ok(path.cost));
    stats.path_steps = path.steps();
    (Ok(path), stats)
}
