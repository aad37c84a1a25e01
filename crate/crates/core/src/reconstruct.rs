//! Bidirectional greedy path extraction from a value map.
//!
//! A forward head walks from the start and a backward head from the goal,
//! alternating one step each (forward first). A head moves to the legal
//! 8-neighbour with the largest remaining value and that cell is then set to
//! zero, so the map is consumed as the heads advance. Obstacles are masked
//! to zero up front and the two initial cells are consumed as well.
//!
//! The walk stops when
//!
//! 1. the forward head reaches the goal,
//! 2. the backward head reaches the start, or
//! 3. a head steps onto a cell of the other head's trail.
//!
//! Because trail cells are already consumed, a head never picks them through
//! the value argmax. Instead, before each greedy step a head checks its
//! neighbourhood for the other trail and, if it is there, steps onto the
//! trail cell closest to the other head's origin. Conditions 1 and 2 are the
//! special cases where that cell is the other origin.
//!
//! A head whose best neighbour value is `<= threshold`, or which has used up
//! its step budget, stops extending while the other head carries on. The walk
//! fails once both heads have stopped without meeting.

use serde::{Deserialize, Serialize};

use crate::astar::Path;
use crate::gridworld::{Cell, GridMap};
use crate::netinfer::ValueMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionConfig {
    /// Neighbour values at or below this end the walk as a failure.
    pub threshold: f32,
    /// Steps allowed per head; `None` means `n²`.
    pub max_steps: Option<usize>,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig { threshold: 0.0, max_steps: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopCondition {
    /// Forward head reached the goal.
    ReachedGoal,
    /// Backward head reached the start.
    ReachedStart,
    /// A head stepped onto the other head's trail.
    Crossed,
    /// Both heads stopped on neighbour values at or below the threshold.
    BelowThreshold,
    /// Both heads stopped and at least one exhausted its step budget.
    StepBudget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionOutcome {
    pub path: Option<Path>,
    pub stop: StopCondition,
    /// 1-based index on the other head's trail where the heads met (condition 3).
    pub crossing_index: Option<usize>,
    /// Extensions performed by both heads together.
    pub extensions: usize,
}

impl ReconstructionOutcome {
    pub fn found(&self) -> bool {
        self.path.is_some()
    }

    /// 1 forward head reached the goal, 2 backward head reached the start,
    /// 3 the heads crossed; `None` on failure.
    pub fn condition_number(&self) -> Option<u8> {
        match self.stop {
            StopCondition::ReachedGoal => Some(1),
            StopCondition::ReachedStart => Some(2),
            StopCondition::Crossed => Some(3),
            _ => None,
        }
    }
}

enum Step {
    Moved(Cell),
    /// Met the other trail at this 0-based index.
    Met(usize),
    Stuck(StopCondition),
}

struct Walker<'a> {
    grid: &'a GridMap,
    values: Vec<f32>,
    /// Trail owning each cell: 0 none, 1 forward, 2 backward.
    owner: Vec<u8>,
    /// Index of the cell within its trail.
    position: Vec<usize>,
    threshold: f32,
}

impl Walker<'_> {
    fn step(&mut self, trail: &[Cell], other: u8) -> Step {
        let head = *trail.last().unwrap();
        let mut meet: Option<usize> = None;
        let mut best: Option<(f32, Cell)> = None;
        for next in self.grid.neighbors(head) {
            if !self.grid.step_allowed(head, next) {
                continue;
            }
            let i = self.grid.index(next);
            if self.owner[i] == other {
                let k = self.position[i];
                if meet.map_or(true, |m| k < m) {
                    meet = Some(k);
                }
                continue;
            }
            let v = self.values[i];
            // neighbours arrive row-major, so strict > keeps the smallest (row, col) on ties
            if best.map_or(true, |(bv, _)| v > bv) {
                best = Some((v, next));
            }
        }
        if let Some(k) = meet {
            return Step::Met(k);
        }
        match best {
            Some((v, cell)) if v > self.threshold => Step::Moved(cell),
            _ => Step::Stuck(StopCondition::BelowThreshold),
        }
    }

    fn claim(&mut self, cell: Cell, owner: u8, index: usize) {
        let i = self.grid.index(cell);
        self.values[i] = 0.0;
        self.owner[i] = owner;
        self.position[i] = index;
    }
}

const FORWARD: u8 = 1;
const BACKWARD: u8 = 2;

/// Extracts a path from `start` to `goal` on a private copy of `value_map`.
pub fn reconstruct_path(
    grid: &GridMap,
    value_map: &ValueMap,
    start: Cell,
    goal: Cell,
    cfg: &ReconstructionConfig,
) -> ReconstructionOutcome {
    let n = grid.size();
    assert_eq!(value_map.size(), n, "value map and grid sizes differ");
    let max_steps = cfg.max_steps.unwrap_or(n * n).max(1);

    let failed = |stop, extensions| ReconstructionOutcome { path: None, stop, crossing_index: None, extensions };
    if grid.is_obstacle(start) || grid.is_obstacle(goal) {
        return failed(StopCondition::BelowThreshold, 0);
    }
    if start == goal {
        return ReconstructionOutcome {
            path: Path::new(grid, vec![start]).ok(),
            stop: StopCondition::ReachedGoal,
            crossing_index: None,
            extensions: 0,
        };
    }

    let values = value_map
        .values()
        .iter()
        .zip(grid.cells())
        .map(|(&v, &obstacle)| if obstacle || v.is_nan() { 0.0 } else { v })
        .collect();
    let mut walker = Walker {
        grid,
        values,
        owner: vec![0; n * n],
        position: vec![0; n * n],
        threshold: cfg.threshold,
    };
    let mut fwd = vec![start];
    let mut bwd = vec![goal];
    walker.claim(start, FORWARD, 0);
    walker.claim(goal, BACKWARD, 0);

    let mut extensions = 0;
    let mut steps = [0usize; 2];
    let mut stuck: [Option<StopCondition>; 2] = [None, None];
    loop {
        for (side, owner, other) in [(0usize, FORWARD, BACKWARD), (1, BACKWARD, FORWARD)] {
            if stuck[side].is_some() {
                continue;
            }
            if steps[side] >= max_steps {
                stuck[side] = Some(StopCondition::StepBudget);
                continue;
            }
            let (trail, other_trail) = if side == 0 { (&mut fwd, &bwd) } else { (&mut bwd, &fwd) };
            let step = walker.step(trail, other);
            extensions += 1;
            steps[side] += 1;
            match step {
                Step::Moved(cell) => {
                    trail.push(cell);
                    walker.claim(cell, owner, trail.len() - 1);
                }
                Step::Stuck(stop) => stuck[side] = Some(stop),
                Step::Met(k) => {
                    // own trail, then the other trail from the meeting cell back to its origin
                    let mut cells = trail.clone();
                    cells.extend(other_trail[..=k].iter().rev());
                    if side == 1 {
                        cells.reverse();
                    }
                    let stop = match (side, k) {
                        (0, 0) => StopCondition::ReachedGoal,
                        (1, 0) => StopCondition::ReachedStart,
                        _ => StopCondition::Crossed,
                    };
                    let path = Path::new(grid, cells).expect("reconstructed path must be valid");
                    return ReconstructionOutcome {
                        path: Some(path),
                        stop,
                        crossing_index: (stop == StopCondition::Crossed).then_some(k + 1),
                        extensions,
                    };
                }
            }
        }
        if let [Some(a), Some(b)] = stuck {
            let stop = if a == StopCondition::StepBudget || b == StopCondition::StepBudget {
                StopCondition::StepBudget
            } else {
                StopCondition::BelowThreshold
            };
            return failed(stop, extensions);
        }
    }
}

/// One independent reconstruction per start, each on its own copy of the map.
pub fn reconstruct_multi(
    grid: &GridMap,
    value_map: &ValueMap,
    starts: &[Cell],
    goal: Cell,
    cfg: &ReconstructionConfig,
) -> Vec<ReconstructionOutcome> {
    starts
        .iter()
        .map(|&s| reconstruct_path(grid, value_map, s, goal, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astar::{astar_search, Cost};

    #[test]
    fn straight_mask_meets_in_the_middle() {
        let g = GridMap::empty(10);
        let path = Path::new(&g, (0..6).map(|c| Cell::new(0, c)).collect()).unwrap();
        let vm = ValueMap::from_mask(10, &path.mask(10));
        let out = reconstruct_path(&g, &vm, Cell::new(0, 0), Cell::new(0, 5), &Default::default());
        let p = out.path.clone().expect("found");
        assert_eq!(p.cost(), Cost::new(5, 0));
        assert_eq!(p.cells(), path.cells());
        assert_eq!(out.stop, StopCondition::Crossed);
        assert_eq!(out.condition_number(), Some(3));
        // backward trail is {1,6},{1,5},{1,4}; the forward head at {1,3} meets {1,4}
        assert_eq!(out.crossing_index, Some(3));
    }

    #[test]
    fn zero_map_fails_immediately() {
        let g = GridMap::empty(10);
        let out = reconstruct_path(&g, &ValueMap::zeros(10), Cell::new(0, 0), Cell::new(0, 5), &Default::default());
        assert!(!out.found());
        assert_eq!(out.stop, StopCondition::BelowThreshold);
        // each head fails its first extension
        assert_eq!(out.extensions, 2);
    }

    #[test]
    fn adjacent_goal_is_condition_one() {
        let g = GridMap::empty(5);
        let out = reconstruct_path(&g, &ValueMap::zeros(5), Cell::new(2, 2), Cell::new(2, 3), &Default::default());
        assert_eq!(out.stop, StopCondition::ReachedGoal);
        assert_eq!(out.path.unwrap().cost(), Cost::new(1, 0));
    }

    #[test]
    fn backward_reaching_start_is_condition_two() {
        // a brighter decoy trail pulls the forward head away from the goal
        let g = GridMap::empty(7);
        let mut vm = ValueMap::zeros(7);
        for (r, c) in [(2, 0), (1, 0), (0, 0), (0, 1), (0, 2), (0, 3)] {
            vm.set(r, c, 0.9);
        }
        for c in 2..5 {
            vm.set(3, c, 0.8);
        }
        let out = reconstruct_path(&g, &vm, Cell::new(3, 1), Cell::new(3, 5), &Default::default());
        assert_eq!(out.stop, StopCondition::ReachedStart);
        assert_eq!(out.condition_number(), Some(2));
        let p = out.path.unwrap();
        assert_eq!(p.cells(), (1..6).map(|c| Cell::new(3, c)).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn step_budget_stops_walk() {
        let g = GridMap::empty(10);
        let vm = ValueMap::new(10, vec![0.5; 100]);
        let cfg = ReconstructionConfig { threshold: 0.0, max_steps: Some(1) };
        let out = reconstruct_path(&g, &vm, Cell::new(0, 0), Cell::new(9, 9), &cfg);
        assert_eq!(out.stop, StopCondition::StepBudget);
        assert!(out.extensions <= 2);
    }

    #[test]
    fn input_map_is_not_mutated() {
        let g = GridMap::from_ascii(&["..#..", ".....", ".....", ".....", "....."]);
        let vm = ValueMap::new(5, (0..25).map(|i| i as f32 / 25.0).collect());
        let before = vm.clone();
        let _ = reconstruct_path(&g, &vm, Cell::new(0, 0), Cell::new(4, 4), &Default::default());
        assert_eq!(vm, before);
    }

    #[test]
    fn astar_mask_round_trip_with_obstacles() {
        let g = GridMap::from_ascii(&[
            "........",
            ".####...",
            "....#...",
            "##..#.#.",
            "....#...",
            ".##.###.",
            "........",
            "...#....",
        ]);
        let (s, t) = (Cell::new(0, 0), Cell::new(4, 5));
        let (p, _) = astar_search(&g, s, t);
        let p = p.unwrap();
        let vm = ValueMap::from_mask(8, &p.mask(8));
        let out = reconstruct_path(&g, &vm, s, t, &Default::default());
        assert_eq!(out.path.unwrap().cost(), p.cost());
    }

    #[test]
    fn multi_uses_independent_copies() {
        let g = GridMap::empty(9);
        let goal = Cell::new(4, 4);
        let starts = [Cell::new(0, 0), Cell::new(0, 8), Cell::new(8, 0)];
        let mut mask = vec![0u8; 81];
        for &s in &starts {
            let p = astar_search(&g, s, goal).0.unwrap();
            for (m, v) in mask.iter_mut().zip(p.mask(9)) {
                *m |= v;
            }
        }
        let vm = ValueMap::from_mask(9, &mask);
        let outs = reconstruct_multi(&g, &vm, &starts, goal, &Default::default());
        assert_eq!(outs.len(), 3);
        assert!(outs.iter().all(|o| o.found()));
        let single = reconstruct_path(&g, &vm, starts[1], goal, &Default::default());
        assert_eq!(outs[1], single);
    }
}
