//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use gridfcn::netinfer::{Layer, LayerKind};
use gridfcn::{Cell, Cost, GenConfig, Generator, GridMap, NetworkWeights, PlanProblem};

/// Plain Dijkstra over the full 8-connected graph, no heuristic. Keys are
/// exact `(straight, diagonal)` costs ordered through `Cost`'s exact
/// comparison. Returns the cost of every cell reachable from `source`.
pub fn dijkstra_all(grid: &GridMap, source: Cell) -> Vec<Option<Cost>> {
    let n = grid.size();
    let mut dist: Vec<Option<Cost>> = vec![None; n * n];
    let mut done = vec![false; n * n];
    let mut heap = BinaryHeap::new();
    dist[source.row * n + source.col] = Some(Cost::ZERO);
    heap.push(Reverse((Cost::ZERO, source.row, source.col)));
    while let Some(Reverse((d, r, c))) = heap.pop() {
        let i = r * n + c;
        if done[i] {
            continue;
        }
        done[i] = true;
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= n as i64 || nc >= n as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if grid.cells()[nr * n + nc] {
                    continue;
                }
                let diagonal = dr != 0 && dc != 0;
                if diagonal && grid.cells()[r * n + nc] && grid.cells()[nr * n + c] {
                    continue;
                }
                let step = if diagonal { Cost::new(0, 1) } else { Cost::new(1, 0) };
                let nd = d + step;
                let j = nr * n + nc;
                if dist[j].map_or(true, |old| nd < old) {
                    dist[j] = Some(nd);
                    heap.push(Reverse((nd, nr, nc)));
                }
            }
        }
    }
    dist
}

pub fn dijkstra_cost(grid: &GridMap, start: Cell, goal: Cell) -> Option<Cost> {
    dijkstra_all(grid, start)[goal.row * grid.size() + goal.col]
}

/// `count` solvable single-start problems of size `n`.
pub fn problems(n: usize, count: usize, seed: u64) -> Vec<PlanProblem> {
    let mut g = Generator::new(GenConfig { n, seed, ..Default::default() }).unwrap();
    (0..count).map(|_| g.problem().unwrap()).collect()
}

/// Brute-force scan for forbidden 2×2 diagonal windows.
pub fn count_forbidden(grid: &GridMap) -> usize {
    let n = grid.size();
    let at = |r: usize, c: usize| grid.cells()[r * n + c];
    let mut count = 0;
    for r in 0..n - 1 {
        for c in 0..n - 1 {
            let (a, b, d, e) = (at(r, c), at(r, c + 1), at(r + 1, c), at(r + 1, c + 1));
            if (a && e && !b && !d) || (b && d && !a && !e) {
                count += 1;
            }
        }
    }
    count
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Two-layer network whose output can be written down by hand.
///
/// conv 3→2:  h0 = env (centre tap), h1 = relu(Σ3×3 goal + 0.5·start − 0.75)
///            (bias −0.5, BN γ=2 β=0.25 μ=0.5 σ²=4 ⇒ scale 1, shift −0.25)
/// deconv 2→1: taps W[c0](0,0)=1, W[c1](1,1)=−1, W[c1](0,2)=0.5, bias 0.1,
///            BN γ=0.5 ⇒ out = σ(0.5·(h0[y+1][x+1] − h1[y][x] + 0.5·h1[y+1][x−1] + 0.1))
pub fn hand_fixture() -> NetworkWeights {
    let mut l1 = Layer::new(LayerKind::ConvBnRelu, 3, 2, 3, 3);
    let k = |o: usize, c: usize, ky: usize, kx: usize| ((o * 3 + c) * 3 + ky) * 3 + kx;
    l1.kernel[k(0, 0, 1, 1)] = 1.0;
    for ky in 0..3 {
        for kx in 0..3 {
            l1.kernel[k(1, 2, ky, kx)] = 1.0;
        }
    }
    l1.kernel[k(1, 1, 1, 1)] = 0.5;
    l1.bias[1] = -0.5;
    l1.gamma[1] = 2.0;
    l1.beta[1] = 0.25;
    l1.mean[1] = 0.5;
    l1.var[1] = 4.0;

    let mut l2 = Layer::new(LayerKind::DeconvBnSigmoid, 2, 1, 3, 3);
    let k2 = |c: usize, ky: usize, kx: usize| (c * 3 + ky) * 3 + kx;
    l2.kernel[k2(0, 0, 0)] = 1.0;
    l2.kernel[k2(1, 1, 1)] = -1.0;
    l2.kernel[k2(1, 0, 2)] = 0.5;
    l2.bias[0] = 0.1;
    l2.gamma[0] = 0.5;
    NetworkWeights::new(vec![l1, l2]).unwrap()
}

pub fn fixture_problem() -> PlanProblem {
    let mut grid = GridMap::empty(5);
    grid.set_obstacle(Cell::new(1, 1), true);
    grid.set_obstacle(Cell::new(3, 2), true);
    PlanProblem { grid, starts: vec![Cell::new(0, 0)], goal: Cell::new(2, 3) }
}

/// Closed-form output of `hand_fixture` on `fixture_problem`.
pub fn analytic_output() -> Vec<f64> {
    let p = fixture_problem();
    let n = 5i64;
    let get = |m: &dyn Fn(i64, i64) -> f64, y: i64, x: i64| if y < 0 || x < 0 || y >= n || x >= n { 0.0 } else { m(y, x) };
    let env = |y: i64, x: i64| p.grid.is_obstacle(Cell::new(y as usize, x as usize)) as u8 as f64;
    let start = |y: i64, x: i64| (Cell::new(y as usize, x as usize) == p.starts[0]) as u8 as f64;
    let goal = |y: i64, x: i64| (Cell::new(y as usize, x as usize) == p.goal) as u8 as f64;
    let h0 = |y: i64, x: i64| env(y, x).max(0.0);
    let h1 = |y: i64, x: i64| {
        let mut s = 0.0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                s += get(&goal, y + dy, x + dx);
            }
        }
        (s + 0.5 * start(y, x) - 0.75).max(0.0)
    };
    let mut out = Vec::new();
    for y in 0..n {
        for x in 0..n {
            let s = get(&h0, y + 1, x + 1) - get(&h1, y, x) + 0.5 * get(&h1, y + 1, x - 1) + 0.1;
            out.push(sigmoid(0.5 * s));
        }
    }
    out
}

