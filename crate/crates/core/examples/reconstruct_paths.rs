//! Path extraction from value maps: an exact A* mask, a noisy copy of it and
//! the three-start layout sharing one map.
//!
//!     cargo run --example reconstruct_paths

use gridfcn::{astar_search, reconstruct_multi, reconstruct_path, GenConfig, Generator, ReconstructionConfig, ValueMap};
use rand::{Rng, SeedableRng};

fn main() {
    let cfg = ReconstructionConfig::default();
    let mut g = Generator::new(GenConfig { seed: 3, ..GenConfig::with_size(15) }).unwrap();
    let p = g.problem().unwrap();
    let n = p.grid.size();
    let oracle = astar_search(&p.grid, p.starts[0], p.goal).0.unwrap();

    let exact = ValueMap::from_mask(n, &oracle.mask(n));
    let out = reconstruct_path(&p.grid, &exact, p.starts[0], p.goal, &cfg);
    println!(
        "exact mask: {:?} via condition {:?}, cost {} (A* {})",
        out.stop,
        out.condition_number(),
        out.path.as_ref().unwrap().cost(),
        oracle.cost()
    );

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut noisy = exact.clone();
    for v in noisy.values_mut() {
        *v = 0.5 * *v + rng.gen_range(0.0..0.5);
    }
    let out = reconstruct_path(&p.grid, &noisy, p.starts[0], p.goal, &cfg);
    match &out.path {
        Some(path) => println!("noisy map: {} moves, cost {} ({:?})", path.steps(), path.cost(), out.stop),
        None => println!("noisy map: failed ({:?})", out.stop),
    }

    let fixed = g.fixed_layout_problem().unwrap();
    let mut union = vec![0u8; n * n];
    for &s in &fixed.starts {
        let m = astar_search(&fixed.grid, s, fixed.goal).0.unwrap().mask(n);
        union.iter_mut().zip(m).for_each(|(u, v)| *u |= v);
    }
    let outs = reconstruct_multi(&fixed.grid, &ValueMap::from_mask(n, &union), &fixed.starts, fixed.goal, &cfg);
    for (s, o) in fixed.starts.iter().zip(&outs) {
        println!("start {s}: found {} ({:?})", o.found(), o.stop);
    }
}
