//! Success rate, optimality and length ratio for perfect and degraded value
//! maps, single and multi-source.
//!
//!     cargo run --release --example evaluate_metrics

use gridfcn::evalharness::{evaluate_multi, evaluate_single};
use gridfcn::{astar_search, GenConfig, Generator, PlanProblem, ReconstructionConfig, ValueMap};
use rand::{Rng, SeedableRng};

fn truth(p: &PlanProblem) -> ValueMap {
    let n = p.grid.size();
    let mut mask = vec![0u8; n * n];
    for &s in &p.starts {
        let m = astar_search(&p.grid, s, p.goal).0.unwrap().mask(n);
        mask.iter_mut().zip(m).for_each(|(u, v)| *u |= v);
    }
    ValueMap::from_mask(n, &mask)
}

fn main() {
    let cfg = ReconstructionConfig::default();
    let mut g = Generator::new(GenConfig { seed: 21, ..GenConfig::with_size(15) }).unwrap();
    let problems: Vec<PlanProblem> = (0..300).map(|_| g.problem().unwrap()).collect();
    let perfect: Vec<ValueMap> = problems.iter().map(truth).collect();
    let r = evaluate_single(&problems, &perfect, &cfg).unwrap();
    println!("perfect maps: SR {:?} OP {:?}", r.success_rate, r.optimality_rate);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let noisy: Vec<ValueMap> = perfect
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.values_mut().iter_mut().for_each(|v| *v = 0.4 * *v + rng.gen_range(0.0..0.6));
            m
        })
        .collect();
    let r = evaluate_single(&problems, &noisy, &cfg).unwrap();
    println!(
        "noisy maps: SR {:.1} OP {:.1} LR {:.4} (95% CI {:?}, {} detours)",
        r.success_rate.unwrap(),
        r.optimality_rate.unwrap_or(0.0),
        r.length_ratio.mean.unwrap_or(1.0),
        r.length_ratio.ci95,
        r.length_ratio.samples.len()
    );

    let fixed: Vec<PlanProblem> = (0..20).map(|_| g.fixed_layout_problem().unwrap()).collect();
    let maps: Vec<ValueMap> = fixed.iter().map(truth).collect();
    let m = evaluate_multi(&fixed, &maps, &cfg).unwrap();
    println!("three starts, union truth maps: pooled SR {:?}", m.per_path.success_rate);
    for j in &m.joint {
        println!("  at least {} found: {:?}", j.at_least, j.rate);
    }
}
