//! Times A* against a small network on 20x20 problems, fits a quadratic and a
//! line and reports where they cross.
//!
//!     cargo run --release --example runtime_study

use gridfcn::evalharness::{runtime_study, AStarPlanner, NetworkPlanner, StudyOptions};
use gridfcn::netinfer::fold_batchnorm;
use gridfcn::{GenConfig, Generator, NetworkWeights, PlanProblem};
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let weights = fold_batchnorm(&NetworkWeights::random(4, 16, 3, &mut rng));
    let mut g = Generator::new(GenConfig { seed: 2, ..GenConfig::with_size(20) }).unwrap();
    let problems: Vec<PlanProblem> = (0..200).map(|_| g.problem().unwrap()).collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let study = pool
        .install(|| {
            runtime_study(
                &problems,
                &mut AStarPlanner::default(),
                &mut NetworkPlanner { weights: &weights },
                StudyOptions::default(),
            )
        })
        .unwrap();
    println!("A* fit (s vs steps, ascending powers): {:?}", study.astar.fit);
    println!("network fit: {:?}", study.network.fit);
    match study.crossover_steps {
        Some(x) => println!("curves cross at {x:.1} steps"),
        None => println!("no positive crossover"),
    }
}
