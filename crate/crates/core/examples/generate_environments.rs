//! Samples random 15x15 problems and prints one as ASCII along with the
//! obstacle density over a larger batch.
//!
//!     cargo run --example generate_environments -- [seed]

use gridfcn::{GenConfig, Generator};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut g = Generator::new(GenConfig { seed, ..GenConfig::with_size(15) }).expect("valid config");

    let p = g.problem().expect("solvable problem");
    println!("start {}  goal {}", p.starts[0], p.goal);
    let mut art: Vec<Vec<char>> = p.grid.to_ascii().lines().map(|l| l.chars().collect()).collect();
    art[p.starts[0].row][p.starts[0].col] = 'S';
    art[p.goal.row][p.goal.col] = 'G';
    for row in art {
        println!("{}", row.into_iter().collect::<String>());
    }

    let envs: Vec<_> = (0..1000).map(|_| g.environment()).collect();
    let obstacles: usize = envs.iter().map(|e| e.obstacle_count()).sum();
    let windows: usize = envs.iter().map(|e| e.forbidden_windows().len()).sum();
    println!(
        "1000 environments: obstacle density {:.4}, forbidden 2x2 windows {windows}",
        obstacles as f64 / (1000.0 * 225.0)
    );

    let fixed = g.fixed_layout_problem().expect("fixed layout");
    println!("fixed layout starts {:?} goal {}", fixed.starts.iter().map(|c| c.to_string()).collect::<Vec<_>>(), fixed.goal);
    println!("rejected placements so far: {}", g.rejected());
}
