//! Renders a problem with its A* path, a value map and the reconstructed path.
//!
//!     cargo run --example render_svg -- out.svg

use gridfcn::dataio::{render_problem, Overlays};
use gridfcn::{astar_search, reconstruct_path, GenConfig, Generator, ReconstructionConfig, ValueMap};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "problem.svg".into());
    let mut g = Generator::new(GenConfig { seed: 12, ..GenConfig::with_size(15) }).unwrap();
    let p = g.problem().unwrap();
    let oracle = astar_search(&p.grid, p.starts[0], p.goal).0.unwrap();

    // graded map: path cells 1.0, their free neighbours 0.3
    let n = p.grid.size();
    let mut vm = ValueMap::from_mask(n, &oracle.mask(n));
    for &c in oracle.cells() {
        for nb in p.grid.neighbors(c) {
            if p.grid.is_free(nb) && vm.get(nb.row, nb.col) == 0.0 {
                vm.set(nb.row, nb.col, 0.3);
            }
        }
    }
    let recon = reconstruct_path(&p.grid, &vm, p.starts[0], p.goal, &ReconstructionConfig::default());
    let recon: Vec<_> = recon.path.into_iter().collect();

    let svg = render_problem(&p, &Overlays { oracle: std::slice::from_ref(&oracle), value_map: Some(&vm), reconstructed: &recon });
    std::fs::write(&out, svg).unwrap();
    println!("wrote {out}");
}
