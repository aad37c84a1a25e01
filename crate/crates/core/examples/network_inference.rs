//! Builds a randomly initialised network, saves and reloads it as FCNW, folds
//! batch normalisation and compares both forward passes.
//!
//!     cargo run --release --example network_inference

use gridfcn::netinfer::{fold_batchnorm, forward_maps, load_weights, save_weights};
use gridfcn::{GenConfig, Generator, NetworkWeights};
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let weights = NetworkWeights::random_reference(&mut rng);
    println!("{} layers, {} parameters", weights.layers.len(), weights.parameter_count());

    let mut bytes = Vec::new();
    save_weights(&weights, &mut bytes).unwrap();
    let reloaded = load_weights(bytes.as_slice()).unwrap();
    assert_eq!(reloaded, weights);
    println!("FCNW file: {} bytes", bytes.len());

    let folded = fold_batchnorm(&reloaded);
    let mut g = Generator::new(GenConfig::with_size(20)).unwrap();
    let maps = g.problem().unwrap().to_maps();

    let t = std::time::Instant::now();
    let a = forward_maps(&reloaded, &maps).unwrap();
    let ta = t.elapsed();
    let t = std::time::Instant::now();
    let b = forward_maps(&folded, &maps).unwrap();
    let tb = t.elapsed();
    let worst = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0f32, f32::max);
    println!("unfolded {ta:?}, folded {tb:?}, max difference {worst:.2e}");

    // one weight set, any grid size
    for n in [5, 10, 15, 20] {
        let maps = Generator::new(GenConfig { min_dist: 2.0, ..GenConfig::with_size(n) }).unwrap().problem().unwrap().to_maps();
        let out = forward_maps(&folded, &maps).unwrap();
        println!("n={n:>2}: output {}x{}", out.size(), out.size());
    }
}
