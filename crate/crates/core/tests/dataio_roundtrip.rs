use gridfcn::dataio::{read_dataset, write_dataset, DataError, Dataset, Sample};
use gridfcn::netinfer::NetworkWeights;
use gridfcn::{astar_search, GenConfig, Generator, ValueMap};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(seed: u64, n: usize, count: usize, k: usize) -> Dataset {
    let mut g = Generator::new(GenConfig { n, sources: k, seed, ..Default::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let samples = (0..count)
        .map(|_| {
            let p = g.problem().unwrap();
            let mut s = Sample::new(p.clone());
            if rng.gen_bool(0.5) {
                s.truth = Some(astar_search(&p.grid, p.starts[0], p.goal).0.unwrap().mask(n));
            }
            if rng.gen_bool(0.5) {
                s.prediction = Some(ValueMap::new(n, (0..n * n).map(|_| rng.gen::<f32>()).collect()));
            }
            s.unsolvable = rng.gen_bool(0.1);
            s
        })
        .collect();
    Dataset { n, samples }
}

#[test]
fn hundred_generated_samples_reserialize_identically() {
    let d = random_dataset(1, 15, 100, 1);
    let mut buf = Vec::new();
    write_dataset(&d, &mut buf).unwrap();
    let back = read_dataset(buf.as_slice()).unwrap();
    assert_eq!(back, d);
    let mut again = Vec::new();
    write_dataset(&back, &mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn truncation_is_detected() {
    let bytes = random_dataset(2, 10, 3, 2).to_bytes().unwrap();
    for cut in [0, 5, 15, bytes.len() / 2, bytes.len() - 1] {
        assert!(Dataset::from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fpd_read_write_identity(seed in any::<u64>(), n in 6usize..14, count in 0usize..6, k in 1usize..4) {
        let d = random_dataset(seed, n, count, k);
        let bytes = d.to_bytes().unwrap();
        prop_assert_eq!(Dataset::from_bytes(&bytes).unwrap(), d);
    }

    #[test]
    fn fpd_single_byte_corruption_detected(seed in any::<u64>(), pos in any::<prop::sample::Index>(), flip in 1u8..=255) {
        let bytes = random_dataset(seed, 8, 2, 1).to_bytes().unwrap();
        let mut bad = bytes.clone();
        let i = pos.index(bad.len());
        bad[i] ^= flip;
        let checksum_error = matches!(Dataset::from_bytes(&bad), Err(DataError::Checksum { .. }));
        prop_assert!(checksum_error);
    }

    #[test]
    fn fcnw_read_write_identity(seed in any::<u64>(), depth in 0usize..3, width in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = NetworkWeights::random(depth, width, 3, &mut rng);
        let bytes = w.to_bytes();
        let back = NetworkWeights::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert_eq!(back, w);
    }
}
