//! Writes a labelled FPD dataset, reads it back and shows that a flipped byte
//! is caught by the checksum.
//!
//!     cargo run --example dataset_io

use gridfcn::dataio::{read_dataset, write_dataset, Dataset, DataError, Sample};
use gridfcn::{astar_search, GenConfig, Generator};

fn main() {
    let mut g = Generator::new(GenConfig::with_size(10)).unwrap();
    let mut ds = Dataset::new(10);
    for _ in 0..25 {
        let p = g.problem().unwrap();
        let mut s = Sample::new(p);
        s.truth = astar_search(&s.problem.grid, s.problem.starts[0], s.problem.goal).0.ok().map(|path| path.mask(10));
        ds.samples.push(s);
    }

    let mut bytes = Vec::new();
    write_dataset(&ds, &mut bytes).unwrap();
    println!("{} samples -> {} bytes", ds.samples.len(), bytes.len());
    assert_eq!(read_dataset(bytes.as_slice()).unwrap(), ds);

    bytes[100] ^= 0x10;
    match read_dataset(bytes.as_slice()) {
        Err(DataError::Checksum { stored, computed }) => println!("corruption caught: {stored:#010x} != {computed:#010x}"),
        other => println!("unexpected: {other:?}"),
    }
}
