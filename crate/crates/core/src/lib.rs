//! One-shot grid path planning.
//!
//! The crate covers the whole pipeline around a fully convolutional path
//! predictor: random occupancy-grid problems ([`gridworld`]), an optimal
//! 8-connected A* oracle ([`astar`]), forward inference from serialized
//! weights ([`netinfer`]), bidirectional greedy path extraction from value
//! maps ([`reconstruct`]), success/optimality/runtime evaluation
//! ([`evalharness`]), the binary dataset / SVG formats ([`dataio`]) and the
//! `gridfcn` command line ([`cli`]).
//!
//! Coordinates are `(row, col)` and 0-based in memory. The binary file
//! formats store them 1-based.

pub mod astar;
pub mod cli;
pub mod dataio;
pub mod evalharness;
pub mod gridworld;
pub mod netinfer;
pub mod reconstruct;

pub use astar::{astar_search, path_length, Cost, NotFound, Path, SearchStats};
pub use gridworld::{Cell, GenConfig, GenError, Generator, GridMap, PlanProblem, ProblemMaps};
pub use netinfer::{forward, LayerKind, NetworkWeights, ValueMap};
pub use reconstruct::{reconstruct_multi, reconstruct_path, ReconstructionConfig, ReconstructionOutcome};
