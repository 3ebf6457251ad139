//! Grid symmetry detection for 2-D point data.
//!
//! Points are digitized onto an `n × n` grid whose cells are marked when a chosen Betti number
//! of the local point pattern is nonzero ([`digitize`], [`homology`]). Blocks of the marked grid
//! are pushed through sequences of commutation, cyclic permutation and stabilization moves
//! ([`grid`]) and their Hamming distance to the original is compared with a threshold
//! ([`symmetry`]). An Ising-type model over configurations ([`ising`]) gives analytic and
//! sampled reference values, and [`synth`] produces seeded test scenes.

pub mod digitize;
pub mod error;
pub mod gf2;
pub mod grid;
pub mod homology;
pub mod ising;
pub mod symmetry;
pub mod synth;

pub use digitize::{generate_grid_diagram, GridSpec, MarkedGrid, Point, PointCloud};
pub use error::{DigitizeError, GridError, IsingError, SymmetryError, SynthError};
pub use grid::{apply_sequence, hamming, Axis, Configuration, Direction, Move, MoveSequence};
pub use homology::{betti_oracle, build_complex, BettiRecord, CubicalComplex, MicroRaster};
pub use ising::{IsingParams, SpinConfig};
pub use symmetry::{symmetry_test, GridBlock, SymmetryReport, Verdict};
