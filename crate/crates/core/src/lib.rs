//! Noisy stacked cellular automata built from deterministic Wang tiles.
//!
//! The pipeline runs bottom-up:
//!
//! * [`tileset`] loads a Wang tile set (the bundled `ammann16` fixture or a
//!   tile file), checks corner determinism and searches for patches.
//! * [`ca1d`] turns a north-west deterministic set into a one-dimensional
//!   automaton over tiles plus a blank symbol.
//! * [`stack3d`] stacks that automaton into three dimensions with Toom's
//!   north-east-center majority vote in every `(a, b)` plane.
//! * [`pca`] adds independent uniform symbol noise and samples space-time
//!   trajectories with counter-based randomness.
//! * [`gibbs`] evaluates the 7-cell interaction of the associated lattice gas,
//!   the inverse-temperature to noise map, and single-site conditionals.
//! * [`analysis`] compares trajectories: disagreement clusters, periodicity
//!   scans and modal fields.
//! * [`sweep`] and [`cli`] wire everything into reproducible experiments.

pub mod analysis;
pub mod ca1d;
pub mod cli;
mod error;
pub mod fmt;
pub mod gibbs;
pub mod pca;
pub mod stack3d;
pub mod sweep;
pub mod tileset;

pub use error::{Error, Result};

/// A cell value: a tile id, or the blank symbol `n_tiles`.
pub type Symbol = u8;
