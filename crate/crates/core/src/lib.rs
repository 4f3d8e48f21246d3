//! Collaborative tagging data as a weighted user-item-tag network.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`model`] builds the tripartite network from tagging events, giving
//!    each of a user's `k` tags on an item the weight `1/k`.
//! 2. [`projection`] sums out one node kind to get signature vectors and
//!    cosine-correlation matrices.
//! 3. [`percolation`] sweeps a threshold over a correlation matrix and
//!    collects the islands that split off into a branching tree.
//! 4. [`diversity`] measures tag spectra: entropy, sine-metric diversity,
//!    pairwise distance and per-island activity.
//!
//! [`io`] reads triples and writes matrices and trees; [`synth`] generates
//! planted-community corpora.

pub mod cli;
pub mod diversity;
pub mod error;
pub mod io;
mod matrix;
pub mod model;
pub mod percolation;
pub mod projection;
pub mod synth;

pub use error::{EntityKind, Error, Result};
pub use model::{build_network, TagNormalization, TaggingEvent, TripartiteNetwork};
pub use percolation::{build_tree, FilterGrid, IslandTree};
pub use projection::{correlation_matrix, CorrelationMatrix, View};
