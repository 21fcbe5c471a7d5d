//! AND-OR interaction analysis over the subset lattice of `n` input
//! variables: value tables, exact and sparsified extraction, complexity
//! and generalization metrics, diagnostics, and brute-force oracles.

pub mod analysis;
pub mod error;
pub mod extraction;
pub mod io;
pub mod lattice;
pub mod metrics;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
