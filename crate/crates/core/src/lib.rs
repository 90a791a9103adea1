//! Modal DG solvers with classical limiters, a trainable MLP shock
//! detector that runs as a black-box limiter, and domain adaptation of the
//! detector to residual-distribution-style targets.
//!
//! The crate is organized around the pipeline:
//! labeled data from limited DG runs ([`dataset`]) -> detector training
//! ([`mlp`]) -> in-solver use with symmetry-invariant voting
//! ([`nnlimiter`]) -> retraining on a new scheme ([`transfer`]).

pub mod basis;
pub mod dataset;
pub mod error;
pub mod euler;
pub mod features;
pub mod limiters;
pub mod mesh;
pub mod metrics;
pub mod mlp;
pub mod nnlimiter;
pub mod solution;
pub mod solvers;
pub mod transfer;

pub use error::{Error, Result};
