//! Analysis of the binary process obtained from a finite Markov chain when
//! every symbol except symbol 1 is collapsed to 0.
//!
//! The image process is a renewal chain whose kernel is determined by the
//! sequence `p_k`, the probability of emitting a 1 after a 1 followed by `k`
//! zeros. The crate computes that sequence from the block decomposition of
//! the transition matrix, decides whether it converges (continuity of the
//! image kernel), estimates the continuity rate, detects finite Markov order,
//! evaluates the two-sided Gibbs quantities, and checks all of it against
//! brute-force path enumeration and simulation.

pub mod error;
pub mod factor;
pub mod gibbs;
pub mod numeric;
pub mod oracle;
pub mod report;
pub mod spectral;
pub mod stochastic;
pub mod structure;
pub mod tolerance;

pub use error::{Error, Result};
pub use stochastic::{AggregatedDecomposition, MatrixFile, Permutation, TransitionMatrix};
pub use tolerance::Tolerances;
