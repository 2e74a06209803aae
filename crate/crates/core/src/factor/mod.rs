//! The one-sided kernel of the image process: the sequence `p_k`, its
//! limit behaviour, the continuity rate, and finite Markov order.

mod harris;
mod limits;
mod order;
mod rate;
mod sequence;
mod verdict;

pub use harris::{harris_bound, HarrisBound};
pub use limits::{
    dominating_limits, p_infinity, periodic_limits, periodic_limits_strict, DominatingLimits, Inapplicable,
    ResidueLimits,
};
pub use order::{markov_order, MarkovOrderResult};
pub use rate::{rate_bound, RateModel};
pub use sequence::{pk_matrix, pk_sequence, run_length, PkSequence, PkSource};
pub use verdict::{
    continuity_verdict, decomposition_verdict, numeric_diagnostics, reachable_states, ContinuityVerdict,
    NumericDiagnostics, TheoremBasis, VerdictStatus, DIAGNOSTIC_HORIZON,
};
