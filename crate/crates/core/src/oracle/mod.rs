//! Independent checks: brute-force path enumeration, the stationary law,
//! and simulation with empirical pattern counts.

mod enumerate;
mod simulate;
mod stationary;

pub use enumerate::{pk_enumeration, pmn_enumeration, ENUMERATION_CAP};
pub use simulate::{
    empirical_pk, empirical_pk_streams, read_trajectory, simulate, write_trajectory, EmpiricalPk, PkEstimate,
    SimulationRun, MIN_COUNT,
};
pub use stationary::stationary_distribution;
