use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by all analyses.
///
/// Every report records the values it was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of a row sum from 1.
    pub tol_row: f64,
    /// Relative residual for Perron eigenpairs.
    pub tol_eig: f64,
    /// Iteration cap for the power method.
    pub max_iter: usize,
    /// Radius used to group eigenvalues of equal modulus.
    pub tol_cluster: f64,
    /// Two limit values closer than this are considered equal.
    pub tol_limit: f64,
    /// Threshold for power stabilization and eventual constancy of p_k.
    pub tol_stab: f64,
    /// Entries strictly below this are set to zero before analysis (0 disables).
    pub zero_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_row: 1e-12,
            tol_eig: 1e-10,
            max_iter: 10_000,
            tol_cluster: 1e-8,
            tol_limit: 1e-10,
            tol_stab: 1e-10,
            zero_tol: 0.0,
        }
    }
}
