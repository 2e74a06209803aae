use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::TransitionMatrix;

/// Harris's comparison bound `β(n) ≤ (1 - λ)^{n-1}` for a strictly positive
/// transition matrix, with `λ = min P_kj P_il / (m² P_ij P_kl)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarrisBound {
    pub lambda: f64,
}

impl HarrisBound {
    pub fn new(matrix: &TransitionMatrix) -> Result<Self> {
        let p = matrix.entries();
        if p.iter().any(|&x| x <= 0.0) {
            return Err(Error::NotStrictlyPositive);
        }
        let m = matrix.m();
        // For fixed (i, k) the quotient factors into a part in j and a part
        // in l, so the minimum over A⁴ is a product of two minima.
        let min = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::INFINITY;
                for k in 0..m {
                    let left = (0..m).map(|j| p[(k, j)] / p[(i, j)]).fold(f64::INFINITY, f64::min);
                    let right = (0..m).map(|l| p[(i, l)] / p[(k, l)]).fold(f64::INFINITY, f64::min);
                    best = best.min(left * right);
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min);
        Ok(HarrisBound {
            lambda: min / (m * m) as f64,
        })
    }

    pub fn base(&self) -> f64 {
        1.0 - self.lambda
    }

    /// `(1 - λ)^{n-1}`; 1 for `n ≤ 1`.
    pub fn at(&self, n: usize) -> f64 {
        if n <= 1 {
            1.0
        } else {
            self.base().powi((n - 1) as i32)
        }
    }
}

pub fn harris_bound(matrix: &TransitionMatrix, n: usize) -> Result<f64> {
    Ok(HarrisBound::new(matrix)?.at(n))
}
