use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::factor::sequence::pk_sequence;
use crate::numeric::inf_norm;
use crate::spectral;
use crate::stochastic::AggregatedDecomposition;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovOrderResult {
    pub is_finite_order: bool,
    /// Smallest `r ≥ 1` with `p_n = p_r` for every `n ≥ r`.
    pub order: Option<usize>,
    /// `order - 1`.
    pub stabilization_k: Option<usize>,
    /// Smallest `k` with `(P/λ₁)^{k+1} = (P/λ₁)^k`, i.e. `Pⁿ = λ₁^{n-k} Pᵏ`
    /// for all `n ≥ k`. Implies finite order at most `k + 1`.
    pub power_stabilization: Option<usize>,
    /// All eigenvalues of `P` other than `λ₁` vanish.
    pub single_nonnull_eigenvalue: bool,
    pub lambda1: f64,
}

/// Detects a finite Markov order of the image process.
///
/// The image has order `r` exactly when `p_n = p_r` for all `n ≥ r`. Since
/// `x_n = V P^{n-1}` satisfies a linear recurrence of length at most
/// `d = m - 1` (Cayley-Hamilton), so do the numerators and denominators of
/// `p_n`, and the condition holds for all `n ≥ r` once it holds on the `d`
/// consecutive indices `r..r+d-1`. The search is therefore finite and
/// exact up to `tol_stab`, and covers orders that power stabilization
/// misses: a zero block with constant row sums has order 1 without any
/// power of `P` stabilizing.
///
/// Indices past a truncation of the sequence (runs of zeros that cannot
/// occur) impose no constraint.
pub fn markov_order(decomp: &AggregatedDecomposition, tol: &Tolerances) -> Result<MarkovOrderResult> {
    let d = decomp.dim();
    let seq = pk_sequence(decomp, 2 * d + 1);
    let last = seq.last_defined();
    let mut order = None;
    for r in 1..=d + 1 {
        if r > last {
            order = Some(r);
            break;
        }
        let base = seq.values[r];
        let stop = (r + d.max(1) - 1).min(last);
        if (r..=stop).all(|n| (seq.values[n] - base).abs() <= tol.tol_stab) {
            order = Some(r);
            break;
        }
    }

    let lambda1 = spectral::spectral_radius(&decomp.p, tol)?;
    let power_stabilization = power_stabilization(&decomp.p, lambda1, tol.tol_stab);
    let single_nonnull_eigenvalue = power_stabilization.is_some() || {
        let gap = spectral::subdominant(&decomp.p, lambda1, tol)?;
        gap.lambda2_abs <= tol.tol_cluster.sqrt() * lambda1.max(1.0)
    };

    Ok(MarkovOrderResult {
        is_finite_order: order.is_some(),
        order,
        stabilization_k: order.map(|r| r - 1),
        power_stabilization,
        single_nonnull_eigenvalue,
        lambda1,
    })
}

fn power_stabilization(p: &DMatrix<f64>, lambda1: f64, tol_stab: f64) -> Option<usize> {
    let d = p.nrows();
    let base = if lambda1 > 0.0 { p / lambda1 } else { p.clone() };
    let mut current = DMatrix::<f64>::identity(d, d);
    for k in 0..=d.saturating_sub(1) {
        let next = &current * &base;
        let diff = if lambda1 > 0.0 { inf_norm(&(&next - &current)) } else { inf_norm(&next) };
        if diff <= tol_stab {
            return Some(k);
        }
        current = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::TransitionMatrix;

    fn decomp(rows: &[Vec<f64>]) -> AggregatedDecomposition {
        TransitionMatrix::validate(rows, 1e-12).unwrap().decompose(1).unwrap()
    }

    fn example4() -> AggregatedDecomposition {
        decomp(&[
            vec![0.3, 0.2, 0.1, 0.25, 0.15],
            vec![0.2, 0.5, 0.3, 0.0, 0.0],
            vec![0.85, 0.0, 0.0, 0.1, 0.05],
            vec![0.8, 0.0, 0.0, 0.0, 0.2],
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
        ])
    }

    #[test]
    fn example4_order_four() {
        let res = markov_order(&example4(), &Tolerances::default()).unwrap();
        assert_eq!(res.order, Some(4));
        assert_eq!(res.stabilization_k, Some(3));
        assert_eq!(res.power_stabilization, Some(3));
        assert!(res.single_nonnull_eigenvalue);
        assert_eq!(res.lambda1, 0.5);
    }

    #[test]
    fn constant_row_sums_order_one() {
        let d = decomp(&[
            vec![0.2, 0.5, 0.3],
            vec![0.4, 0.1, 0.5],
            vec![0.4, 0.35, 0.25],
        ]);
        let res = markov_order(&d, &Tolerances::default()).unwrap();
        assert_eq!(res.order, Some(1));
        assert_eq!(res.power_stabilization, None);
    }

    #[test]
    fn example1_infinite_order() {
        let d = decomp(&[
            vec![0.10, 0.3, 0.60],
            vec![0.20, 0.3, 0.50],
            vec![0.05, 0.7, 0.25],
        ]);
        let res = markov_order(&d, &Tolerances::default()).unwrap();
        assert!(!res.is_finite_order);
        assert_eq!(res.order, None);
        assert!(!res.single_nonnull_eigenvalue);
        let seq = pk_sequence(&d, 20);
        assert!((seq.values[20] - seq.values[19]).abs() > 0.0);
    }

    #[test]
    fn nilpotent_block_has_finite_order() {
        let d = decomp(&[vec![0.5, 0.5, 0.0], vec![0.2, 0.0, 0.8], vec![1.0, 0.0, 0.0]]);
        let res = markov_order(&d, &Tolerances::default()).unwrap();
        assert_eq!(res.order, Some(2));
        assert_eq!(res.power_stabilization, Some(1));
        assert_eq!(res.lambda1, 0.0);
    }

    #[test]
    fn order_implies_constant_tail() {
        let d = example4();
        let seq = pk_sequence(&d, 200);
        for n in 4..=200 {
            assert!((seq.values[n] - seq.values[4]).abs() <= 1e-10);
        }
    }
}
