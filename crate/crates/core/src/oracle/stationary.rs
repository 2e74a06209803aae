use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stochastic::TransitionMatrix;
use crate::structure::classify;

/// The unique stationary law of an irreducible chain, from the linear system
/// `π (P - I) = 0`, `Σ π = 1`.
pub fn stationary_distribution(matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    let p = matrix.entries();
    if !classify(p).is_irreducible {
        return Err(Error::ReducibleChain);
    }
    let m = matrix.m();
    let mut a = p.transpose() - DMatrix::identity(m, m);
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or(Error::ReducibleChain)?;
    Ok(pi.iter().map(|&x| x.max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::Permutation;

    #[test]
    fn doubly_stochastic() {
        let m = TransitionMatrix::validate(&[vec![0.5, 0.5], vec![0.5, 0.5]], 1e-12).unwrap();
        assert_eq!(stationary_distribution(&m).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn example1_residual() {
        let m = TransitionMatrix::validate(
            &[
                vec![0.10, 0.3, 0.60],
                vec![0.20, 0.3, 0.50],
                vec![0.05, 0.7, 0.25],
            ],
            1e-12,
        )
        .unwrap();
        let pi = stationary_distribution(&m).unwrap();
        let row = DVector::from_vec(pi.clone());
        let image = m.entries().transpose() * &row;
        assert!((image - row).amax() <= 1e-12);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-14);

        let perm = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        let moved = stationary_distribution(&m.relabel(&perm).unwrap()).unwrap();
        for i in 0..3 {
            assert!((moved[perm.image(i)] - pi[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_rejected() {
        let m = TransitionMatrix::validate(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-12).unwrap();
        assert_eq!(stationary_distribution(&m).unwrap_err(), Error::ReducibleChain);
    }
}
