//! Perron–Frobenius data for nonnegative matrices.
//!
//! The dominant eigentriple is found with the power method on `P` and `Pᵗ`
//! from a uniform start vector, which keeps the iterates nonnegative and the
//! arithmetic real. The remaining spectrum, needed only through the moduli of
//! the eigenvalues, comes from a dense real Schur decomposition.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::inf_norm;
use crate::structure::{self, adjacency, tarjan_scc};
use crate::tolerance::Tolerances;

/// Dominant eigenvalue with its right (`phi`) and left (`psi`) eigenvectors.
///
/// `phi` sums to 1 and `psi` is scaled so that `psi · phi = 1`; the limit
/// matrix is `g = phi psiᵗ`, which is idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub lambda1: f64,
    pub phi: DVector<f64>,
    pub psi: DVector<f64>,
    pub g: DMatrix<f64>,
}

/// Modulus and algebraic multiplicity of the largest eigenvalue outside the
/// `lambda1` cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub lambda1: f64,
    pub lambda2_abs: f64,
    pub d2: usize,
    pub ratio: f64,
}

/// Power iteration for the dominant eigenvector of `a` (right eigenvector;
/// pass the transpose for the left one). Returns the eigenvalue and the
/// unit-sum eigenvector.
fn power_method(a: &DMatrix<f64>, tol: &Tolerances) -> Result<(f64, DVector<f64>)> {
    let n = a.nrows();
    // A positive diagonal entry makes an irreducible matrix aperiodic. Without
    // one, iterate on a + σI, which has the same eigenvectors and is
    // primitive whenever a is irreducible.
    let has_loop = (0..n).any(|i| a[(i, i)] > 0.0);
    let sigma = if has_loop {
        0.0
    } else {
        a.row_iter().map(|r| r.sum()).sum::<f64>() / n as f64
    };

    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..tol.max_iter {
        let ax = a * &x;
        let lambda: f64 = ax.sum();
        let residual = (&ax - &x * lambda).amax() / (lambda.abs().max(f64::MIN_POSITIVE) * x.amax());
        if residual <= tol.tol_eig {
            // keep going while the residual still improves
            if residual < best {
                stalled = 0;
            } else {
                stalled += 1;
            }
            if stalled >= 8 || residual <= 1e-3 * tol.tol_eig {
                return Ok((lambda, x));
            }
        }
        best = best.min(residual);
        let mut next = ax + &x * sigma;
        let s = next.sum();
        if !(s > 0.0) {
            return Err(Error::ConvergenceFailure(tol.max_iter));
        }
        next /= s;
        x = next;
    }
    let ax = a * &x;
    let lambda: f64 = ax.sum();
    let residual = (&ax - &x * lambda).amax() / (lambda.abs().max(f64::MIN_POSITIVE) * x.amax());
    if residual <= tol.tol_eig {
        Ok((lambda, x))
    } else {
        Err(Error::ConvergenceFailure(tol.max_iter))
    }
}

/// Perron eigentriple of an irreducible nonnegative matrix.
pub fn perron(p: &DMatrix<f64>, tol: &Tolerances) -> Result<PerronData> {
    if !structure::classify(p).is_irreducible {
        return Err(Error::ReducibleInput);
    }
    if p.nrows() == 1 {
        let one = DVector::from_element(1, 1.0);
        return Ok(PerronData {
            lambda1: p[(0, 0)],
            phi: one.clone(),
            psi: one,
            g: DMatrix::from_element(1, 1, 1.0),
        });
    }
    let (lambda1, phi) = power_method(p, tol)?;
    let (_, psi) = power_method(&p.transpose(), tol)?;
    let scale = psi.dot(&phi);
    let psi = psi / scale;
    let g = &phi * psi.transpose();
    Ok(PerronData { lambda1, phi, psi, g })
}

/// All eigenvalues of a square matrix, via the real Schur form.
pub fn eigenvalues(p: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    const MAX_SWEEPS: usize = 10_000;
    if p.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = p
        .clone()
        .try_schur(f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure(MAX_SWEEPS))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest eigenvalue modulus after removing the eigenvalues within
/// `tol_cluster` of `lambda1`, and the multiplicity of the eigenvalue attaining it.
///
/// When nothing is left (a 1×1 matrix, or every eigenvalue equals
/// `lambda1`), the gap is reported as `|λ₂| = 0` with `d₂ = 1`.
pub fn subdominant(p: &DMatrix<f64>, lambda1: f64, tol: &Tolerances) -> Result<SpectralGap> {
    let eigs = eigenvalues(p)?;
    Ok(gap_from_eigenvalues(&eigs, lambda1, tol.tol_cluster))
}

pub(crate) fn gap_from_eigenvalues(eigs: &[Complex<f64>], lambda1: f64, tol_cluster: f64) -> SpectralGap {
    let target = Complex::new(lambda1, 0.0);
    let scale = lambda1.max(1.0);
    gap_excluding(eigs, lambda1, tol_cluster, |z| (z - target).norm() <= tol_cluster * scale)
}

/// Like [`subdominant`], but removes the whole peripheral spectrum (every
/// eigenvalue of modulus `lambda`), so that for a periodic block the result
/// is the decay rate of each residue subsequence.
pub fn interior_gap(p: &DMatrix<f64>, lambda: f64, tol: &Tolerances) -> Result<SpectralGap> {
    let eigs = eigenvalues(p)?;
    let scale = lambda.max(1.0);
    let cut = lambda - tol.tol_cluster * scale;
    Ok(gap_excluding(&eigs, lambda, tol.tol_cluster, |z| z.norm() >= cut))
}

fn gap_excluding(eigs: &[Complex<f64>], lambda1: f64, tol_cluster: f64, excluded: impl Fn(Complex<f64>) -> bool) -> SpectralGap {
    let rest: Vec<Complex<f64>> = eigs.iter().copied().filter(|&z| !excluded(z)).collect();
    let lambda2_abs = rest.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    // Multiplicity of an eigenvalue on the subdominant circle, counted by
    // proximity in the complex plane: a conjugate pair has multiplicity 1,
    // while a defective eigenvalue, which a Schur solver splits by roughly
    // the square root of the rounding error, is still counted as repeated.
    let split = tol_cluster.sqrt() * lambda1.max(1.0);
    let d2 = rest
        .iter()
        .filter(|z| (z.norm() - lambda2_abs).abs() <= split)
        .map(|z| rest.iter().filter(|w| (*w - z).norm() <= split).count())
        .max()
        .unwrap_or(1)
        .max(1);
    let ratio = if lambda1 > 0.0 { lambda2_abs / lambda1 } else { 0.0 };
    SpectralGap {
        lambda1,
        lambda2_abs,
        d2,
        ratio,
    }
}

/// `(P / lambda1)^n` by repeated squaring. Each intermediate product is
/// rescaled to unit max-norm and the scale is reapplied once at the end.
/// A nonpositive `lambda1` disables the normalization.
pub fn power_limit(p: &DMatrix<f64>, lambda1: f64, n: u64) -> DMatrix<f64> {
    let dim = p.nrows();
    let base = if lambda1 > 0.0 { p / lambda1 } else { p.clone() };
    let mut result = DMatrix::<f64>::identity(dim, dim);
    let mut result_log = 0.0_f64;
    let mut square = base;
    let mut square_log = 0.0_f64;
    let mut k = n;
    let rescale = |m: &mut DMatrix<f64>, log: &mut f64| {
        let s = inf_norm(m);
        if s > 0.0 && s.is_finite() {
            *m /= s;
            *log += s.ln();
        }
    };
    rescale(&mut square, &mut square_log);
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &square;
            result_log += square_log;
            rescale(&mut result, &mut result_log);
        }
        k >>= 1;
        if k > 0 {
            square = &square * &square;
            square_log *= 2.0;
            rescale(&mut square, &mut square_log);
        }
    }
    result * result_log.exp()
}

/// Spectral radius of a nonnegative matrix, as the largest Perron value over
/// its strongly connected components.
pub fn spectral_radius(p: &DMatrix<f64>, tol: &Tolerances) -> Result<f64> {
    let graph = adjacency(p);
    let mut rho = 0.0_f64;
    for members in tarjan_scc(&graph) {
        rho = rho.max(structure::component_perron(p, &graph, &members, tol)?.0);
    }
    Ok(rho)
}
