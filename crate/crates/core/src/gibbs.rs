//! Two-sided conditional probabilities of the image process.
//!
//! `p_{m,n}` is the probability of a 1 at time 0 given a 1 at time `-m-1`,
//! zeros in between, zeros at times `1..=n` and a 1 at time `n+1`. Writing
//! `A_0 = P₁₁` and `A_k = V P^{k-1} Wᵗ` for the weight of a return to the
//! special symbol after exactly `k` zeros,
//!
//! ```text
//! r_{m,n} = A_m A_n          (time 0 carries the special symbol)
//! s_{m,n} = A_{m+n+1}        (time 0 is one more zero)
//! p_{m,n} = r / (r + s)
//! ```
//!
//! Everything is computed from `ln A_k`, so long runs do not underflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{decomposition_verdict, ContinuityVerdict, VerdictStatus};
use crate::numeric::ScaledRow;
use crate::stochastic::{AggregatedDecomposition, TransitionMatrix};
use crate::tolerance::Tolerances;

/// `ln A_k` for `k = 0..=kmax` and `ln(V P^k 1ᵗ)` for `k = 0..=kmax`.
struct ReturnWeights {
    ln_a: Vec<f64>,
    ln_mass: Vec<f64>,
}

impl ReturnWeights {
    fn new(decomp: &AggregatedDecomposition, kmax: usize) -> Self {
        let mut ln_a = Vec::with_capacity(kmax + 1);
        let mut ln_mass = Vec::with_capacity(kmax + 1);
        ln_a.push(if decomp.p11 > 0.0 { decomp.p11.ln() } else { f64::NEG_INFINITY });
        let mut row = ScaledRow::new(&decomp.v);
        for k in 1..=kmax + 1 {
            if k > 1 {
                row.step(&decomp.p);
            }
            if k <= kmax {
                ln_a.push(row.ln_dot(&decomp.w));
            }
            ln_mass.push(row.ln_mass());
        }
        ReturnWeights { ln_a, ln_mass }
    }

    fn cell(&self, m: usize, n: usize) -> (f64, f64) {
        (self.ln_a[m] + self.ln_a[n], self.ln_a[m + n + 1])
    }
}

fn logistic(ln_r: f64, ln_s: f64) -> Option<f64> {
    match (ln_r.is_finite(), ln_s.is_finite()) {
        (false, false) => None,
        (true, false) => Some(1.0),
        (false, true) => Some(0.0),
        (true, true) => Some(1.0 / (1.0 + (ln_s - ln_r).exp())),
    }
}

/// `p_{m,n}` from the block decomposition.
pub fn p_mn(decomp: &AggregatedDecomposition, m: usize, n: usize) -> Result<f64> {
    let w = ReturnWeights::new(decomp, m + n + 1);
    let (r, s) = w.cell(m, n);
    logistic(r, s).ok_or(Error::UnreachableEvent)
}

/// The matrix form `A_m A_n / V P^{m+n-1} 1ᵗ` for `m, n ≥ 1`.
///
/// It agrees with `p_{m,n}` only in special cases; it is computed so that
/// reports can show how far apart the two are.
pub fn displayed_form(decomp: &AggregatedDecomposition, m: usize, n: usize) -> Option<f64> {
    if m == 0 || n == 0 {
        return None;
    }
    let w = ReturnWeights::new(decomp, m + n + 1);
    alt_from(&w, m, n)
}

fn alt_from(w: &ReturnWeights, m: usize, n: usize) -> Option<f64> {
    let den = w.ln_mass[m + n - 1];
    let num = w.ln_a[m] + w.ln_a[n];
    (den.is_finite() && num.is_finite()).then(|| (num - den).exp())
}

/// `p_{m,n}` for `0 ≤ m ≤ M`, `0 ≤ n ≤ N`, indexed `values[m][n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsGrid {
    pub m_max: usize,
    pub n_max: usize,
    /// `None` where the conditioning event has probability zero.
    pub values: Vec<Vec<Option<f64>>>,
    pub r_values: Vec<Vec<f64>>,
    pub s_values: Vec<Vec<f64>>,
    /// Largest `|p_{m,n} - A_m A_n / V P^{m+n-1} 1ᵗ|` over `m, n ≥ 1`.
    pub displayed_form_gap: f64,
}

impl GibbsGrid {
    pub fn compute(decomp: &AggregatedDecomposition, m_max: usize, n_max: usize) -> Self {
        let w = ReturnWeights::new(decomp, m_max + n_max + 1);
        let mut values = vec![vec![None; n_max + 1]; m_max + 1];
        let mut r_values = vec![vec![0.0; n_max + 1]; m_max + 1];
        let mut s_values = vec![vec![0.0; n_max + 1]; m_max + 1];
        let mut gap = 0.0_f64;
        for m in 0..=m_max {
            for n in 0..=n_max {
                let (r, s) = w.cell(m, n);
                let p = logistic(r, s);
                values[m][n] = p;
                r_values[m][n] = r.exp();
                s_values[m][n] = s.exp();
                if let (Some(p), Some(alt)) = (p, if m > 0 && n > 0 { alt_from(&w, m, n) } else { None }) {
                    gap = gap.max((p - alt).abs());
                }
            }
        }
        GibbsGrid {
            m_max,
            n_max,
            values,
            r_values,
            s_values,
            displayed_form_gap: gap,
        }
    }

    pub fn get(&self, m: usize, n: usize) -> Option<f64> {
        self.values.get(m)?.get(n).copied().flatten()
    }

    /// Diagonal values `p_{n,n}`.
    pub fn diagonal(&self) -> Vec<Option<f64>> {
        (0..=self.m_max.min(self.n_max)).map(|n| self.get(n, n)).collect()
    }

    /// For each residue pair `(m mod h, n mod h)`, the value at the largest
    /// grid cell in that class: the candidate limits as `m, n → ∞` jointly.
    pub fn subsequence_limits(&self, h: usize) -> Vec<SubsequenceLimit> {
        let h = h.max(1);
        let mut out = Vec::with_capacity(h * h);
        for a in 0..h {
            for b in 0..h {
                let m = (0..=self.m_max).rev().find(|m| m % h == a);
                let n = (0..=self.n_max).rev().find(|n| n % h == b);
                if let (Some(m), Some(n)) = (m, n) {
                    if let Some(value) = self.get(m, n) {
                        out.push(SubsequenceLimit {
                            m_residue: a,
                            n_residue: b,
                            m,
                            n,
                            value,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceLimit {
    pub m_residue: usize,
    pub n_residue: usize,
    pub m: usize,
    pub n: usize,
    pub value: f64,
}

/// Gibbs verdict: the continuity verdict of the same matrix, with the grid
/// as numerical evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsReport {
    pub status: VerdictStatus,
    pub gibbsian: Option<bool>,
    pub verdict: ContinuityVerdict,
    pub grid: GibbsGrid,
    pub subsequence_limits: Vec<SubsequenceLimit>,
    pub subsequence_spread: f64,
    /// Present when the displayed matrix form disagrees with `r / (r + s)`.
    pub formula_note: Option<String>,
}

pub fn gibbs_verdict(matrix: &TransitionMatrix, special: usize, m_max: usize, n_max: usize, tol: &Tolerances) -> Result<GibbsReport> {
    let decomp = matrix.decompose(special)?;
    let verdict = decomposition_verdict(&decomp, tol)?;
    let grid = GibbsGrid::compute(&decomp, m_max, n_max);
    let h = verdict.period.unwrap_or(1);
    let subsequence_limits = grid.subsequence_limits(h);
    let hi = subsequence_limits.iter().map(|l| l.value).fold(f64::NEG_INFINITY, f64::max);
    let lo = subsequence_limits.iter().map(|l| l.value).fold(f64::INFINITY, f64::min);
    let subsequence_spread = if subsequence_limits.is_empty() { 0.0 } else { hi - lo };
    let formula_note = (grid.displayed_form_gap > tol.tol_limit).then(|| {
        format!(
            "the form A_m A_n / V P^(m+n-1) 1 differs from r/(r+s) by up to {:e}; values use r/(r+s)",
            grid.displayed_form_gap
        )
    });
    let gibbsian = match verdict.status {
        VerdictStatus::Continuous => Some(true),
        VerdictStatus::EssentialDiscontinuity => Some(false),
        VerdictStatus::NumericOnly => None,
    };
    Ok(GibbsReport {
        status: verdict.status,
        gibbsian,
        verdict,
        grid,
        subsequence_limits,
        subsequence_spread,
        formula_note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[Vec<f64>]) -> TransitionMatrix {
        TransitionMatrix::validate(rows, 1e-12).unwrap()
    }

    fn example1() -> TransitionMatrix {
        matrix(&[
            vec![0.10, 0.3, 0.60],
            vec![0.20, 0.3, 0.50],
            vec![0.05, 0.7, 0.25],
        ])
    }

    #[test]
    fn corner_value() {
        let d = example1().decompose(1).unwrap();
        // P11² / (V Wᵗ + P11²) = 0.01 / (0.09 + 0.01)
        assert!((p_mn(&d, 0, 0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn two_state_closed_form() {
        let (a, b) = (0.4, 0.25);
        let d = matrix(&[vec![a, 1.0 - a], vec![b, 1.0 - b]]).decompose(1).unwrap();
        // A_0 = a, A_k = (1-a)(1-b)^{k-1} b
        let big_a = |k: i32| if k == 0 { a } else { (1.0 - a) * (1.0 - b).powi(k - 1) * b };
        for m in 0..5 {
            for n in 0..5 {
                let r = big_a(m) * big_a(n);
                let s = big_a(m + n + 1);
                let got = p_mn(&d, m as usize, n as usize).unwrap();
                assert!((got - r / (r + s)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn example1_diagonal_converges() {
        let d = example1().decompose(1).unwrap();
        let g = GibbsGrid::compute(&d, 60, 60);
        let diff = (g.get(30, 30).unwrap() - g.get(60, 60).unwrap()).abs();
        assert!(diff <= 1e-8, "{diff}");
    }

    #[test]
    fn grid_matches_single_cells_and_identity() {
        let d = example1().decompose(1).unwrap();
        let g = GibbsGrid::compute(&d, 6, 5);
        for m in 0..=6 {
            for n in 0..=5 {
                let p = g.get(m, n).unwrap();
                assert!((p - p_mn(&d, m, n).unwrap()).abs() < 1e-14);
                let (r, s) = (g.r_values[m][n], g.s_values[m][n]);
                assert!((p - r / (r + s)).abs() < 1e-12);
            }
        }
        assert!(g.displayed_form_gap > 1e-3);
    }

    #[test]
    fn periodic_grid_has_two_limits() {
        let m = matrix(&[vec![0.5, 0.5, 0.0], vec![0.3, 0.0, 0.7], vec![0.9, 0.1, 0.0]]);
        let report = gibbs_verdict(&m, 1, 60, 60, &Tolerances::default()).unwrap();
        assert_eq!(report.gibbsian, Some(false));
        let mut vals: Vec<f64> = report.subsequence_limits.iter().map(|l| l.value).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(vals.len(), 2, "{vals:?}");
        assert!((vals[0] - 15.0 / 22.0).abs() < 1e-9);
        assert!((vals[1] - 135.0 / 136.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_cells_are_none() {
        let m = matrix(&[vec![0.5, 0.5, 0.0], vec![0.2, 0.0, 0.8], vec![1.0, 0.0, 0.0]]);
        let d = m.decompose(1).unwrap();
        let g = GibbsGrid::compute(&d, 4, 4);
        assert!(g.get(3, 3).is_none());
        assert_eq!(p_mn(&d, 3, 3).unwrap_err(), Error::UnreachableEvent);
        assert!(g.get(1, 0).is_some());
    }
}
