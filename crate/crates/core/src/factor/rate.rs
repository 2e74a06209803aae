use serde::{Deserialize, Serialize};

use crate::factor::sequence::PkSequence;

/// Errors below this level are treated as rounding noise when fitting the
/// prefactor.
const NOISE_FLOOR: f64 = 1e-12;

/// Continuity-rate envelope `C · n^deg · ratioⁿ`.
///
/// `ratio` and `poly_degree` come from the spectrum; `prefactor` is
/// empirical, the largest `|p_n - p_∞| / (n^deg ratioⁿ)` over the computed
/// window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub ratio: f64,
    pub poly_degree: usize,
    pub prefactor: f64,
    /// For a vanishing ratio: the index from which `p_n` is exactly constant.
    pub exact_from: Option<usize>,
}

impl RateModel {
    pub fn fit(seq: &PkSequence, p_infinity: f64, ratio: f64, poly_degree: usize, exact_from: Option<usize>) -> Self {
        let mut prefactor = 0.0_f64;
        if ratio > 0.0 {
            for (n, &p) in seq.values.iter().enumerate().skip(1) {
                let err = (p - p_infinity).abs();
                if err <= NOISE_FLOOR {
                    continue;
                }
                let shape = envelope(n, ratio, poly_degree);
                if shape > 0.0 && shape.is_finite() {
                    prefactor = prefactor.max(err / shape);
                }
            }
        }
        RateModel {
            ratio,
            poly_degree,
            prefactor,
            exact_from: if ratio == 0.0 { exact_from } else { None },
        }
    }

    /// Bound on `|p_n - p_∞|` at step `n`.
    pub fn bound(&self, n: usize) -> f64 {
        if self.ratio == 0.0 {
            return match self.exact_from {
                Some(k) if n >= k => 0.0,
                _ => 1.0,
            };
        }
        self.prefactor * envelope(n, self.ratio, self.poly_degree)
    }
}

fn envelope(n: usize, ratio: f64, poly_degree: usize) -> f64 {
    let poly = if poly_degree == 0 { 1.0 } else { (n as f64).powi(poly_degree as i32) };
    poly * ratio.powi(n.min(i32::MAX as usize) as i32)
}

pub fn rate_bound(model: &RateModel, n: usize) -> f64 {
    model.bound(n)
}
