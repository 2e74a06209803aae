use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ScaledRow;
use crate::stochastic::AggregatedDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PkSource {
    MatrixPower,
    Enumeration,
}

/// The values `p_0, p_1, …` of the image kernel.
///
/// The kernel of the image process at a past `ā` is `p_{ℓ(ā)}`, where `ℓ(ā)`
/// is the number of zeros since the most recent 1 (see [`run_length`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkSequence {
    pub values: Vec<f64>,
    /// Requested horizon `K`; `values` has `K + 1` entries unless truncated.
    pub horizon: usize,
    pub source: PkSource,
    /// First index whose conditioning event has probability zero.
    pub truncated_at: Option<usize>,
    /// `tail_oscillation[k] = sup_{l,m ≥ k} |p_l - p_m|` over the computed window.
    pub tail_oscillation: Vec<f64>,
}

impl PkSequence {
    pub fn from_values(values: Vec<f64>, horizon: usize, source: PkSource, truncated_at: Option<usize>) -> Self {
        let tail_oscillation = tail_oscillation(&values);
        PkSequence {
            values,
            horizon,
            source,
            truncated_at,
            tail_oscillation,
        }
    }

    /// Image kernel `P(Y_0 = 1 | past)` for a past whose last 1 is followed by
    /// `run` zeros.
    pub fn kernel(&self, run: usize) -> Option<f64> {
        self.values.get(run).copied()
    }

    /// Largest index with a defined value.
    pub fn last_defined(&self) -> usize {
        self.values.len() - 1
    }
}

/// Number of zeros after the most recent 1 in a finite past (oldest symbol
/// first). `None` when the past contains no 1.
pub fn run_length(past: &[u8]) -> Option<usize> {
    past.iter().rev().position(|&y| y == 1)
}

fn tail_oscillation(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in (0..values.len()).rev() {
        hi = hi.max(values[k]);
        lo = lo.min(values[k]);
        out[k] = hi - lo;
    }
    out
}

/// `p_k` from the block decomposition: `p_0 = P₁₁`, and for `k ≥ 1`
/// `p_k = V P^{k-1} Wᵗ / V P^{k-1} 1ᵗ`.
pub fn pk_matrix(decomp: &AggregatedDecomposition, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(decomp.p11);
    }
    let mut row = ScaledRow::new(&decomp.v);
    for _ in 1..k {
        row.step(&decomp.p);
    }
    if row.vanished() {
        return Err(Error::UnreachableRun(k));
    }
    Ok(ratio_at(&row, decomp))
}

fn ratio_at(row: &ScaledRow, decomp: &AggregatedDecomposition) -> f64 {
    let x = row.direction();
    let num: f64 = x.iter().zip(decomp.w.iter()).map(|(a, b)| a * b).sum();
    // the direction has unit sum, so the denominator is 1 up to rounding
    let den: f64 = x.iter().sum();
    (num / den).clamp(0.0, 1.0)
}

/// `p_0 … p_K` with one vector-matrix product per index. The sequence stops
/// early, with `truncated_at` set, at the first `k` for which a run of `k`
/// zeros is impossible.
pub fn pk_sequence(decomp: &AggregatedDecomposition, horizon: usize) -> PkSequence {
    let mut values = Vec::with_capacity(horizon + 1);
    values.push(decomp.p11);
    let mut truncated_at = None;
    let mut row = ScaledRow::new(&decomp.v);
    for k in 1..=horizon {
        if k > 1 {
            row.step(&decomp.p);
        }
        if row.vanished() {
            truncated_at = Some(k);
            break;
        }
        values.push(ratio_at(&row, decomp));
    }
    PkSequence::from_values(values, horizon, PkSource::MatrixPower, truncated_at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::TransitionMatrix;

    fn decomp(rows: &[Vec<f64>]) -> AggregatedDecomposition {
        TransitionMatrix::validate(rows, 1e-12).unwrap().decompose(1).unwrap()
    }

    fn example1() -> AggregatedDecomposition {
        decomp(&[
            vec![0.10, 0.3, 0.60],
            vec![0.20, 0.3, 0.50],
            vec![0.05, 0.7, 0.25],
        ])
    }

    fn periodic(alpha: f64, beta: f64, gamma: f64) -> AggregatedDecomposition {
        decomp(&[
            vec![alpha, 1.0 - alpha, 0.0],
            vec![beta, 0.0, 1.0 - beta],
            vec![gamma, 1.0 - gamma, 0.0],
        ])
    }

    #[test]
    fn example1_first_value_by_hand() {
        let d = example1();
        assert_eq!(pk_matrix(&d, 0).unwrap(), 0.10);
        let hand = (0.3 * 0.2 + 0.6 * 0.05) / 0.9;
        assert!((pk_matrix(&d, 1).unwrap() - hand).abs() < 1e-15);
        assert!((hand - 0.1).abs() < 1e-15);
    }

    #[test]
    fn two_state_chain_is_constant() {
        let b = 0.25;
        let d = decomp(&[vec![0.4, 0.6], vec![b, 1.0 - b]]);
        for k in 1..20 {
            assert!((pk_matrix(&d, k).unwrap() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_pattern() {
        let (a, b, g) = (0.5, 0.3, 0.9);
        let seq = pk_sequence(&periodic(a, b, g), 40);
        assert_eq!(seq.values[0], a);
        for k in 1..=40 {
            let expected = if k % 2 == 1 { b } else { g };
            assert!((seq.values[k] - expected).abs() <= 1e-12, "k={k}");
        }
        assert!((seq.tail_oscillation[20] - (g - b)).abs() < 1e-12);
    }

    #[test]
    fn sequence_matches_single_evaluations() {
        let d = example1();
        let seq = pk_sequence(&d, 30);
        for k in 0..=30 {
            assert!((seq.values[k] - pk_matrix(&d, k).unwrap()).abs() < 1e-15);
        }
        assert_eq!(seq.truncated_at, None);
        assert_eq!(seq.values.len(), 31);
    }

    #[test]
    fn example1_oscillation_shrinks_at_gap_ratio() {
        let seq = pk_sequence(&example1(), 50);
        let osc = &seq.tail_oscillation;
        for k in 1..30 {
            assert!(osc[k + 1] <= osc[k]);
        }
        let observed = (osc[25] / osc[15]).powf(0.1);
        assert!((observed - 0.3657281).abs() < 1e-3, "{observed}");
    }

    #[test]
    fn horizon_zero() {
        let seq = pk_sequence(&example1(), 0);
        assert_eq!(seq.values, vec![0.10]);
    }

    #[test]
    fn nilpotent_block_truncates() {
        // 2 -> 3 -> 1 only: runs longer than 2 are impossible
        let d = decomp(&[
            vec![0.5, 0.5, 0.0],
            vec![0.2, 0.0, 0.8],
            vec![1.0, 0.0, 0.0],
        ]);
        let seq = pk_sequence(&d, 10);
        assert_eq!(seq.truncated_at, Some(3));
        assert_eq!(seq.values.len(), 3);
        assert_eq!(seq.values[2], 1.0);
        assert_eq!(pk_matrix(&d, 3).unwrap_err(), Error::UnreachableRun(3));
    }

    #[test]
    fn run_length_statistic() {
        assert_eq!(run_length(&[0, 1, 0, 0]), Some(2));
        assert_eq!(run_length(&[1]), Some(0));
        assert_eq!(run_length(&[0, 0]), None);
    }
}
