use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::stochastic::TransitionMatrix;

/// Largest number of paths a single enumeration may visit.
pub const ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    /// Any symbol other than the special one.
    Zero,
    /// The special symbol.
    One,
}

/// Sum of the probabilities of all paths that start at `special` and then
/// follow `pattern`, visiting the zero symbols in every possible way.
fn path_sum(matrix: &TransitionMatrix, special: usize, pattern: &[Step]) -> Result<f64> {
    let m = matrix.m();
    let zeros = pattern.iter().filter(|s| **s == Step::Zero).count() as u32;
    let count = ((m - 1) as u128).checked_pow(zeros).unwrap_or(u128::MAX);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge(count));
    }
    let candidates = |step: Step| -> Vec<usize> {
        match step {
            Step::One => vec![special],
            Step::Zero => (0..m).filter(|&s| s != special).collect(),
        }
    };
    let Some((&first, rest)) = pattern.split_first() else {
        return Ok(1.0);
    };
    // one worker per first symbol; partial sums are merged in symbol order
    let partials: Vec<CompensatedSum> = candidates(first)
        .into_par_iter()
        .map(|s| {
            let mut acc = CompensatedSum::default();
            let weight = matrix.get(special, s);
            if weight > 0.0 {
                descend(matrix, special, rest, s, weight, &mut acc);
            }
            acc
        })
        .collect();
    Ok(partials.iter().map(|a| a.value()).collect::<CompensatedSum>().value())
}

fn descend(matrix: &TransitionMatrix, special: usize, pattern: &[Step], at: usize, weight: f64, acc: &mut CompensatedSum) {
    let Some((&step, rest)) = pattern.split_first() else {
        acc.add(weight);
        return;
    };
    match step {
        Step::One => {
            let p = matrix.get(at, special);
            if p > 0.0 {
                descend(matrix, special, rest, special, weight * p, acc);
            }
        }
        Step::Zero => {
            for next in 0..matrix.m() {
                if next == special {
                    continue;
                }
                let p = matrix.get(at, next);
                if p > 0.0 {
                    descend(matrix, special, rest, next, weight * p, acc);
                }
            }
        }
    }
}

fn zeros(k: usize) -> Vec<Step> {
    vec![Step::Zero; k]
}

fn index_of(matrix: &TransitionMatrix, special: usize) -> Result<usize> {
    if special == 0 || special > matrix.m() {
        return Err(Error::InvalidSymbol {
            symbol: special,
            m: matrix.m(),
        });
    }
    Ok(special - 1)
}

/// `p_k` by summing path probabilities: after the special symbol, `k` zero
/// symbols, then (numerator) the special symbol again.
pub fn pk_enumeration(matrix: &TransitionMatrix, special: usize, k: usize) -> Result<f64> {
    let s = index_of(matrix, special)?;
    let mut with_return = zeros(k);
    with_return.push(Step::One);
    let num = path_sum(matrix, s, &with_return)?;
    let den = path_sum(matrix, s, &zeros(k))?;
    if den <= 0.0 {
        return Err(Error::UnreachableRun(k));
    }
    Ok(num / den)
}

/// `p_{m,n}` by summing path probabilities of the two ways to fill time 0
/// between `1 0^m` and `0^n 1`.
pub fn pmn_enumeration(matrix: &TransitionMatrix, special: usize, m: usize, n: usize) -> Result<f64> {
    let s = index_of(matrix, special)?;
    let mut one_at_zero = zeros(m);
    one_at_zero.push(Step::One);
    one_at_zero.extend(zeros(n));
    one_at_zero.push(Step::One);
    let mut zero_at_zero = zeros(m + n + 1);
    zero_at_zero.push(Step::One);
    let r = path_sum(matrix, s, &one_at_zero)?;
    let z = path_sum(matrix, s, &zero_at_zero)?;
    if r + z <= 0.0 {
        return Err(Error::UnreachableEvent);
    }
    Ok(r / (r + z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{pk_matrix, pk_sequence};
    use crate::gibbs::p_mn;

    fn example1() -> TransitionMatrix {
        TransitionMatrix::validate(
            &[
                vec![0.10, 0.3, 0.60],
                vec![0.20, 0.3, 0.50],
                vec![0.05, 0.7, 0.25],
            ],
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn example1_small_k() {
        let m = example1();
        assert_eq!(pk_enumeration(&m, 1, 0).unwrap(), 0.10);
        assert!((pk_enumeration(&m, 1, 1).unwrap() - 0.1).abs() < 1e-15);
        let d = m.decompose(1).unwrap();
        assert!((pk_enumeration(&m, 1, 6).unwrap() - pk_matrix(&d, 6).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn two_state_constant() {
        let m = TransitionMatrix::validate(&[vec![0.4, 0.6], vec![0.25, 0.75]], 1e-12).unwrap();
        for k in 0..8 {
            let expected = if k == 0 { 0.4 } else { 0.25 };
            assert!((pk_enumeration(&m, 1, k).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn gibbs_cells_agree() {
        let m = example1();
        let d = m.decompose(1).unwrap();
        assert!((pmn_enumeration(&m, 1, 0, 0).unwrap() - 0.1).abs() < 1e-15);
        for a in 0..4 {
            for b in 0..4 {
                let e = pmn_enumeration(&m, 1, a, b).unwrap();
                assert!((e - p_mn(&d, a, b).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_row_of_grid_is_one_sided() {
        // p_{0,n} = P11 A_n / (P11 A_n + A_{n+1}), with A_n = p_n · V P^{n-1} 1
        let m = example1();
        let d = m.decompose(1).unwrap();
        let seq = pk_sequence(&d, 8);
        for n in 1..=6 {
            let e = pmn_enumeration(&m, 1, 0, n).unwrap();
            // A_{n+1}/A_n = (p_{n+1}/p_n)(1 - p_n)
            let ratio = seq.values[n + 1] / seq.values[n] * (1.0 - seq.values[n]);
            let expected = 0.1 / (0.1 + ratio);
            assert!((e - expected).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn special_symbol_other_than_one() {
        let m = example1();
        let d = m.decompose(2).unwrap();
        for k in 0..6 {
            assert!((pk_enumeration(&m, 2, k).unwrap() - pk_matrix(&d, k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_enforced() {
        let rows = vec![vec![1.0 / 12.0; 12]; 12];
        let m = TransitionMatrix::validate(&rows, 1e-12).unwrap();
        assert_eq!(pk_enumeration(&m, 1, 7).unwrap_err(), Error::EnumerationTooLarge(11u128.pow(7)));
    }

    #[test]
    fn unreachable_run() {
        let m = TransitionMatrix::validate(&[vec![0.5, 0.5, 0.0], vec![0.2, 0.0, 0.8], vec![1.0, 0.0, 0.0]], 1e-12).unwrap();
        assert_eq!(pk_enumeration(&m, 1, 3).unwrap_err(), Error::UnreachableRun(3));
        assert_eq!(pk_enumeration(&m, 1, 2).unwrap(), 1.0);
    }
}
