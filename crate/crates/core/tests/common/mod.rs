#![allow(dead_code)]

use aggchain::TransitionMatrix;
use nalgebra::DMatrix;
use rand::Rng;

fn normalize_rows(rows: &mut [Vec<f64>]) {
    for row in rows.iter_mut() {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
}

/// Random stochastic matrix where each entry is zero with probability
/// `sparsity`, the diagonal always positive (so every row has mass), and
/// the special symbol can both leave and be re-entered.
pub fn random_matrix<R: Rng>(rng: &mut R, m: usize, sparsity: f64) -> TransitionMatrix {
    loop {
        let mut rows: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i != j && rng.random::<f64>() < sparsity {
                            0.0
                        } else {
                            rng.random::<f64>() + 0.01
                        }
                    })
                    .collect()
            })
            .collect();
        normalize_rows(&mut rows);
        let t = TransitionMatrix::validate(&rows, 1e-12).unwrap();
        if t.decompose(1).is_ok() {
            return t;
        }
    }
}

/// Random positive matrix whose entries are `u^power`, which spreads them
/// over several orders of magnitude and slows mixing.
pub fn skewed_matrix<R: Rng>(rng: &mut R, m: usize, power: i32) -> TransitionMatrix {
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..m).map(|_| rng.random::<f64>().powi(power) + 1e-4).collect())
        .collect();
    normalize_rows(&mut rows);
    TransitionMatrix::validate(&rows, 1e-12).unwrap()
}

/// Stochastic matrix with the special symbol first and a block-cyclic zero
/// block of `h` classes of `size` states each, every column of which sums
/// to the same constant.
pub fn constant_column_cyclic<R: Rng>(rng: &mut R, h: usize, size: usize) -> TransitionMatrix {
    let n = h * size;
    let mut p = DMatrix::<f64>::zeros(n, n);
    for c in 0..h {
        let next = (c + 1) % h;
        for j in 0..size {
            let col: Vec<f64> = (0..size).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = col.iter().sum();
            for i in 0..size {
                p[(c * size + i, next * size + j)] = col[i] / s;
            }
        }
    }
    let max_row = p.row_iter().map(|r| r.sum()).fold(0.0_f64, f64::max);
    p *= 0.9 / max_row;
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let p11 = 0.1 + 0.3 * rng.random::<f64>();
    let vs: f64 = v.iter().sum();
    let mut rows = vec![vec![0.0; n + 1]; n + 1];
    rows[0][0] = p11;
    for j in 0..n {
        rows[0][j + 1] = v[j] / vs * (1.0 - p11);
    }
    for i in 0..n {
        let row_sum: f64 = p.row(i).sum();
        rows[i + 1][0] = 1.0 - row_sum;
        for j in 0..n {
            rows[i + 1][j + 1] = p[(i, j)];
        }
    }
    TransitionMatrix::validate(&rows, 1e-12).unwrap()
}

/// Stochastic matrix whose zero-block rows all return to the special
/// symbol with the same probability.
pub fn constant_w<R: Rng>(rng: &mut R, m: usize) -> TransitionMatrix {
    let w = 0.05 + 0.9 * rng.random::<f64>();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let raw: Vec<f64> = (1..m).map(|_| rng.random::<f64>() + 0.01).collect();
            let s: f64 = raw.iter().sum();
            if i == 0 {
                let p11 = rng.random::<f64>() * 0.5;
                std::iter::once(p11).chain(raw.iter().map(|x| x / s * (1.0 - p11))).collect()
            } else {
                std::iter::once(w).chain(raw.iter().map(|x| x / s * (1.0 - w))).collect()
            }
        })
        .collect();
    TransitionMatrix::validate(&rows, 1e-12).unwrap()
}

pub fn example1() -> TransitionMatrix {
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

pub fn example2() -> TransitionMatrix {
    TransitionMatrix::validate(
        &[
            vec![0.2, 0.3, 0.1, 0.2, 0.1, 0.0, 0.1],
            vec![0.2, 0.3, 0.2, 0.1, 0.0, 0.1, 0.1],
            vec![0.1, 0.1, 0.2, 0.0, 0.3, 0.1, 0.2],
            vec![0.0, 0.0, 0.0, 0.4, 0.6, 0.0, 0.0],
            vec![0.3, 0.0, 0.0, 0.2, 0.5, 0.0, 0.0],
            vec![0.7, 0.0, 0.0, 0.0, 0.0, 0.3, 0.0],
            vec![0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.4],
        ],
        1e-12,
    )
    .unwrap()
}

pub fn example4() -> TransitionMatrix {
    TransitionMatrix::validate(
        &[
            vec![0.3, 0.2, 0.1, 0.25, 0.15],
            vec![0.2, 0.5, 0.3, 0.0, 0.0],
            vec![0.85, 0.0, 0.0, 0.1, 0.05],
            vec![0.8, 0.0, 0.0, 0.0, 0.2],
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
        ],
        1e-12,
    )
    .unwrap()
}

pub fn periodic_abg(alpha: f64, beta: f64, gamma: f64) -> TransitionMatrix {
    TransitionMatrix::validate(
        &[
            vec![alpha, 1.0 - alpha, 0.0],
            vec![beta, 0.0, 1.0 - beta],
            vec![gamma, 1.0 - gamma, 0.0],
        ],
        1e-12,
    )
    .unwrap()
}

pub fn fixture(name: &str) -> (TransitionMatrix, usize) {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(path).unwrap();
    aggchain::MatrixFile::from_json(&text).unwrap().into_matrix(1e-12, 0.0).unwrap()
}
