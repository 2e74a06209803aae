//! Row-stochastic matrices and their block decomposition around the special
//! symbol.
//!
//! Symbols are 1-based at the public surface (symbol 1 is the one the
//! aggregation map sends to 1). Internally rows and columns are 0-based, so
//! symbol `s` lives at index `s - 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated row-stochastic matrix over the alphabet `{1..m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl TransitionMatrix {
    /// Validates a raw row-major array. Entries are never rescaled.
    pub fn validate(rows: &[Vec<f64>], tol_row: f64) -> Result<Self> {
        let m = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::NotSquare {
                    rows: m,
                    bad_row: i,
                    cols: row.len(),
                });
            }
        }
        if m < 2 {
            return Err(Error::AlphabetTooSmall(m));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(Error::NegativeEntry(i, j));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol_row {
                return Err(Error::RowSumViolation(i, sum));
            }
        }
        let entries = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        Ok(TransitionMatrix {
            entries,
            labels: None,
        })
    }

    /// Like [`validate`](Self::validate), but first sets every entry with
    /// absolute value below `zero_tol` to exactly zero. The row-sum check is
    /// widened by `m * zero_tol` to account for the removed mass.
    pub fn validate_with_zero_tol(rows: &[Vec<f64>], tol_row: f64, zero_tol: f64) -> Result<Self> {
        if zero_tol <= 0.0 {
            return Self::validate(rows, tol_row);
        }
        let cleaned: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| if x.abs() < zero_tol { 0.0 } else { x })
                    .collect()
            })
            .collect();
        Self::validate(&cleaned, tol_row + rows.len() as f64 * zero_tol)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.m() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                m: self.m(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Entry for 0-based row `i` and column `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    /// Simultaneous row/column relabeling: symbol at index `i` moves to
    /// index `perm.image(i)`.
    pub fn relabel(&self, perm: &Permutation) -> Result<Self> {
        let m = self.m();
        if perm.len() != m {
            return Err(Error::InvalidPermutation(format!(
                "length {} for alphabet of size {}",
                perm.len(),
                m
            )));
        }
        let mut entries = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                entries[(perm.image(i), perm.image(j))] = self.entries[(i, j)];
            }
        }
        let labels = self.labels.as_ref().map(|l| {
            let mut out = vec![String::new(); m];
            for (i, name) in l.iter().enumerate() {
                out[perm.image(i)] = name.clone();
            }
            out
        });
        Ok(TransitionMatrix { entries, labels })
    }

    /// Splits the matrix around `special` (1-based). When `special != 1` the
    /// special symbol is first moved to the front, keeping the relative order
    /// of the remaining symbols.
    pub fn decompose(&self, special: usize) -> Result<AggregatedDecomposition> {
        let m = self.m();
        if special == 0 || special > m {
            return Err(Error::InvalidSymbol { symbol: special, m });
        }
        let perm = Permutation::move_to_front(m, special - 1);
        let relabeled;
        let base = if special == 1 {
            self
        } else {
            relabeled = self.relabel(&perm)?;
            &relabeled
        };
        // states[k] is the original 1-based symbol of sub-matrix index k
        let inverse = perm.inverse();
        let states = (1..m).map(|k| inverse.image(k) + 1).collect();
        AggregatedDecomposition::from_entries(base.entries(), states)
    }
}

/// A bijection of `{0..n-1}` stored as its image table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Permutation(images))
    }

    /// Builds a permutation from 1-based images, as written by users.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&x| x == 0) {
            return Err(Error::InvalidPermutation("symbols are 1-based".into()));
        }
        Self::new(images.iter().map(|&x| x - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Sends `index` to 0 and shifts the indices before it up by one.
    pub fn move_to_front(n: usize, index: usize) -> Self {
        Permutation(
            (0..n)
                .map(|i| match i {
                    i if i == index => 0,
                    i if i < index => i + 1,
                    i => i,
                })
                .collect(),
        )
    }

    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Permutation(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Permutation(inv)
    }

    /// Permutation applying `self` first, then `other`.
    pub fn then(&self, other: &Permutation) -> Self {
        Permutation(self.0.iter().map(|&x| other.image(x)).collect())
    }

    /// `result[image(i)] = values[i]`.
    pub fn apply<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out = values.to_vec();
        for (i, v) in values.iter().enumerate() {
            out[self.0[i]] = v.clone();
        }
        out
    }

    /// Simultaneous row/column permutation of a square matrix.
    pub fn apply_square(&self, matrix: &DMatrix<f64>) -> DMatrix<f64> {
        let n = matrix.nrows();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.0[i], self.0[j])] = matrix[(i, j)];
            }
        }
        out
    }
}

/// The block form of a transition matrix with the special symbol first:
///
/// ```text
/// ( p11  V )
/// ( Wᵗ   P )
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedDecomposition {
    pub p11: f64,
    /// Transitions from the special symbol into the zero block.
    pub v: DVector<f64>,
    /// Transitions from the zero block back to the special symbol.
    pub w: DVector<f64>,
    /// Transitions inside the zero block.
    pub p: DMatrix<f64>,
    /// Original 1-based symbol for each index of `p`.
    pub states: Vec<usize>,
}

impl AggregatedDecomposition {
    fn from_entries(entries: &DMatrix<f64>, states: Vec<usize>) -> Result<Self> {
        let m = entries.nrows();
        let p11 = entries[(0, 0)];
        let v = DVector::from_fn(m - 1, |j, _| entries[(0, j + 1)]);
        let w = DVector::from_fn(m - 1, |i, _| entries[(i + 1, 0)]);
        let p = entries.view((1, 1), (m - 1, m - 1)).into_owned();
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::TrivialFactor("V = 0: the special symbol never leaves itself"));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::TrivialFactor("W = 0: the special symbol is never re-entered"));
        }
        Ok(AggregatedDecomposition {
            p11,
            v,
            w,
            p,
            states,
        })
    }

    /// Builds a decomposition from its parts without a parent matrix, for
    /// callers that construct sub-problems directly.
    pub fn from_parts(p11: f64, v: DVector<f64>, w: DVector<f64>, p: DMatrix<f64>) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n || v.len() != n || w.len() != n {
            return Err(Error::DimensionMismatch {
                declared: n,
                actual: v.len().max(w.len()).max(p.ncols()),
            });
        }
        let mut entries = DMatrix::zeros(n + 1, n + 1);
        entries[(0, 0)] = p11;
        for j in 0..n {
            entries[(0, j + 1)] = v[j];
            entries[(j + 1, 0)] = w[j];
        }
        entries.view_mut((1, 1), (n, n)).copy_from(&p);
        Self::from_entries(&entries, (2..=n + 1).collect())
    }

    /// Dimension of the zero block, `m - 1`.
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    /// Places the four parts back into the full `m × m` block layout.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n + 1, n + 1);
        out[(0, 0)] = self.p11;
        for j in 0..n {
            out[(0, j + 1)] = self.v[j];
            out[(j + 1, 0)] = self.w[j];
        }
        out.view_mut((1, 1), (n, n)).copy_from(&self.p);
        out
    }

    /// Keeps only the zero-block states in `keep` (sorted 0-based indices).
    ///
    /// Only meaningful when no kept state has a transition to a dropped one,
    /// e.g. when `keep` is closed under reachability.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        AggregatedDecomposition {
            p11: self.p11,
            v: DVector::from_fn(k, |i, _| self.v[keep[i]]),
            w: DVector::from_fn(k, |i, _| self.w[keep[i]]),
            p: DMatrix::from_fn(k, k, |i, j| self.p[(keep[i], keep[j])]),
            states: keep.iter().map(|&i| self.states[i]).collect(),
        }
    }
}

/// On-disk matrix description shared by every CLI command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub m: usize,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<usize>,
}

impl MatrixFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix file serializes")
    }

    pub fn from_matrix(matrix: &TransitionMatrix, special: Option<usize>) -> Self {
        MatrixFile {
            m: matrix.m(),
            matrix: matrix.to_rows(),
            labels: matrix.labels().map(|l| l.to_vec()),
            special,
        }
    }

    /// Validates the file contents into a matrix; `special` defaults to 1.
    pub fn into_matrix(self, tol_row: f64, zero_tol: f64) -> Result<(TransitionMatrix, usize)> {
        if self.matrix.len() != self.m {
            return Err(Error::DimensionMismatch {
                declared: self.m,
                actual: self.matrix.len(),
            });
        }
        let mut matrix = TransitionMatrix::validate_with_zero_tol(&self.matrix, tol_row, zero_tol)?;
        if let Some(labels) = self.labels {
            matrix = matrix.with_labels(labels)?;
        }
        let special = self.special.unwrap_or(1);
        if special == 0 || special > self.m {
            return Err(Error::InvalidSymbol {
                symbol: special,
                m: self.m,
            });
        }
        Ok((matrix, special))
    }
}
