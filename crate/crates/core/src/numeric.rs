//! Small dense helpers with a fixed summation order.

use nalgebra::{DMatrix, DVector};

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn dot(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Row vector times matrix, `x P`, accumulated left to right.
pub fn row_times(x: &DVector<f64>, p: &DMatrix<f64>) -> DVector<f64> {
    let n = p.ncols();
    let mut out = DVector::zeros(n);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for j in 0..n {
            out[j] += xi * p[(i, j)];
        }
    }
    out
}

pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Matrix power by repeated squaring.
pub fn matrix_power(p: &DMatrix<f64>, mut n: u64) -> DMatrix<f64> {
    let dim = p.nrows();
    let mut result = DMatrix::identity(dim, dim);
    let mut base = p.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// A nonnegative row vector `x P^k` kept at unit sum, with the logarithm of
/// the discarded scale tracked separately so that quantities like
/// `V P^k Wᵗ` can be recovered without underflow.
#[derive(Debug, Clone)]
pub struct ScaledRow {
    direction: DVector<f64>,
    log_scale: f64,
    vanished: bool,
}

impl ScaledRow {
    pub fn new(x: &DVector<f64>) -> Self {
        let mut row = ScaledRow {
            direction: x.clone(),
            log_scale: 0.0,
            vanished: false,
        };
        row.normalize();
        row
    }

    fn normalize(&mut self) {
        let s: f64 = self.direction.iter().sum();
        if s > 0.0 && s.is_finite() {
            self.direction /= s;
            self.log_scale += s.ln();
        } else {
            self.vanished = true;
            self.direction.fill(0.0);
        }
    }

    /// Replaces `x` by `x P`.
    pub fn step(&mut self, p: &DMatrix<f64>) {
        if self.vanished {
            return;
        }
        self.direction = row_times(&self.direction, p);
        self.normalize();
    }

    /// The unit-sum direction of the current vector.
    pub fn direction(&self) -> &DVector<f64> {
        &self.direction
    }

    /// True once the vector has become exactly zero.
    pub fn vanished(&self) -> bool {
        self.vanished
    }

    /// `ln(x · w)`, or `-inf` when the product is zero.
    pub fn ln_dot(&self, w: &DVector<f64>) -> f64 {
        if self.vanished {
            return f64::NEG_INFINITY;
        }
        let d = dot(&self.direction, w);
        if d > 0.0 {
            self.log_scale + d.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `ln(x · 1)`.
    pub fn ln_mass(&self) -> f64 {
        if self.vanished {
            f64::NEG_INFINITY
        } else {
            self.log_scale
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = terms.iter().sum();
        let acc: CompensatedSum = terms.iter().copied().collect();
        assert_eq!(naive, 0.0);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let p = DMatrix::from_row_slice(2, 2, &[0.3, 0.5, 0.7, 0.25]);
        let mut direct = DMatrix::identity(2, 2);
        for _ in 0..7 {
            direct = &direct * &p;
        }
        assert!(inf_norm(&(matrix_power(&p, 7) - direct)) < 1e-15);
        assert_eq!(matrix_power(&p, 0), DMatrix::identity(2, 2));
    }

    #[test]
    fn scaled_row_tracks_log_mass() {
        let p = DMatrix::from_row_slice(2, 2, &[0.3, 0.5, 0.7, 0.25]);
        let v = DVector::from_vec(vec![0.3, 0.6]);
        let mut row = ScaledRow::new(&v);
        let mut plain = v.clone();
        for _ in 0..30 {
            row.step(&p);
            plain = row_times(&plain, &p);
        }
        let mass: f64 = plain.iter().sum();
        assert!((row.ln_mass() - mass.ln()).abs() < 1e-12);
    }

    #[test]
    fn scaled_row_reports_vanishing() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let mut row = ScaledRow::new(&DVector::from_vec(vec![1.0, 0.0]));
        row.step(&p);
        assert!(!row.vanished());
        row.step(&p);
        assert!(row.vanished());
        assert_eq!(row.ln_mass(), f64::NEG_INFINITY);
    }
}
