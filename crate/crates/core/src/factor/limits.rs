use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, matrix_power, row_times};
use crate::spectral::{self, PerronData};
use crate::stochastic::AggregatedDecomposition;
use crate::structure::{classify, cyclic_normal_form, Classification, CyclicForm, ReducibleForm};
use crate::tolerance::Tolerances;

/// `lim p_n = V G Wᵗ / V G 1ᵗ` for a primitive zero block.
pub fn p_infinity(decomp: &AggregatedDecomposition, perron: &PerronData) -> Result<f64> {
    if classify(&decomp.p).classification != Classification::Primitive {
        return Err(Error::NotPrimitive);
    }
    let x = row_times(&decomp.v, &perron.g);
    let den = x.sum();
    if den <= 0.0 {
        return Err(Error::UnreachableEvent);
    }
    Ok(dot(&x, &decomp.w) / den)
}

/// Limits of the subsequences `p_{nh+r+1}`, `r = 0..h-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueLimits {
    pub period: usize,
    /// `None` marks a residue class whose zero runs are eventually impossible.
    pub values: Vec<Option<f64>>,
}

impl ResidueLimits {
    pub fn defined(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    /// Largest difference between two defined residue limits.
    pub fn spread(&self) -> f64 {
        let d = self.defined();
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        if d.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    pub fn all_equal(&self, tol_limit: f64) -> bool {
        self.spread() <= tol_limit
    }

    pub fn degenerate(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(r, _)| r)
            .collect()
    }
}

fn principal(p: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| p[(idx[i], idx[j])])
}

/// `lim_n (T/λ)^{nh}` for an irreducible block `t` of period `h`, with `λ`.
///
/// Each cyclic class is invariant under `T^h`, and the restriction of `T^h`
/// to a class is primitive, so the limit is block diagonal with one Perron
/// projector per class.
pub(crate) fn cyclic_projector(t: &DMatrix<f64>, h: usize, tol: &Tolerances) -> Result<(DMatrix<f64>, f64)> {
    if h == 1 {
        let pd = spectral::perron(t, tol)?;
        return Ok((pd.g, pd.lambda1));
    }
    let form = cyclic_normal_form(t)?;
    let th = matrix_power(t, h as u64);
    let n = t.nrows();
    let mut g = DMatrix::zeros(n, n);
    let mut lambda_h = 0.0;
    for class in &form.classes {
        let pd = spectral::perron(&principal(&th, class), tol)?;
        lambda_h = pd.lambda1;
        for (a, &i) in class.iter().enumerate() {
            for (b, &j) in class.iter().enumerate() {
                g[(i, j)] = pd.g[(a, b)];
            }
        }
    }
    Ok((g, lambda_h.powf(1.0 / h as f64)))
}

fn residue_values(x: DVector<f64>, t: &DMatrix<f64>, w: &DVector<f64>, h: usize) -> Vec<(f64, f64)> {
    let mut x = x;
    let mut out = Vec::with_capacity(h);
    for r in 0..h {
        if r > 0 {
            x = row_times(&x, t);
            let s = x.amax();
            if s > 0.0 {
                x /= s;
            }
        }
        out.push((dot(&x, w), x.sum()));
    }
    out
}

fn ratios(parts: Vec<(f64, f64)>, scale: f64) -> Vec<Option<f64>> {
    parts
        .into_iter()
        .map(|(num, den)| (den > scale * 1e-300 && den > 0.0).then(|| (num / den).clamp(0.0, 1.0)))
        .collect()
}

/// Residue limits `V G* Pʳ Wᵗ / V G* Pʳ 1ᵗ` for an irreducible zero block
/// of period `h ≥ 2`, where `G* = lim (P/λ)^{nh}`.
///
/// A residue whose denominator vanishes is reported as `None`; use
/// [`ResidueLimits::degenerate`] to list them.
pub fn periodic_limits(decomp: &AggregatedDecomposition, cyclic: &CyclicForm, tol: &Tolerances) -> Result<ResidueLimits> {
    let h = cyclic.h;
    if h < 2 {
        return Err(Error::NotPeriodic);
    }
    let (g, _) = cyclic_projector(&decomp.p, h, tol)?;
    let x = row_times(&decomp.v, &g);
    let scale = decomp.v.sum();
    Ok(ResidueLimits {
        period: h,
        values: ratios(residue_values(x, &decomp.p, &decomp.w, h), scale),
    })
}

/// Like [`periodic_limits`], but fails with `DegenerateDirection(r)` at the
/// first residue whose denominator vanishes.
pub fn periodic_limits_strict(decomp: &AggregatedDecomposition, cyclic: &CyclicForm, tol: &Tolerances) -> Result<Vec<f64>> {
    let limits = periodic_limits(decomp, cyclic, tol)?;
    if let Some(&r) = limits.degenerate().first() {
        return Err(Error::DegenerateDirection(r));
    }
    Ok(limits.defined())
}

/// Why the dominating-block limits could not be formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inapplicable {
    /// Every terminal block is nilpotent, so `p_n` is eventually undefined.
    NilpotentBlocks,
    /// The non-terminal part grows at least as fast as the terminal blocks.
    TransientNotSubdominant,
    /// Dominating blocks with different periods (or a mixture of periodic
    /// and aperiodic ones).
    MixedPeriods,
}

/// Residue limits of a reducible zero block, driven by its dominating
/// terminal blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatingLimits {
    pub lambda_max: f64,
    pub limits: ResidueLimits,
    /// Largest `|μ|/λ_max` over the non-peripheral eigenvalues of the
    /// dominating blocks.
    pub block_ratio: f64,
    pub block_poly_degree: usize,
}

/// Limits for a reducible zero block whose dominating terminal blocks share
/// one period `h`, under the condition that the non-terminal part has
/// spectral radius strictly below `λ_max`.
///
/// The entry distribution into a dominating block `D` is not the restriction
/// of `V` to `D`: mass entering through the non-terminal states arrives with
/// a phase shift. With `A = T11/λ` and `G*_D = lim (T_DD/λ)^{nh}`, the
/// effective entry vector is
///
/// ```text
/// e_D = V_D G*_D + V_T (I - A^h)^{-1} Σ_{s<h} A^s (T_{1D}/λ) G*_D (T_DD/λ)^{h-1-s}
/// ```
///
/// and residue `r` converges to `Σ_D e_D (T_DD/λ)^r W_D / Σ_D e_D (T_DD/λ)^r 1`.
pub fn dominating_limits(
    decomp: &AggregatedDecomposition,
    form: &ReducibleForm,
    tol: &Tolerances,
) -> Result<std::result::Result<DominatingLimits, Inapplicable>> {
    let lambda = form.lambda_max;
    if lambda <= 0.0 {
        return Ok(Err(Inapplicable::NilpotentBlocks));
    }
    if form.transient_perron >= lambda - tol.tol_cluster * lambda.max(1.0) {
        return Ok(Err(Inapplicable::TransientNotSubdominant));
    }
    let periods: Vec<Option<usize>> = form.dominating.iter().map(|&i| form.final_blocks[i].period).collect();
    let h = match periods[0] {
        Some(h) if periods.iter().all(|&p| p == Some(h)) => h,
        _ => return Ok(Err(Inapplicable::MixedPeriods)),
    };

    let tr = &form.transient;
    let nt = tr.len();
    let a = &form.transient_block / lambda;
    let v_t = DVector::from_fn(nt, |i, _| decomp.v[tr[i]]);
    // u = V_T (I - A^h)^{-1}, solved as (I - A^h)ᵗ uᵗ = V_Tᵗ
    let u = if nt == 0 {
        v_t
    } else {
        let m = DMatrix::identity(nt, nt) - matrix_power(&a, h as u64);
        m.transpose().lu().solve(&v_t).ok_or(Error::ConvergenceFailure(0))?
    };

    let mut parts = vec![(0.0, 0.0); h];
    let mut block_ratio = 0.0_f64;
    let mut block_poly_degree = 0;
    for &i in &form.dominating {
        let block = &form.final_blocks[i];
        let s = &block.states;
        let t = &block.matrix / lambda;
        let (g, _) = cyclic_projector(&block.matrix, h, tol)?;
        let v_d = DVector::from_fn(s.len(), |k, _| decomp.v[s[k]]);
        let w_d = DVector::from_fn(s.len(), |k, _| decomp.w[s[k]]);
        let mut e = row_times(&v_d, &g);
        if nt > 0 {
            let coupling = &form.coupling_blocks[i] / lambda;
            let mut us = u.clone();
            for step in 0..h {
                if step > 0 {
                    us = row_times(&us, &a);
                }
                let mut y = row_times(&row_times(&us, &coupling), &g);
                for _ in 0..(h - 1 - step) {
                    y = row_times(&y, &t);
                }
                e += y;
            }
        }
        let mut x = e;
        for (r, part) in parts.iter_mut().enumerate() {
            if r > 0 {
                x = row_times(&x, &t);
            }
            part.0 += dot(&x, &w_d);
            part.1 += x.sum();
        }
        let gap = spectral::interior_gap(&block.matrix, block.perron_value, tol)?;
        if gap.ratio > block_ratio + tol.tol_cluster {
            block_ratio = gap.ratio;
            block_poly_degree = gap.d2 - 1;
        } else if (gap.ratio - block_ratio).abs() <= tol.tol_cluster {
            block_poly_degree = block_poly_degree.max(gap.d2 - 1);
        }
    }
    let scale = decomp.v.sum();
    Ok(Ok(DominatingLimits {
        lambda_max: lambda,
        limits: ResidueLimits {
            period: h,
            values: ratios(parts, scale),
        },
        block_ratio,
        block_poly_degree,
    }))
}
