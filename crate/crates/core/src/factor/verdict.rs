use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::factor::limits::{dominating_limits, p_infinity, periodic_limits, Inapplicable, ResidueLimits};
use crate::factor::order::markov_order;
use crate::factor::sequence::{pk_sequence, PkSequence};
use crate::spectral;
use crate::stochastic::{AggregatedDecomposition, TransitionMatrix};
use crate::structure::{adjacency, classify, cyclic_normal_form, reducible_canonical_form, Classification};
use crate::tolerance::Tolerances;

/// Window used for the numerical diagnostics when no analytic verdict applies.
pub const DIAGNOSTIC_HORIZON: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Continuous,
    EssentialDiscontinuity,
    NumericOnly,
}

/// Which argument produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremBasis {
    /// Primitive zero block: `p_n → V G Wᵗ / V G 1ᵗ`.
    PrimitiveBlock,
    /// Irreducible periodic zero block: residue-class limits compared.
    PeriodicBlock,
    /// Reducible zero block whose dominating terminal blocks share a period.
    DominatingBlocks,
    /// `p_n` is exactly constant from some index on.
    FiniteOrder,
    None,
}

/// What is reported when no analytic verdict is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericDiagnostics {
    pub note: String,
    pub reason: Option<Inapplicable>,
    pub horizon: usize,
    pub truncated_at: Option<usize>,
    /// `sup_{l,m ≥ K/2} |p_l - p_m|` over the window.
    pub tail_oscillation: f64,
    /// Candidate period used for the residue tails (lcm of the dominating
    /// block periods, or 1).
    pub period: usize,
    /// Last computed `p_{nh+r+1}` for each residue `r`.
    pub residue_tails: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityVerdict {
    pub status: VerdictStatus,
    pub p_infinity: Option<f64>,
    /// Limits of `p_{nh+r+1}` for `r = 0..h-1`, when a period is involved.
    pub limit_cycle: Option<Vec<f64>>,
    /// Decay ratio of the analytic case: `|λ₂|/λ₁` of the primitive block,
    /// or of the dominating blocks in the reducible case.
    pub rate_ratio: Option<f64>,
    pub rate_poly_degree: Option<usize>,
    /// Largest non-peripheral eigenvalue modulus of the whole analysed zero
    /// block over its spectral radius. This is the ratio at which `p_n`
    /// actually settles; it exceeds `rate_ratio` when a non-dominating part
    /// of the block decays more slowly than the dominating blocks mix.
    pub effective_ratio: Option<f64>,
    pub theorem_basis: TheoremBasis,
    pub period: Option<usize>,
    /// Symbols (1-based) of the zero block reachable after a 1; only these
    /// enter the analysis.
    pub analyzed_states: Vec<usize>,
    pub diagnostics: Option<NumericDiagnostics>,
}

impl ContinuityVerdict {
    fn blank(analyzed_states: Vec<usize>) -> Self {
        ContinuityVerdict {
            status: VerdictStatus::NumericOnly,
            p_infinity: None,
            limit_cycle: None,
            rate_ratio: None,
            rate_poly_degree: None,
            effective_ratio: None,
            theorem_basis: TheoremBasis::None,
            period: None,
            analyzed_states,
            diagnostics: None,
        }
    }

    fn from_residues(mut self, limits: &ResidueLimits, tol: &Tolerances, basis: TheoremBasis) -> Self {
        let defined = limits.defined();
        self.theorem_basis = basis;
        self.period = Some(limits.period);
        if limits.period > 1 {
            self.limit_cycle = Some(defined.clone());
        }
        if limits.all_equal(tol.tol_limit) {
            self.status = VerdictStatus::Continuous;
            self.p_infinity = defined.first().copied();
        } else {
            self.status = VerdictStatus::EssentialDiscontinuity;
        }
        self
    }
}

/// Zero-block states reachable from the support of `V`.
pub fn reachable_states(decomp: &AggregatedDecomposition) -> Vec<usize> {
    let graph = adjacency(&decomp.p);
    let n = decomp.dim();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| decomp.v[i] > 0.0).collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &graph[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// Decides whether `p_n` converges, i.e. whether the image kernel is
/// continuous, using the special symbol `special` (1-based).
///
/// States of the zero block that cannot be reached after a 1 do not affect
/// `p_n` and are dropped first. The remaining block is then classified:
/// primitive, irreducible periodic, or reducible with dominating terminal
/// blocks of a common period. When none of these applies, an exactly
/// constant tail still settles the question; otherwise the verdict is
/// numeric only, with the window diagnostics attached.
pub fn continuity_verdict(matrix: &TransitionMatrix, special: usize, tol: &Tolerances) -> Result<ContinuityVerdict> {
    let full = matrix.decompose(special)?;
    decomposition_verdict(&full, tol)
}

pub fn decomposition_verdict(full: &AggregatedDecomposition, tol: &Tolerances) -> Result<ContinuityVerdict> {
    let keep = reachable_states(full);
    let d = full.restrict(&keep);
    let verdict = ContinuityVerdict::blank(d.states.clone());

    let mut reason = None;
    let period_hint;
    match classify(&d.p).classification {
        Classification::Primitive => {
            let pd = spectral::perron(&d.p, tol)?;
            let gap = spectral::subdominant(&d.p, pd.lambda1, tol)?;
            return Ok(ContinuityVerdict {
                status: VerdictStatus::Continuous,
                p_infinity: Some(p_infinity(&d, &pd)?),
                rate_ratio: Some(gap.ratio),
                rate_poly_degree: Some(gap.d2 - 1),
                effective_ratio: Some(gap.ratio),
                theorem_basis: TheoremBasis::PrimitiveBlock,
                period: Some(1),
                ..verdict
            });
        }
        Classification::IrreduciblePeriodic { .. } => {
            let cyclic = cyclic_normal_form(&d.p)?;
            let limits = periodic_limits(&d, &cyclic, tol)?;
            let mut v = verdict.from_residues(&limits, tol, TheoremBasis::PeriodicBlock);
            if v.status == VerdictStatus::Continuous {
                let lambda = spectral::spectral_radius(&d.p, tol)?;
                let gap = spectral::interior_gap(&d.p, lambda, tol)?;
                v.rate_ratio = Some(gap.ratio);
                v.rate_poly_degree = Some(gap.d2 - 1);
                v.effective_ratio = Some(gap.ratio);
            }
            return Ok(v);
        }
        Classification::Reducible => {
            let form = reducible_canonical_form(&d.p, tol)?;
            match dominating_limits(&d, &form, tol)? {
                Ok(dl) if dl.limits.degenerate().is_empty() => {
                    let mut v = verdict.from_residues(&dl.limits, tol, TheoremBasis::DominatingBlocks);
                    if v.status == VerdictStatus::Continuous {
                        let whole = spectral::interior_gap(&d.p, dl.lambda_max, tol)?;
                        v.rate_ratio = Some(dl.block_ratio);
                        v.rate_poly_degree = Some(dl.block_poly_degree);
                        v.effective_ratio = Some(whole.ratio);
                    }
                    return Ok(v);
                }
                Ok(dl) => period_hint = dl.limits.period,
                Err(why) => {
                    reason = Some(why);
                    period_hint = form
                        .dominating
                        .iter()
                        .filter_map(|&i| form.final_blocks[i].period)
                        .fold(1, lcm);
                }
            }
        }
    }

    let order = markov_order(&d, tol)?;
    if let Some(r) = order.order {
        let seq = pk_sequence(&d, r);
        let value = seq.values[r.min(seq.last_defined())];
        return Ok(ContinuityVerdict {
            status: VerdictStatus::Continuous,
            p_infinity: Some(value),
            rate_ratio: Some(0.0),
            rate_poly_degree: Some(0),
            effective_ratio: Some(0.0),
            theorem_basis: TheoremBasis::FiniteOrder,
            ..verdict
        });
    }

    let seq = pk_sequence(&d, DIAGNOSTIC_HORIZON);
    Ok(ContinuityVerdict {
        diagnostics: Some(numeric_diagnostics(&seq, reason, period_hint)),
        ..verdict
    })
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

pub fn numeric_diagnostics(seq: &PkSequence, reason: Option<Inapplicable>, period: usize) -> NumericDiagnostics {
    let last = seq.last_defined();
    let period = period.max(1);
    let residue_tails = (0..period)
        .filter_map(|r| (1..=last).rev().find(|n| (n - 1) % period == r).map(|n| seq.values[n]))
        .collect();
    NumericDiagnostics {
        note: "no analytic verdict".to_string(),
        reason,
        horizon: seq.horizon,
        truncated_at: seq.truncated_at,
        tail_oscillation: seq.tail_oscillation[last / 2],
        period,
        residue_tails,
    }
}
