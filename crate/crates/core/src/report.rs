//! The combined analysis report and its JSON and text renderings.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factor::{self, ContinuityVerdict, HarrisBound, MarkovOrderResult, PkSequence, RateModel};
use crate::gibbs::{gibbs_verdict, GibbsReport};
use crate::oracle::{empirical_pk, simulate, EmpiricalPk};
use crate::spectral::{self, SpectralGap};
use crate::stochastic::TransitionMatrix;
use crate::structure::{classify, StructureReport};
use crate::tolerance::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

/// Hex SHA-256 of the raw input file.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSection {
    pub special: usize,
    /// Structure of the whole zero block (0-based indices into it).
    pub zero_block: StructureReport,
    /// Structure of the part reachable after the special symbol.
    pub analyzed: StructureReport,
    pub analyzed_states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSection {
    pub model: RateModel,
    pub prefactor_kind: String,
    /// `bound(n)` for `n = 0..=K`.
    pub bounds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarrisSection {
    pub lambda: f64,
    pub base: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSection {
    pub seed: u64,
    pub steps: usize,
    pub estimates: EmpiricalPk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub input_digest: String,
    pub tolerances: Tolerances,
    pub structure: StructureSection,
    pub spectral: SpectralGap,
    pub pk: PkSequence,
    pub verdict: ContinuityVerdict,
    pub rate: Option<RateSection>,
    pub harris: Option<HarrisSection>,
    pub markov_order: MarkovOrderResult,
    pub gibbs: Option<GibbsReport>,
    pub empirical: Option<EmpiricalSection>,
    /// Sections that were requested but do not apply, with the reason.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub special: usize,
    pub kmax: usize,
    pub gibbs: Option<(usize, usize)>,
    /// `(steps, seed, kmax)` for the simulation check.
    pub simulation: Option<(usize, u64, usize)>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            special: 1,
            kmax: 100,
            gibbs: Some((20, 20)),
            simulation: Some((100_000, 1, 10)),
        }
    }
}

impl AnalysisReport {
    pub fn build(input: &[u8], matrix: &TransitionMatrix, options: &AnalysisOptions, tol: &Tolerances) -> Result<Self> {
        let special = options.special;
        let full = matrix.decompose(special)?;
        let verdict = factor::decomposition_verdict(&full, tol)?;
        let keep = factor::reachable_states(&full);
        let analyzed = full.restrict(&keep);
        let mut notes = Vec::new();

        let structure = StructureSection {
            special,
            zero_block: classify(&full.p),
            analyzed: classify(&analyzed.p),
            analyzed_states: verdict.analyzed_states.clone(),
        };
        let lambda = spectral::spectral_radius(&analyzed.p, tol)?;
        let spectral = spectral::subdominant(&analyzed.p, lambda, tol)?;
        let pk = factor::pk_sequence(&full, options.kmax);
        let markov_order = factor::markov_order(&analyzed, tol)?;

        let rate = verdict.p_infinity.map(|p_inf| {
            let ratio = verdict.effective_ratio.unwrap_or(0.0);
            let degree = if ratio == verdict.rate_ratio.unwrap_or(-1.0) {
                verdict.rate_poly_degree.unwrap_or(0)
            } else {
                0
            };
            let model = RateModel::fit(&pk, p_inf, ratio, degree, markov_order.order);
            let bounds = (0..=options.kmax).map(|n| model.bound(n)).collect();
            RateSection {
                model,
                prefactor_kind: "empirical prefactor".to_string(),
                bounds,
            }
        });

        let harris = match HarrisBound::new(matrix) {
            Ok(h) => Some(HarrisSection {
                lambda: h.lambda,
                base: h.base(),
            }),
            Err(e) => {
                notes.push(format!("harris: {e}"));
                None
            }
        };

        let gibbs = match options.gibbs {
            Some((m, n)) => Some(gibbs_verdict(matrix, special, m, n, tol)?),
            None => None,
        };

        let empirical = match options.simulation {
            Some((steps, seed, kmax)) => match simulate(matrix, special, steps, seed) {
                Ok(run) => Some(EmpiricalSection {
                    seed,
                    steps,
                    estimates: empirical_pk(&run, kmax),
                }),
                Err(e) => {
                    notes.push(format!("empirical: {e}"));
                    None
                }
            },
            None => None,
        };

        Ok(AnalysisReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: digest(input),
            tolerances: *tol,
            structure,
            spectral,
            pk,
            verdict,
            rate,
            harris,
            markov_order,
            gibbs,
            empirical,
            notes,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        render_text(&serde_json::to_value(self).expect("report serializes"))
    }
}

/// Plain-text rendering of any JSON value: one line per scalar, nested
/// objects indented, numeric arrays on one line. Numbers are printed exactly
/// as in the JSON form.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0, None);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn inline_array(items: &[Value]) -> Option<String> {
    let parts: Option<Vec<String>> = items
        .iter()
        .map(|v| match v {
            Value::Array(inner) => inline_array(inner).map(|s| format!("[{s}]")),
            other => scalar(other),
        })
        .collect();
    parts.map(|p| p.join(", "))
}

fn write_value(out: &mut String, value: &Value, depth: usize, key: Option<&str>) {
    let pad = "  ".repeat(depth);
    let label = key.map(|k| format!("{k}:")).unwrap_or_default();
    match value {
        Value::Object(map) => {
            if key.is_some() {
                out.push_str(&format!("{pad}{label}\n"));
            }
            let inner = if key.is_some() { depth + 1 } else { depth };
            for (k, v) in map {
                write_value(out, v, inner, Some(k));
            }
        }
        Value::Array(items) => match inline_array(items) {
            Some(line) => out.push_str(&format!("{pad}{label} [{line}]\n")),
            None => {
                out.push_str(&format!("{pad}{label}\n"));
                for (i, v) in items.iter().enumerate() {
                    write_value(out, v, depth + 1, Some(&format!("[{i}]")));
                }
            }
        },
        other => out.push_str(&format!("{pad}{label} {}\n", scalar(other).unwrap_or_default())),
    }
}

/// Plot data: `n,p_n,bound_n` for every computed `n`.
pub fn plot_csv(report: &AnalysisReport) -> String {
    let mut out = String::from("n,p_n,bound_n\n");
    for (n, p) in report.pk.values.iter().enumerate() {
        let bound = report
            .rate
            .as_ref()
            .and_then(|r| r.bounds.get(n).copied())
            .map(|b| b.to_string())
            .unwrap_or_default();
        out.push_str(&format!("{n},{p},{bound}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn numbers(v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Number(n) => out.push(n.to_string()),
            Value::Array(a) => a.iter().for_each(|x| numbers(x, out)),
            Value::Object(o) => o.values().for_each(|x| numbers(x, out)),
            _ => {}
        }
    }

    #[test]
    fn round_trip_and_text_completeness() {
        let options = AnalysisOptions {
            simulation: Some((5_000, 1, 4)),
            ..AnalysisOptions::default()
        };
        let report = AnalysisReport::build(b"example", &example1(), &options, &Tolerances::default()).unwrap();
        let json = report.to_json();
        assert_eq!(AnalysisReport::from_json(&json).unwrap(), report);
        let text = report.to_text();
        let mut nums = Vec::new();
        numbers(&serde_json::to_value(&report).unwrap(), &mut nums);
        assert!(nums.len() > 100);
        for n in nums {
            assert!(text.contains(&n), "{n} missing from text");
        }
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn plot_rows() {
        let options = AnalysisOptions {
            kmax: 5,
            gibbs: None,
            simulation: None,
            ..AnalysisOptions::default()
        };
        let report = AnalysisReport::build(b"x", &example1(), &options, &Tolerances::default()).unwrap();
        let csv = plot_csv(&report);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("n,p_n,bound_n\n0,0.1,"));
    }
}
