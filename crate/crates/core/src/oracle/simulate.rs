use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::stationary::stationary_distribution;
use crate::stochastic::TransitionMatrix;

/// Smallest denominator count for which an estimate is reported.
pub const MIN_COUNT: u64 = 30;

/// A stationary trajectory of the chain and its image.
///
/// Trajectories come from `ChaCha8Rng::seed_from_u64(seed)`; each step draws
/// one uniform `f64` and inverts the cumulative row. The first symbol is
/// drawn the same way from the stationary law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub seed: u64,
    pub length: usize,
    /// Symbols in `1..=m`.
    pub symbols: Vec<u32>,
    /// `image[t] = 1` iff `symbols[t]` is the special symbol.
    pub image: Vec<u8>,
}

struct Sampler {
    start: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw(cum: &[f64], u: f64) -> usize {
    let total = *cum.last().unwrap();
    let i = cum.partition_point(|&c| c <= u * total);
    if i < cum.len() {
        return i;
    }
    // rounding left u·total at the very top: take the last state with mass
    let mut j = cum.len() - 1;
    while j > 0 && cum[j] == cum[j - 1] {
        j -= 1;
    }
    j
}

impl Sampler {
    fn new(matrix: &TransitionMatrix) -> Result<Self> {
        let pi = stationary_distribution(matrix)?;
        let m = matrix.m();
        Ok(Sampler {
            start: cumulative(pi.into_iter()),
            rows: (0..m).map(|i| cumulative((0..m).map(|j| matrix.get(i, j)))).collect(),
        })
    }

    fn path(&self, rng: &mut ChaCha8Rng, length: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(length);
        let mut state = draw(&self.start, rng.random::<f64>());
        out.push(state as u32 + 1);
        for _ in 1..length {
            state = draw(&self.rows[state], rng.random::<f64>());
            out.push(state as u32 + 1);
        }
        out
    }
}

fn image_of(symbols: &[u32], special: usize) -> Vec<u8> {
    symbols.iter().map(|&s| u8::from(s as usize == special)).collect()
}

pub fn simulate(matrix: &TransitionMatrix, special: usize, length: usize, seed: u64) -> Result<SimulationRun> {
    if special == 0 || special > matrix.m() {
        return Err(Error::InvalidSymbol {
            symbol: special,
            m: matrix.m(),
        });
    }
    let sampler = Sampler::new(matrix)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = sampler.path(&mut rng, length.max(1));
    Ok(SimulationRun {
        seed,
        length: symbols.len(),
        image: image_of(&symbols, special),
        symbols,
    })
}

/// One pattern count: occurrences of `1 0^k ·` and of `1 0^k 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkEstimate {
    pub k: usize,
    pub denominator: u64,
    pub numerator: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPk {
    pub k_max: usize,
    /// Estimates for every `k ≤ k_max` with at least [`MIN_COUNT`] occurrences.
    pub estimates: Vec<PkEstimate>,
    /// `k ≤ k_max` left out because their counts are too small.
    pub sparse: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Counts {
    den: Vec<u64>,
    num: Vec<u64>,
}

impl Counts {
    fn scan(image: &[u8], k_max: usize) -> Self {
        let mut den = vec![0; k_max + 1];
        let mut num = vec![0; k_max + 1];
        // zeros since the most recent 1, or None before the first 1
        let mut run: Option<usize> = None;
        for &y in image {
            if let Some(k) = run.filter(|&k| k <= k_max) {
                den[k] += 1;
                num[k] += u64::from(y);
            }
            run = if y == 1 { Some(0) } else { run.map(|k| k + 1) };
        }
        Counts { den, num }
    }

    fn merge(mut self, other: Counts) -> Self {
        for (a, b) in self.den.iter_mut().zip(other.den) {
            *a += b;
        }
        for (a, b) in self.num.iter_mut().zip(other.num) {
            *a += b;
        }
        self
    }

    fn finish(self, k_max: usize) -> EmpiricalPk {
        let mut estimates = Vec::new();
        let mut sparse = Vec::new();
        for k in 0..=k_max {
            let (d, n) = (self.den[k], self.num[k]);
            if d < MIN_COUNT {
                sparse.push(k);
                continue;
            }
            let p_hat = n as f64 / d as f64;
            estimates.push(PkEstimate {
                k,
                denominator: d,
                numerator: n,
                p_hat,
                stderr: (p_hat * (1.0 - p_hat) / d as f64).sqrt(),
            });
        }
        EmpiricalPk {
            k_max,
            estimates,
            sparse,
        }
    }
}

/// Estimates `p_k` from a trajectory. Patterns may overlap: the 1 closing
/// one pattern opens the next.
pub fn empirical_pk(run: &SimulationRun, k_max: usize) -> EmpiricalPk {
    Counts::scan(&run.image, k_max).finish(k_max)
}

/// Estimates `p_k` from `streams` independent trajectories of `length` steps
/// each. Stream `i` uses `ChaCha8Rng::seed_from_u64(seed)` with its stream
/// number set to `i`; counts are merged exactly, so the result does not
/// depend on the number of worker threads.
pub fn empirical_pk_streams(
    matrix: &TransitionMatrix,
    special: usize,
    length: usize,
    seed: u64,
    streams: u64,
    k_max: usize,
) -> Result<EmpiricalPk> {
    if special == 0 || special > matrix.m() {
        return Err(Error::InvalidSymbol {
            symbol: special,
            m: matrix.m(),
        });
    }
    let sampler = Sampler::new(matrix)?;
    let counts = (0..streams.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let symbols = sampler.path(&mut rng, length.max(1));
            Counts::scan(&image_of(&symbols, special), k_max)
        })
        .reduce(
            || Counts {
                den: vec![0; k_max + 1],
                num: vec![0; k_max + 1],
            },
            Counts::merge,
        );
    Ok(counts.finish(k_max))
}

const MAGIC: &[u8; 2] = b"HM";

/// Writes a trajectory as an 8-byte header (`"HM"`, `m` as little-endian
/// `u16`, length as little-endian `u32`) followed by one byte per symbol.
pub fn write_trajectory<W: Write>(out: &mut W, m: usize, symbols: &[u32]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    if m > u8::MAX as usize {
        return Err(Error::Io(format!("alphabet of size {m} does not fit one byte per symbol")));
    }
    let length = u32::try_from(symbols.len()).map_err(|_| Error::Io("trajectory longer than u32::MAX".into()))?;
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&(m as u16).to_le_bytes()).map_err(io)?;
    out.write_all(&length.to_le_bytes()).map_err(io)?;
    let bytes: Vec<u8> = symbols.iter().map(|&s| s as u8).collect();
    out.write_all(&bytes).map_err(io)
}

/// Reads a trajectory written by [`write_trajectory`]; returns `m` and the
/// symbols.
pub fn read_trajectory<R: Read>(input: &mut R) -> Result<(usize, Vec<u32>)> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    let mut header = [0u8; 8];
    input.read_exact(&mut header).map_err(io)?;
    if &header[..2] != MAGIC {
        return Err(Error::Parse("not a trajectory file".into()));
    }
    let m = u16::from_le_bytes([header[2], header[3]]) as usize;
    let length = u32::from_le_bytes([header[4], header[5], header[6], header[7]]) as usize;
    let mut body = vec![0u8; length];
    input.read_exact(&mut body).map_err(io)?;
    let symbols: Vec<u32> = body.into_iter().map(u32::from).collect();
    if let Some(&bad) = symbols.iter().find(|&&s| s == 0 || s as usize > m) {
        return Err(Error::InvalidSymbol {
            symbol: bad as usize,
            m,
        });
    }
    Ok((m, symbols))
}
