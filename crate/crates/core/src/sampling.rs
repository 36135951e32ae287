//! Monte Carlo statistics of collectibility over Haar-random detectors and
//! the two-qubit sweep over the Schmidt angle.
//!
//! Each party `B..K` gets an independent Haar-random qubit basis per sample;
//! party A is maximized analytically by the Gram formula. Samples are split
//! into fixed-size shards, shard `s` drawing from the stream seeded with
//! `seed + s`, and shard results are combined in shard order, so estimates
//! do not depend on the thread count.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::haar_basis;
use crate::collect::{
    bound_separable, qubit_collectibility, two_qubit_detect_prob, two_qubit_extremes,
    two_qubit_mean,
};
use crate::error::{Error, Result};
use crate::json::format_g17;
use crate::state::StateVector;

const SHARD_SIZE: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ShardSums {
    sum: f64,
    sum_sq: f64,
    hits: u64,
    max: f64,
}

fn qubit_parties(state: &StateVector) -> Result<usize> {
    let dims = state.dims();
    if dims.len() < 2 || dims[1..].iter().any(|&d| d != 2) {
        return Err(Error::Shape(format!(
            "Monte Carlo sampling needs qubit parties B..K, got dims {dims:?}"
        )));
    }
    Ok(dims.len() - 1)
}

fn sample_shards(state: &StateVector, config: &McConfig) -> Result<(ShardSums, usize)> {
    if config.samples == 0 {
        return Err(Error::Param("samples must be at least 1".into()));
    }
    let parties = qubit_parties(state)?;
    let threshold = bound_separable(state.parties(), 2);
    let shards = config.samples.div_ceil(SHARD_SIZE);
    let sums: Vec<ShardSums> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(shard));
            let count = SHARD_SIZE.min(config.samples - shard * SHARD_SIZE);
            let mut acc = ShardSums::default();
            let mut bases = vec![[[Complex64::new(0.0, 0.0); 2]; 2]; parties];
            for _ in 0..count {
                for b in bases.iter_mut() {
                    let h = haar_basis(2, &mut rng).expect("dim 2 is valid");
                    let v = h.vectors();
                    *b = [[v[0][0], v[0][1]], [v[1][0], v[1][1]]];
                }
                let y = qubit_collectibility(state, &bases);
                acc.sum += y;
                acc.sum_sq += y * y;
                acc.max = acc.max.max(y);
                if y > threshold {
                    acc.hits += 1;
                }
            }
            acc
        })
        .collect();
    let total = sums.iter().fold(ShardSums::default(), |a, s| ShardSums {
        sum: a.sum + s.sum,
        sum_sq: a.sum_sq + s.sum_sq,
        hits: a.hits + s.hits,
        max: a.max.max(s.max),
    });
    Ok((total, parties))
}

/// Mean collectibility over Haar-random detector bases on parties `B..K`.
pub fn mc_average(state: &StateVector, config: &McConfig) -> Result<McEstimate> {
    let (sums, _) = sample_shards(state, config)?;
    let n = config.samples as f64;
    let mean = sums.sum / n;
    let var = if config.samples > 1 {
        ((sums.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples: config.samples,
        seed: config.seed,
    })
}

/// Fraction of Haar-random detector settings whose collectibility exceeds
/// the separability threshold `2^{-2K}` (strictly).
pub fn mc_detect_prob(state: &StateVector, config: &McConfig) -> Result<McEstimate> {
    let (sums, _) = sample_shards(state, config)?;
    let n = config.samples as f64;
    let p = sums.hits as f64 / n;
    Ok(McEstimate {
        mean: p,
        stderr: (p * (1.0 - p) / n).sqrt(),
        samples: config.samples,
        seed: config.seed,
    })
}

/// Largest collectibility seen over the Haar samples.
pub fn mc_max(state: &StateVector, config: &McConfig) -> Result<f64> {
    Ok(sample_shards(state, config)?.0.max)
}

/// One row of the two-qubit sweep. Collectibilities are rescaled by
/// `r(Y) = (16Y − 1)/3`, positive exactly when entanglement is detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub psi: f64,
    pub r_min: f64,
    pub r_mean: f64,
    pub r_max: f64,
    pub p_detect: f64,
}

pub fn rescale(y: f64) -> f64 {
    (16.0 * y - 1.0) / 3.0
}

/// Closed-form curves at `points` equally spaced Schmidt angles on `[0, π]`.
pub fn sweep_fig1(points: usize) -> Result<Vec<SweepRow>> {
    if points < 2 {
        return Err(Error::Param("a sweep needs at least 2 points".into()));
    }
    (0..points)
        .map(|i| {
            let psi = PI * i as f64 / (points - 1) as f64;
            let (lo, hi) = two_qubit_extremes(psi)?;
            Ok(SweepRow {
                psi,
                r_min: rescale(lo),
                r_mean: rescale(two_qubit_mean(psi)?),
                r_max: rescale(hi),
                p_detect: two_qubit_detect_prob(psi)?,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "psi,r_min,r_mean,r_max,p_detect";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_g17(r.psi),
            format_g17(r.r_min),
            format_g17(r.r_mean),
            format_g17(r.r_max),
            format_g17(r.p_detect)
        );
    }
    out
}
