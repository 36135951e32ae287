//! Randomized checks of the collectibility bounds.
//!
//! Each draw pairs a Haar-random state with Haar-random `N = 2` detector
//! bases and checks `Y <= 1/4` and `Z = -ln Y >= 2 ln 2` for both the full
//! projection product and the Gram-formula value; it also checks the
//! Gram-formula value is never below the full product with the same `B..K`
//! bases. A random product state is drawn alongside and checked against
//! `Y <= 2^{-2K}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{haar_basis, DetectorSet};
use crate::collect::{
    bound_max, bound_separable, conditional_collectibility, conditionals, projection_product,
    BOUND_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::state::{random_product_state, random_state, StateVector};

const N: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanConfig {
    pub num: u64,
    pub parties: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    /// `Y > 1/4` for either evaluation path.
    pub max_bound: u64,
    /// `Z < 2 ln 2`.
    pub entropic: u64,
    /// Gram-formula value below the full product it maximizes.
    pub gram_dominance: u64,
    /// Product state with `Y > 2^{-2K}`.
    pub separable: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.max_bound + self.entropic + self.gram_dominance + self.separable
    }

    fn add(self, o: Violations) -> Violations {
        Violations {
            max_bound: self.max_bound + o.max_bound,
            entropic: self.entropic + o.entropic,
            gram_dominance: self.gram_dominance + o.gram_dominance,
            separable: self.separable + o.separable,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMaxima {
    pub random: f64,
    pub random_gram: f64,
    pub product: f64,
    pub product_gram: f64,
}

impl ClassMaxima {
    fn merge(self, o: ClassMaxima) -> ClassMaxima {
        ClassMaxima {
            random: self.random.max(o.random),
            random_gram: self.random_gram.max(o.random_gram),
            product: self.product.max(o.product),
            product_gram: self.product_gram.max(o.product_gram),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverrideCheck {
    pub dims: Vec<usize>,
    /// Projection product at computational bases on every party.
    pub y_computational: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub num: u64,
    pub parties: usize,
    pub seed: u64,
    pub bound_max: f64,
    pub bound_separable: f64,
    pub violations: Violations,
    pub total_violations: u64,
    pub max_y: ClassMaxima,
    /// Smallest finite `Z` seen over the random class.
    pub min_z: Option<f64>,
    #[serde(rename = "override", skip_serializing_if = "Option::is_none")]
    pub override_check: Option<OverrideCheck>,
}

#[derive(Default)]
struct DrawOutcome {
    violations: Violations,
    maxima: ClassMaxima,
    min_z: Option<f64>,
}

fn random_detectors(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<DetectorSet> {
    let bases = dims
        .iter()
        .map(|&d| haar_basis(d, rng).map(|b| b.truncated(N)))
        .collect::<Result<Vec<_>>>()?;
    DetectorSet::new((0..dims.len()).collect(), bases)
}

/// Full product and Gram-formula value sharing the `B..K` bases.
fn both_paths(state: &StateVector, full: &DetectorSet) -> Result<(f64, f64)> {
    let y = projection_product(state, full)?;
    let rest = DetectorSet::new(full.parties()[1..].to_vec(), full.bases()[1..].to_vec())?;
    let y_gram = conditional_collectibility(&conditionals(state, &rest));
    Ok((y, y_gram))
}

fn one_draw(dims: &[usize], fixed: Option<&StateVector>, seed: u64) -> Result<DrawOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = dims.len();
    let cap = bound_max(N) + BOUND_TOLERANCE;
    let sep_cap = bound_separable(k, N) + BOUND_TOLERANCE;
    let z_floor = (N as f64) * (N as f64).ln() - BOUND_TOLERANCE;
    let mut out = DrawOutcome::default();

    let state = match fixed {
        Some(s) => s.clone(),
        None => random_state(dims, &mut rng)?,
    };
    let det = random_detectors(dims, &mut rng)?;
    let (y, y_gram) = both_paths(&state, &det)?;
    out.violations.max_bound += u64::from(y > cap) + u64::from(y_gram > cap);
    out.violations.gram_dominance += u64::from(y_gram < y - BOUND_TOLERANCE);
    if y > 0.0 {
        let z = -y.ln();
        out.violations.entropic += u64::from(z < z_floor);
        out.min_z = Some(z);
    }
    out.maxima.random = y;
    out.maxima.random_gram = y_gram;

    let product = random_product_state(dims, &mut rng)?;
    let det = random_detectors(dims, &mut rng)?;
    let (y, y_gram) = both_paths(&product, &det)?;
    out.violations.separable += u64::from(y > sep_cap) + u64::from(y_gram > sep_cap);
    out.maxima.product = y;
    out.maxima.product_gram = y_gram;
    Ok(out)
}

/// Runs `num` draws; draw `i` uses the stream seeded with `seed + i`. With
/// `fixed`, that state replaces the random one and its dims replace
/// `parties` qubits.
pub fn bound_scan(config: &ScanConfig, fixed: Option<&StateVector>) -> Result<ScanSummary> {
    if config.num == 0 {
        return Err(Error::Param("num must be at least 1".into()));
    }
    let dims: Vec<usize> = match fixed {
        Some(s) => s.dims().to_vec(),
        None => {
            if config.parties < 2 {
                return Err(Error::Param("a bound scan needs at least 2 parties".into()));
            }
            vec![2; config.parties]
        }
    };
    if dims.len() < 2 {
        return Err(Error::Shape("a bound scan needs at least 2 parties".into()));
    }
    let outcomes = (0..config.num)
        .into_par_iter()
        .map(|i| one_draw(&dims, fixed, config.seed.wrapping_add(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Violations::default();
    let mut max_y = ClassMaxima::default();
    let mut min_z: Option<f64> = None;
    for o in outcomes {
        violations = violations.add(o.violations);
        max_y = max_y.merge(o.maxima);
        min_z = match (min_z, o.min_z) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    let override_check = match fixed {
        Some(s) => {
            let det = DetectorSet::computational(s.dims(), (0..s.parties()).collect(), N)?;
            Some(OverrideCheck {
                dims: s.dims().to_vec(),
                y_computational: projection_product(s, &det)?,
            })
        }
        None => None,
    };
    Ok(ScanSummary {
        num: config.num,
        parties: dims.len(),
        seed: config.seed,
        bound_max: bound_max(N),
        bound_separable: bound_separable(dims.len(), N),
        total_violations: violations.total(),
        violations,
        max_y,
        min_z,
        override_check,
    })
}
