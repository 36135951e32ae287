//! Forward models of the two Gram-matrix measurement schemes for two-qubit
//! states, with finite-shot sampling and a plug-in estimator.
//!
//! Both schemes use two identical copies of the state. Party B of copy 1
//! and copy 2 is measured in the detector basis, giving outcome
//! probabilities `p_1i = G_ii` and `p_2j = G_jj`. Party A then either
//! interferes on a beamsplitter (`hom`: double-click probability
//! `p_ij(+,+) = ½(1 − |<φ̂_i|φ̂_j>|²)`) or enters a swap test (`swap`: control
//! expectation `<σ_z>_ij = |<φ̂_i|φ̂_j>|²`). Either way
//! `|G_ij|² = p_1i·p_2j·(1 − 2p_ij(+,+)) = p_1i·p_2j·<σ_z>_ij`.
//!
//! Every stage (copy 1, copy 2 and each `(i, j)` pair) gets its own budget
//! of `shots`.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::basis::{BlochAngles, DetectorSet};
use crate::collect::{
    bound_separable, conditionals, evaluate, gram_formula, gram_matrix, Verdict,
};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Conditional states with `G_ii` below this are treated as empty.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Offset between the sampling seed and the bootstrap stream.
pub const BOOTSTRAP_SEED_OFFSET: u64 = 1_000_000;
/// Standard errors by which the estimate must clear `1/16` to count as
/// entangled.
pub const SIGNIFICANCE_LEVEL: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Hom,
    Swap,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Hom => "hom",
            Scheme::Swap => "swap",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hom" => Ok(Scheme::Hom),
            "swap" => Ok(Scheme::Swap),
            _ => Err(Error::Parse(format!("unknown scheme `{s}` (expected hom or swap)"))),
        }
    }
}

/// Exact outcome probabilities of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeProbabilities {
    pub scheme: Scheme,
    pub p1: [f64; 2],
    pub p2: [f64; 2],
    /// `p_ij(+,+)` for `hom`, `<σ_z>_ij` for `swap`; `None` where a
    /// conditional state is empty.
    pub coincidence: [[Option<f64>; 2]; 2],
}

impl SchemeProbabilities {
    /// `|G_ij|²` recovered from the scheme's probabilities.
    pub fn g2(&self) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if let Some(c) = self.coincidence[i][j] {
                    *cell = self.p1[i] * self.p2[j] * overlap_factor(self.scheme, c);
                }
            }
        }
        out
    }

    /// Probability of the counted outcome in each `(i, j)` stage: the double
    /// click for `hom`, control outcome `0` for `swap`.
    fn stage_probability(&self, c: f64) -> f64 {
        match self.scheme {
            Scheme::Hom => c,
            Scheme::Swap => 0.5 * (1.0 + c),
        }
        .clamp(0.0, 1.0)
    }
}

fn overlap_factor(scheme: Scheme, c: f64) -> f64 {
    match scheme {
        Scheme::Hom => 1.0 - 2.0 * c,
        Scheme::Swap => c,
    }
}

fn two_qubit_check(state: &StateVector) -> Result<()> {
    if state.dims() != [2, 2] {
        return Err(Error::Shape(format!(
            "the measurement schemes need a two-qubit state, got dims {:?}",
            state.dims()
        )));
    }
    Ok(())
}

fn forward(state: &StateVector, angles: BlochAngles, scheme: Scheme) -> Result<SchemeProbabilities> {
    two_qubit_check(state)?;
    let detectors = DetectorSet::from_angles(vec![1], &[angles])?;
    let phis = conditionals(state, &detectors);
    let norms: Vec<f64> = phis
        .iter()
        .map(|v| v.iter().map(|x| x.norm_sqr()).sum())
        .collect();
    let mut coincidence = [[None; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if norms[i] < DEGENERATE_TOLERANCE || norms[j] < DEGENERATE_TOLERANCE {
                continue;
            }
            let overlap = if i == j {
                1.0
            } else {
                let g: Complex64 = phis[i].iter().zip(&phis[j]).map(|(a, b)| a.conj() * b).sum();
                (g.norm_sqr() / (norms[i] * norms[j])).clamp(0.0, 1.0)
            };
            coincidence[i][j] = Some(match scheme {
                Scheme::Hom => 0.5 * (1.0 - overlap),
                Scheme::Swap => overlap,
            });
        }
    }
    let total = norms[0] + norms[1];
    let p = [norms[0] / total, norms[1] / total];
    let probs = SchemeProbabilities {
        scheme,
        p1: p,
        p2: p,
        coincidence,
    };
    if cfg!(debug_assertions) {
        let direct = gram_matrix(state, &detectors)?;
        let g2 = probs.g2();
        for i in 0..2 {
            for j in 0..2 {
                if probs.coincidence[i][j].is_some() {
                    debug_assert!((g2[i][j] - direct.entry(i, j).norm_sqr()).abs() < 1e-12);
                }
            }
        }
    }
    Ok(probs)
}

/// Beamsplitter (two-photon interference) scheme.
pub fn hom_forward(state: &StateVector, angles: BlochAngles) -> Result<SchemeProbabilities> {
    forward(state, angles, Scheme::Hom)
}

/// Controlled-SWAP network scheme.
pub fn swap_forward(state: &StateVector, angles: BlochAngles) -> Result<SchemeProbabilities> {
    forward(state, angles, Scheme::Swap)
}

/// Simulated detector counts, one binomial stage per measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub scheme: Scheme,
    pub shots: u64,
    pub seed: u64,
    /// Outcome counts of party B on copy 1 and copy 2.
    pub copy1: [u64; 2],
    pub copy2: [u64; 2],
    /// Double clicks (`hom`) or control-`0` outcomes (`swap`) per `(i, j)`.
    pub coincidence: [[Option<u64>; 2]; 2],
}

fn binomial<R: rand::Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    Binomial::new(n, p.clamp(0.0, 1.0))
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Draws counts for every stage from its exact binomial law.
pub fn sample_experiment(probs: &SchemeProbabilities, shots: u64, seed: u64) -> Result<CountsRecord> {
    if shots == 0 {
        return Err(Error::Param("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k1 = binomial(shots, probs.p1[0], &mut rng);
    let k2 = binomial(shots, probs.p2[0], &mut rng);
    let mut coincidence = [[None; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if let Some(c) = probs.coincidence[i][j] {
                coincidence[i][j] = Some(binomial(shots, probs.stage_probability(c), &mut rng));
            }
        }
    }
    Ok(CountsRecord {
        scheme: probs.scheme,
        shots,
        seed,
        copy1: [k1, shots - k1],
        copy2: [k2, shots - k2],
        coincidence,
    })
}

/// Relative frequencies of every stage; the plug-in estimator works on
/// these.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequencies {
    pub scheme: Scheme,
    pub copy1: [f64; 2],
    pub copy2: [f64; 2],
    pub coincidence: [[Option<f64>; 2]; 2],
}

impl Frequencies {
    pub fn from_counts(counts: &CountsRecord) -> Result<Self> {
        if counts.shots == 0 {
            return Err(Error::EmptyCounts);
        }
        let n = counts.shots as f64;
        let mut coincidence = [[None; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                coincidence[i][j] = counts.coincidence[i][j].map(|k| k as f64 / n);
            }
        }
        Ok(Frequencies {
            scheme: counts.scheme,
            copy1: [counts.copy1[0] as f64 / n, counts.copy1[1] as f64 / n],
            copy2: [counts.copy2[0] as f64 / n, counts.copy2[1] as f64 / n],
            coincidence,
        })
    }

    /// Frequencies equal to the exact probabilities (infinite-shot limit).
    pub fn exact(probs: &SchemeProbabilities) -> Self {
        let mut coincidence = [[None; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                coincidence[i][j] = probs.coincidence[i][j].map(|c| probs.stage_probability(c));
            }
        }
        Frequencies {
            scheme: probs.scheme,
            copy1: probs.p1,
            copy2: probs.p2,
            coincidence,
        }
    }

    /// Plug-in `|G_ij|²` (clamped at 0) and the collectibility built from
    /// `G_11 ≈ p̂_1(1)`, `G_22 ≈ p̂_2(2)` and `|G_12|²`.
    pub fn plug_in(&self) -> ([[f64; 2]; 2], f64) {
        let mut g2 = [[0.0; 2]; 2];
        for (i, row) in g2.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if let Some(f) = self.coincidence[i][j] {
                    let factor = match self.scheme {
                        Scheme::Hom => 1.0 - 2.0 * f,
                        Scheme::Swap => 2.0 * f - 1.0,
                    };
                    *cell = (self.copy1[i] * self.copy2[j] * factor).max(0.0);
                }
            }
        }
        let y = gram_formula(self.copy1[0], self.copy2[1], g2[0][1]);
        (g2, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramEstimate {
    pub g2: [[f64; 2]; 2],
    pub stderr: [[f64; 2]; 2],
    pub shots: u64,
    pub y_estimate: f64,
    pub y_stderr: f64,
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Plug-in Gram estimate with nonparametric bootstrap standard errors.
pub fn estimate_gram(counts: &CountsRecord) -> Result<GramEstimate> {
    let freqs = Frequencies::from_counts(counts)?;
    let (g2, y_estimate) = freqs.plug_in();
    let n = counts.shots;
    let mut rng = ChaCha8Rng::seed_from_u64(counts.seed.wrapping_add(BOOTSTRAP_SEED_OFFSET));
    let mut ys = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut g2s = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let k1 = binomial(n, freqs.copy1[0], &mut rng) as f64 / n as f64;
        let k2 = binomial(n, freqs.copy2[0], &mut rng) as f64 / n as f64;
        let mut coincidence = [[None; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                coincidence[i][j] = freqs.coincidence[i][j]
                    .map(|f| binomial(n, f, &mut rng) as f64 / n as f64);
            }
        }
        let replicate = Frequencies {
            scheme: freqs.scheme,
            copy1: [k1, 1.0 - k1],
            copy2: [k2, 1.0 - k2],
            coincidence,
        };
        let (g, y) = replicate.plug_in();
        ys.push(y);
        g2s.push(g);
    }
    let mut stderr = [[0.0; 2]; 2];
    for (i, row) in stderr.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let column: Vec<f64> = g2s.iter().map(|g| g[i][j]).collect();
            *cell = std_dev(&column);
        }
    }
    Ok(GramEstimate {
        g2,
        stderr,
        shots: n,
        y_estimate,
        y_stderr: std_dev(&ys),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scheme: Scheme,
    pub shots: u64,
    pub seed: u64,
    pub exact_y: f64,
    pub y_estimate: f64,
    pub y_stderr: f64,
    pub g2: [[f64; 2]; 2],
    pub verdict: Verdict,
    /// `(y_estimate − 1/16) / y_stderr`; `None` when the standard error is 0.
    pub significance: Option<f64>,
}

/// Forward model, sampling, estimation and a noise-aware verdict: the state
/// counts as entangled when the estimate exceeds `1/16` by more than
/// [`SIGNIFICANCE_LEVEL`] standard errors.
pub fn run_experiment(
    state: &StateVector,
    angles: BlochAngles,
    scheme: Scheme,
    shots: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    two_qubit_check(state)?;
    let probs = forward(state, angles, scheme)?;
    let detectors = DetectorSet::from_angles(vec![1], &[angles])?;
    let exact_y = evaluate(state, &detectors)?.value;
    let counts = sample_experiment(&probs, shots, seed)?;
    let estimate = estimate_gram(&counts)?;
    let threshold = bound_separable(2, 2);
    let excess = estimate.y_estimate - threshold;
    let significance = (estimate.y_stderr > 0.0).then(|| excess / estimate.y_stderr);
    let verdict = match significance {
        Some(s) if s > SIGNIFICANCE_LEVEL => Verdict::Entangled,
        _ => Verdict::Inconclusive,
    };
    Ok(ExperimentReport {
        scheme,
        shots,
        seed,
        exact_y,
        y_estimate: estimate.y_estimate,
        y_stderr: estimate.y_stderr,
        g2: estimate.g2,
        verdict,
        significance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collect::two_qubit_y;
    use crate::state::{make_state, named_state};
    use std::f64::consts::PI;

    fn angles(theta: f64) -> BlochAngles {
        BlochAngles::new(theta, 0.0).unwrap()
    }

    #[test]
    fn hom_bell_computational() {
        let bell = named_state("bell", &[]).unwrap();
        let p = hom_forward(&bell, angles(0.0)).unwrap();
        assert_eq!(p.p1, [0.5, 0.5]);
        assert_eq!(p.p2, [0.5, 0.5]);
        assert_eq!(p.coincidence[0][1], Some(0.5));
        assert_eq!(p.coincidence[0][0], Some(0.0));
        assert_eq!(p.g2()[0][1], 0.0);
    }

    #[test]
    fn hom_product_state_equator() {
        let s = named_state("sep", &[]).unwrap();
        let p = hom_forward(&s, angles(PI / 2.0)).unwrap();
        assert!((p.p1[0] - 0.5).abs() < 1e-15 && (p.p2[1] - 0.5).abs() < 1e-15);
        assert!(p.coincidence[0][1].unwrap().abs() < 1e-15);
        // G_12 = 1/2 here; the collectibility is 1/16
        assert!((p.g2()[0][1] - 0.25).abs() < 1e-15);
        let (_, y) = Frequencies::exact(&p).plug_in();
        assert!((y - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn swap_examples() {
        let bell = named_state("bell", &[]).unwrap();
        let p = swap_forward(&bell, angles(0.0)).unwrap();
        assert_eq!(p.coincidence[0][1], Some(0.0));
        assert_eq!(p.g2()[0][1], 0.0);

        let h = Complex64::new(0.5, 0.0);
        let plus_plus = make_state(vec![h; 4], &[2, 2]).unwrap();
        let p = swap_forward(&plus_plus, angles(0.0)).unwrap();
        assert_eq!(p.p1, [0.5, 0.5]);
        assert!((p.coincidence[0][1].unwrap() - 1.0).abs() < 1e-15);
        assert!((p.g2()[0][1] - 0.25).abs() < 1e-15);

        let s = named_state("schmidt", &[0.9]).unwrap();
        let p = swap_forward(&s, angles(1.2)).unwrap();
        assert_eq!(p.coincidence[0][0], Some(1.0));
        assert_eq!(p.coincidence[1][1], Some(1.0));
    }

    #[test]
    fn schemes_match_direct_gram() {
        let s = named_state("schmidt", &[PI / 3.0]).unwrap();
        let a = angles(PI / 4.0);
        let direct = gram_matrix(&s, &DetectorSet::from_angles(vec![1], &[a]).unwrap()).unwrap();
        for probs in [hom_forward(&s, a).unwrap(), swap_forward(&s, a).unwrap()] {
            let g2 = probs.g2();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((g2[i][j] - direct.entry(i, j).norm_sqr()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_conditionals_are_flagged() {
        let s = named_state("sep", &[]).unwrap();
        let p = hom_forward(&s, angles(0.0)).unwrap();
        assert_eq!(p.p1, [1.0, 0.0]);
        assert!(p.coincidence[0][0].is_some());
        assert!(p.coincidence[0][1].is_none() && p.coincidence[1][1].is_none());
        assert_eq!(p.g2()[0][1], 0.0);
        let counts = sample_experiment(&p, 100, 3).unwrap();
        assert!(counts.coincidence[1][0].is_none());
        assert_eq!(estimate_gram(&counts).unwrap().y_estimate, 0.0);
    }

    #[test]
    fn rejects_non_two_qubit_states() {
        let ghz = named_state("ghz", &[]).unwrap();
        assert!(matches!(hom_forward(&ghz, angles(0.0)), Err(Error::Shape(_))));
        assert!(run_experiment(&ghz, angles(0.0), Scheme::Swap, 10, 0).is_err());
    }

    #[test]
    fn sampling_concentrates_and_is_deterministic() {
        let bell = named_state("bell", &[]).unwrap();
        let p = hom_forward(&bell, angles(0.0)).unwrap();
        let n = 1_000_000;
        let counts = sample_experiment(&p, n, 17).unwrap();
        let frac = counts.coincidence[0][1].unwrap() as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() < 5.0 * sigma);
        assert_eq!(counts, sample_experiment(&p, n, 17).unwrap());
    }

    #[test]
    fn single_shot_is_one_hot() {
        let s = named_state("schmidt", &[1.0]).unwrap();
        let p = hom_forward(&s, angles(0.7)).unwrap();
        for seed in 0..20 {
            let c = sample_experiment(&p, 1, seed).unwrap();
            assert_eq!(c.copy1[0] + c.copy1[1], 1);
            assert_eq!(c.copy2[0] + c.copy2[1], 1);
            for row in c.coincidence {
                for k in row.into_iter().flatten() {
                    assert!(k <= 1);
                }
            }
        }
        assert!(sample_experiment(&p, 0, 0).is_err());
    }

    #[test]
    fn exact_frequencies_reproduce_closed_form() {
        let (psi, theta) = (PI / 3.0, PI / 4.0);
        let s = named_state("schmidt", &[psi]).unwrap();
        let want = two_qubit_y(psi, theta).unwrap();
        for probs in [hom_forward(&s, angles(theta)).unwrap(), swap_forward(&s, angles(theta)).unwrap()] {
            let (_, y) = Frequencies::exact(&probs).plug_in();
            assert!((y - want).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_overlap_estimates_are_clamped() {
        let counts = CountsRecord {
            scheme: Scheme::Hom,
            shots: 100,
            seed: 0,
            copy1: [50, 50],
            copy2: [40, 60],
            coincidence: [[Some(0), Some(55)], [Some(55), Some(0)]],
        };
        let est = estimate_gram(&counts).unwrap();
        assert_eq!(est.g2[0][1], 0.0);
        assert!((est.g2[0][0] - 0.5 * 0.4).abs() < 1e-15);
        let g = (0.5f64 * 0.6).sqrt() * 2.0;
        assert!((est.y_estimate - g * g / 4.0).abs() < 1e-15);

        let empty = CountsRecord { shots: 0, ..counts };
        assert!(matches!(estimate_gram(&empty), Err(Error::EmptyCounts)));
    }

    #[test]
    fn run_experiment_examples() {
        let bell = named_state("bell", &[]).unwrap();
        let r = run_experiment(&bell, angles(PI / 4.0), Scheme::Hom, 100_000, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Entangled);
        assert!(r.significance.unwrap() > 5.0);
        assert!((r.y_estimate - 0.25).abs() < 5.0 * r.y_stderr);

        let sep = named_state("sep", &[]).unwrap();
        let r = run_experiment(&sep, angles(PI / 2.0), Scheme::Swap, 100_000, 1).unwrap();
        assert!((r.exact_y - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Inconclusive);

        let weak = named_state("schmidt", &[PI / 12.0]).unwrap();
        let r = run_experiment(&weak, angles(0.0), Scheme::Hom, 10_000, 5).unwrap();
        assert!((r.exact_y - (PI / 12.0).sin().powi(2) / 4.0).abs() < 1e-15);
        assert!((r.exact_y - 0.0167).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn diagonal_matches_product_of_marginals() {
        let s = named_state("schmidt", &[1.1]).unwrap();
        let p = hom_forward(&s, angles(0.9)).unwrap();
        let counts = sample_experiment(&p, 5000, 8).unwrap();
        let f = Frequencies::from_counts(&counts).unwrap();
        let (g2, _) = f.plug_in();
        for i in 0..2 {
            assert!((g2[i][i] - f.copy1[i] * f.copy2[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("HOM".parse::<Scheme>().unwrap(), Scheme::Hom);
        assert_eq!(Scheme::Swap.to_string(), "swap");
        assert!("x".parse::<Scheme>().is_err());
    }
}
