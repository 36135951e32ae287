//! Collectibility: projection products, Gram matrices of conditional states,
//! the closed-form one-step maximum for qubit detectors, the two-qubit
//! analytic curves and the separability verdict.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{conditional_with_weights, DetectorSet};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Slack allowed on Hermiticity and Cauchy–Schwarz before a Gram matrix is
/// rejected.
pub const GRAM_TOLERANCE: f64 = 1e-12;

/// Slack allowed above `N^-N` before a collectibility value is rejected.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Largest attainable collectibility, `N^-N`.
pub fn bound_max(n: usize) -> f64 {
    (n as f64).powf(-(n as f64))
}

/// Separability threshold `α_{K,N} = N^{-N·K}`.
pub fn bound_separable(k: usize, n: usize) -> f64 {
    (n as f64).powf(-((n * k) as f64))
}

/// `Π_j |<Ψ|χ_j>|²` for a detector set covering every party.
pub fn projection_product(state: &StateVector, detectors: &DetectorSet) -> Result<f64> {
    detectors.check_full(state)?;
    let product = (0..detectors.n())
        .map(|j| {
            let w = detectors.bra_weights(j);
            state
                .amplitudes()
                .iter()
                .zip(&w)
                .map(|(a, x)| a * x)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .product();
    Ok(product)
}

/// Overlaps `G_jk = <φ_j|φ_k>` of the conditional states.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Vec<Vec<Complex64>>,
}

impl GramMatrix {
    /// Validates Hermiticity, a real nonnegative diagonal and (for `n = 2`)
    /// Cauchy–Schwarz.
    pub fn new(entries: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("Gram matrix must be square and nonempty".into()));
        }
        for j in 0..n {
            let d = entries[j][j];
            if d.re < -GRAM_TOLERANCE || d.im.abs() > GRAM_TOLERANCE {
                return Err(Error::Gram(format!("diagonal entry {j} is {d}")));
            }
            for k in j + 1..n {
                if (entries[j][k] - entries[k][j].conj()).norm() > GRAM_TOLERANCE {
                    return Err(Error::Gram(format!("entries ({j},{k}) not Hermitian")));
                }
            }
        }
        if n == 2 {
            let excess = entries[0][1].norm_sqr() - entries[0][0].re * entries[1][1].re;
            if excess > GRAM_TOLERANCE {
                return Err(Error::Gram(format!(
                    "|G_12|² exceeds G_11·G_22 by {excess}"
                )));
            }
        }
        Ok(GramMatrix { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j][k]
    }

    pub fn entries(&self) -> &[Vec<Complex64>] {
        &self.entries
    }
}

pub(crate) fn conditionals(state: &StateVector, detectors: &DetectorSet) -> Vec<Vec<Complex64>> {
    (0..detectors.n())
        .map(|j| conditional_with_weights(state, &detectors.bra_weights(j)))
        .collect()
}

pub(crate) fn gram_from_conditionals(phis: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    phis.iter()
        .map(|a| {
            phis.iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
                .collect()
        })
        .collect()
}

/// Gram matrix of the conditional states for detectors on parties `B..K`.
pub fn gram_matrix(state: &StateVector, detectors: &DetectorSet) -> Result<GramMatrix> {
    detectors.check_conditional(state)?;
    let mut entries = gram_from_conditionals(&conditionals(state, detectors));
    // exact Hermitian symmetry and real diagonal
    for j in 0..entries.len() {
        entries[j][j] = Complex64::new(entries[j][j].re, 0.0);
        for k in 0..j {
            entries[j][k] = entries[k][j].conj();
        }
    }
    GramMatrix::new(entries)
}

/// `¼(√(G11·G22) + √(G11·G22 − |G12|²))²`, with the difference clamped at 0.
pub fn gram_formula(g11: f64, g22: f64, g12_sq: f64) -> f64 {
    let prod = (g11 * g22).max(0.0);
    gram_formula_det(g11, g22, prod - g12_sq)
}

/// Same closed form with the Gram determinant `G11·G22 − |G12|²` given
/// directly.
pub(crate) fn gram_formula_det(g11: f64, g22: f64, det: f64) -> f64 {
    let s = (g11 * g22).max(0.0).sqrt() + det.max(0.0).sqrt();
    0.25 * s * s
}

/// `‖u‖²‖v‖² − |<u|v>|²` summed as `Σ_{a<b} |u_a v_b − u_b v_a|²`, which
/// stays exactly 0 for parallel vectors instead of cancelling to noise.
pub(crate) fn gram_determinant(u: &[Complex64], v: &[Complex64]) -> f64 {
    let mut det = 0.0;
    for a in 0..u.len() {
        for b in a + 1..u.len() {
            det += (u[a] * v[b] - u[b] * v[a]).norm_sqr();
        }
    }
    det
}

/// Gram-formula collectibility straight from the two conditional states.
pub(crate) fn conditional_collectibility(phis: &[Vec<Complex64>]) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    gram_formula_det(norm(&phis[0]), norm(&phis[1]), gram_determinant(&phis[0], &phis[1]))
}

/// Gram-formula collectibility for qubit detectors on parties `B..K`, given
/// as `bases[party][j] = |a_j>`. Shape checks are the caller's job.
pub(crate) fn qubit_collectibility(state: &StateVector, bases: &[[[Complex64; 2]; 2]]) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let mut weights = [vec![one], vec![one]];
    for basis in bases {
        for (j, w) in weights.iter_mut().enumerate() {
            let [x0, x1] = basis[j];
            *w = w.iter().flat_map(|v| [v * x0.conj(), v * x1.conj()]).collect();
        }
    }
    let rest = weights[0].len();
    let phis: Vec<Vec<Complex64>> = weights
        .iter()
        .map(|w| {
            state
                .amplitudes()
                .chunks_exact(rest)
                .map(|row| row.iter().zip(w).map(|(a, x)| a * x).sum())
                .collect()
        })
        .collect();
    conditional_collectibility(&phis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Entangled,
    Inconclusive,
}

/// How a collectibility value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputationPath {
    GramFormula,
    FullProduct,
    ClosedForm,
    Optimizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectibilityReport {
    pub value: f64,
    /// `-ln Y`; `None` stands for `+∞` when `Y = 0`.
    #[serde(rename = "z")]
    pub z_value: Option<f64>,
    pub bound_max: f64,
    pub bound_sep: f64,
    pub verdict: Verdict,
    pub path: ComputationPath,
}

/// Separability verdict for a collectibility value of a `k`-party system
/// with `n` detector states per party.
///
/// Entangled iff `y > n^{-n·k}`. Values above `n^-n` are impossible and
/// signal inconsistent inputs.
pub fn verdict(y: f64, k: usize, n: usize, path: ComputationPath) -> Result<CollectibilityReport> {
    if k < 2 || n < 2 {
        return Err(Error::Param(format!("verdict needs k, n >= 2, got k={k}, n={n}")));
    }
    if y.is_nan() || y < 0.0 {
        return Err(Error::Range(format!("collectibility {y} is negative or NaN")));
    }
    let bound_max = bound_max(n);
    if y > bound_max + BOUND_TOLERANCE {
        return Err(Error::Bound {
            value: y,
            bound: bound_max,
        });
    }
    let bound_sep = bound_separable(k, n);
    let z_value = (y > 0.0).then(|| -y.ln());
    Ok(CollectibilityReport {
        value: y,
        z_value,
        bound_max,
        bound_sep,
        verdict: if y > bound_sep {
            Verdict::Entangled
        } else {
            Verdict::Inconclusive
        },
        path,
    })
}

/// Collectibility of a `k`-party state from its 2×2 Gram matrix.
pub fn collectibility_gram(gram: &GramMatrix, k: usize) -> Result<CollectibilityReport> {
    if gram.n() != 2 {
        return Err(Error::Size(format!(
            "the closed form needs N = 2, got N = {}",
            gram.n()
        )));
    }
    let y = gram_formula(
        gram.entry(0, 0).re,
        gram.entry(1, 1).re,
        gram.entry(0, 1).norm_sqr(),
    );
    verdict(y, k, 2, ComputationPath::GramFormula)
}

/// Collectibility for detectors on `B..K` (Gram path) or on every party
/// (projection product), picked from the parties the set covers.
pub fn evaluate(state: &StateVector, detectors: &DetectorSet) -> Result<CollectibilityReport> {
    let k = state.parties();
    if detectors.check_full(state).is_ok() {
        let y = projection_product(state, detectors)?;
        return verdict(y, k, detectors.n(), ComputationPath::FullProduct);
    }
    detectors.check_conditional(state)?;
    if detectors.n() != 2 {
        return Err(Error::Size(format!(
            "the closed form needs N = 2, got N = {}",
            detectors.n()
        )));
    }
    let y = conditional_collectibility(&conditionals(state, detectors));
    verdict(y, k, 2, ComputationPath::GramFormula)
}

fn check_angle(name: &str, x: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=PI + SLACK).contains(&x) {
        return Err(Error::Range(format!("{name} = {x} outside [0, π]")));
    }
    Ok(x.clamp(0.0, PI))
}

/// Every two-qubit closed form is symmetric under `ψ → π − ψ`; evaluating on
/// `[0, π/2]` keeps `sin ψ` exact at `ψ = π`.
fn folded_psi(psi: f64) -> Result<f64> {
    let psi = check_angle("ψ", psi)?;
    Ok(psi.min(PI - psi))
}

/// Two-qubit collectibility of the Schmidt state with angle `psi` for the
/// detector polar angle `theta` (independent of the azimuth).
pub fn two_qubit_y(psi: f64, theta: f64) -> Result<f64> {
    let psi = folded_psi(psi)?;
    let theta = check_angle("θ", theta)?;
    let cos_psi = psi.cos();
    let radicand = (3.0 - 2.0 * (2.0 * theta).cos() * cos_psi * cos_psi - (2.0 * psi).cos()).max(0.0);
    let s = 2.0 * psi.sin() + radicand.sqrt();
    Ok(s * s / 64.0)
}

/// `(Y_min, Y_max) = (sin²ψ/4, (1 + sin ψ)²/16)`, attained at `θ = 0` and
/// `θ = π/2`.
pub fn two_qubit_extremes(psi: f64) -> Result<(f64, f64)> {
    let s = folded_psi(psi)?.sin();
    Ok((s * s / 4.0, (1.0 + s) * (1.0 + s) / 16.0))
}

/// Guard band around `ψ = π/2`, where the closed form is `0·∞`.
const MEAN_GUARD: f64 = 1e-7;

/// Average of `Y_θ(ψ)` over the uniform Bloch-sphere measure of the
/// detector direction.
pub fn two_qubit_mean(psi: f64) -> Result<f64> {
    let psi = folded_psi(psi)?;
    let x = psi - FRAC_PI_2;
    if x.abs() < MEAN_GUARD {
        return Ok(0.25 - x * x / 6.0);
    }
    Ok((11.0 - 7.0 * (2.0 * psi).cos() + 3.0 * (PI - 2.0 * psi) * psi.tan()) / 96.0)
}

/// Probability that a uniformly random detector direction gives
/// `Y_θ(ψ) > 1/16`.
pub fn two_qubit_detect_prob(psi: f64) -> Result<f64> {
    let psi = folded_psi(psi)?;
    if psi > PI / 6.0 {
        return Ok(1.0);
    }
    let s = psi.sin();
    let value = (2.0 * s - s * s).max(0.0).sqrt() / psi.cos();
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BlochAngles, LocalBasis};
    use crate::state::{make_state, named_state};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gram2(g11: f64, g22: f64, g12: Complex64) -> GramMatrix {
        GramMatrix::new(vec![vec![c(g11), g12], vec![g12.conj(), c(g22)]]).unwrap()
    }

    #[test]
    fn projection_product_examples() {
        let ghz = named_state("ghz", &[]).unwrap();
        let comp = DetectorSet::computational(ghz.dims(), vec![0, 1, 2], 2).unwrap();
        assert!((projection_product(&ghz, &comp).unwrap() - 0.25).abs() < 1e-15);

        let s00 = named_state("sep", &[]).unwrap();
        let comp = DetectorSet::computational(s00.dims(), vec![0, 1], 2).unwrap();
        assert_eq!(projection_product(&s00, &comp).unwrap(), 0.0);

        let only_bc = DetectorSet::computational(ghz.dims(), vec![1, 2], 2).unwrap();
        assert!(projection_product(&ghz, &only_bc).is_err());
    }

    #[test]
    fn projection_product_bell_rotated() {
        // |<Φ+|a_j ⊗ a_j>|² with real a_j = (c, s) / (s, -c) for θ = π/3
        let bell = named_state("bell", &[]).unwrap();
        let a = BlochAngles::new(PI / 3.0, 0.0).unwrap();
        let d = DetectorSet::from_angles(vec![0, 1], &[a, a]).unwrap();
        let (s, co) = (PI / 6.0).sin_cos();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amp1 = h * (co * co + s * s);
        let amp2 = h * (s * s + co * co);
        let want = (amp1 * amp1) * (amp2 * amp2);
        assert!((projection_product(&bell, &d).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn gram_examples() {
        let bell = named_state("bell", &[]).unwrap();
        let comp = DetectorSet::computational(bell.dims(), vec![1], 2).unwrap();
        let g = gram_matrix(&bell, &comp).unwrap();
        assert!((g.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((g.entry(1, 1).re - 0.5).abs() < 1e-15);
        assert_eq!(g.entry(0, 1), c(0.0));

        let theta = 0.9;
        let s00 = named_state("sep", &[]).unwrap();
        let d = DetectorSet::from_angles(vec![1], &[BlochAngles::new(theta, 0.0).unwrap()]).unwrap();
        let g = gram_matrix(&s00, &d).unwrap();
        let g11 = (theta / 2.0).cos().powi(2);
        let g22 = (theta / 2.0).sin().powi(2);
        assert!((g.entry(0, 0).re - g11).abs() < 1e-15);
        assert!((g.entry(1, 1).re - g22).abs() < 1e-15);
        assert!((g.entry(0, 1).norm_sqr() - g11 * g22).abs() < 1e-15);

        let w = named_state("w", &[]).unwrap();
        let comp = DetectorSet::computational(w.dims(), vec![1, 2], 2).unwrap();
        let g = gram_matrix(&w, &comp).unwrap();
        assert!((g.entry(0, 0).re - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.entry(1, 1).re, 0.0);
        assert_eq!(g.entry(0, 1), c(0.0));
    }

    #[test]
    fn collectibility_gram_examples() {
        let r = collectibility_gram(&gram2(0.5, 0.5, c(0.0)), 2).unwrap();
        assert!((r.value - 0.25).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Entangled);
        assert_eq!(r.path, ComputationPath::GramFormula);

        for theta in [0.3, 1.0, PI / 2.0] {
            let g11 = (theta / 2.0_f64).cos().powi(2);
            let g22 = (theta / 2.0_f64).sin().powi(2);
            let g = gram2(g11, g22, c((g11 * g22).sqrt()));
            let y = collectibility_gram(&g, 2).unwrap().value;
            assert!((y - g11 * g22 / 4.0).abs() < 1e-15);
            assert!(y <= 1.0 / 16.0 + 1e-15);
        }
        let y = collectibility_gram(&gram2(0.5, 0.5, c(0.5)), 2).unwrap().value;
        assert!((y - 1.0 / 16.0).abs() < 1e-16);

        let r = collectibility_gram(&gram2(1.0 / 3.0, 0.0, c(0.0)), 3).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.z_value, None);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn gram_validation() {
        let three = GramMatrix::new(vec![vec![c(1.0), c(0.0), c(0.0)]; 3]).unwrap_err();
        assert!(matches!(three, Error::Gram(_)));
        let g3 = GramMatrix::new(vec![
            vec![c(1.0), c(0.0), c(0.0)],
            vec![c(0.0), c(1.0), c(0.0)],
            vec![c(0.0), c(0.0), c(1.0)],
        ])
        .unwrap();
        assert!(matches!(collectibility_gram(&g3, 2), Err(Error::Size(_))));
        let bad = GramMatrix::new(vec![vec![c(0.25), c(0.5)], vec![c(0.5), c(0.25)]]);
        assert!(matches!(bad, Err(Error::Gram(_))));
        // within the clamp window
        let g = gram2(0.5, 0.5, c((0.25f64 + 5e-13).sqrt()));
        assert!((collectibility_gram(&g, 2).unwrap().value - 1.0 / 16.0).abs() < 1e-12);
        let not_herm = GramMatrix::new(vec![vec![c(0.5), c(0.1)], vec![c(0.2), c(0.5)]]);
        assert!(not_herm.is_err());
    }

    #[test]
    fn verdict_examples() {
        let r = verdict(0.2, 2, 2, ComputationPath::ClosedForm).unwrap();
        assert_eq!(r.verdict, Verdict::Entangled);
        assert_eq!(r.bound_sep, 1.0 / 16.0);
        assert_eq!(r.bound_max, 0.25);
        assert!((r.z_value.unwrap() + 0.2f64.ln()).abs() < 1e-15);

        let r = verdict(1.0 / 64.0, 3, 2, ComputationPath::ClosedForm).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.bound_sep, 1.0 / 64.0);

        assert!(matches!(
            verdict(0.3, 2, 2, ComputationPath::ClosedForm),
            Err(Error::Bound { .. })
        ));
        assert!(verdict(-0.1, 2, 2, ComputationPath::ClosedForm).is_err());
        assert!(verdict(0.1, 1, 2, ComputationPath::ClosedForm).is_err());
        // Z ≥ N ln N whenever the bound holds
        let r = verdict(0.25, 2, 2, ComputationPath::ClosedForm).unwrap();
        assert!(r.z_value.unwrap() >= 2.0 * 2f64.ln() - 1e-12);
    }

    #[test]
    fn two_qubit_y_examples() {
        for theta in [0.0, 0.4, 1.3, PI] {
            assert!((two_qubit_y(PI / 2.0, theta).unwrap() - 0.25).abs() < 1e-15);
        }
        for psi in [0.0, 0.2, 1.0, 2.5] {
            let s: f64 = f64::sin(psi);
            assert!((two_qubit_y(psi, 0.0).unwrap() - s * s / 4.0).abs() < 1e-15);
        }
        assert!(matches!(two_qubit_y(-0.5, 0.0), Err(Error::Range(_))));
        assert!(matches!(two_qubit_y(0.5, 3.5), Err(Error::Range(_))));
    }

    #[test]
    fn two_qubit_y_matches_gram_path() {
        let s = named_state("schmidt", &[PI / 3.0]).unwrap();
        let d = DetectorSet::from_angles(vec![1], &[BlochAngles::new(PI / 5.0, 0.0).unwrap()]).unwrap();
        let gram = collectibility_gram(&gram_matrix(&s, &d).unwrap(), 2).unwrap().value;
        assert!((two_qubit_y(PI / 3.0, PI / 5.0).unwrap() - gram).abs() < 1e-12);
    }

    #[test]
    fn extremes_examples() {
        assert_eq!(two_qubit_extremes(0.0).unwrap(), (0.0, 1.0 / 16.0));
        let (lo, hi) = two_qubit_extremes(PI / 2.0).unwrap();
        assert_eq!((lo, hi), (0.25, 0.25));
        let (lo, hi) = two_qubit_extremes(PI / 3.0).unwrap();
        assert!((lo - 3.0 / 16.0).abs() < 1e-15);
        let want = (1.0 + 3f64.sqrt() / 2.0).powi(2) / 16.0;
        assert!((hi - want).abs() < 1e-15);
        assert!((hi - 0.2177).abs() < 1e-4);
        // dense θ grid stays inside the bracket and touches both ends
        let ys: Vec<f64> = (0..=2000)
            .map(|i| two_qubit_y(PI / 3.0, PI * i as f64 / 2000.0).unwrap())
            .collect();
        let min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ys.iter().cloned().fold(0.0, f64::max);
        assert!((min - lo).abs() < 1e-15 && (max - hi).abs() < 1e-15);
    }

    #[test]
    fn mean_examples() {
        assert!((two_qubit_mean(0.0).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(two_qubit_mean(PI / 2.0).unwrap(), 0.25);
        let want = (11.0 + 1.5 * PI) / 96.0;
        assert!((two_qubit_mean(PI / 4.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.163671).abs() < 1e-6);
        // series and closed form agree at the edge of the guard band
        let inside = two_qubit_mean(FRAC_PI_2 + 0.999e-7).unwrap();
        let outside = two_qubit_mean(FRAC_PI_2 + 1.001e-7).unwrap();
        assert!((inside - outside).abs() < 1e-9);
        // symmetric about π/2
        assert!((two_qubit_mean(0.4).unwrap() - two_qubit_mean(PI - 0.4).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn detect_prob_examples() {
        assert_eq!(two_qubit_detect_prob(0.0).unwrap(), 0.0);
        assert!((two_qubit_detect_prob(PI / 6.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((two_qubit_detect_prob(PI / 12.0).unwrap() - 0.695).abs() < 5e-4);
        assert_eq!(two_qubit_detect_prob(1.0).unwrap(), 1.0);
        assert_eq!(two_qubit_detect_prob(PI).unwrap(), 0.0);
        assert!(two_qubit_detect_prob(3.2).is_err());
    }

    #[test]
    fn detect_prob_matches_grid_measure() {
        // fraction of the sphere (uniform in cos θ) where Y_θ > 1/16
        let psi = PI / 12.0;
        let m = 200_000;
        let hits = (0..m)
            .filter(|&i| {
                let u = -1.0 + 2.0 * (i as f64 + 0.5) / m as f64;
                two_qubit_y(psi, u.acos()).unwrap() > 1.0 / 16.0
            })
            .count();
        let frac = hits as f64 / m as f64;
        assert!((frac - two_qubit_detect_prob(psi).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn mean_matches_quadrature() {
        // midpoint rule in u = cos θ
        for psi in [0.0, 0.3, PI / 4.0, 1.2, 2.0] {
            let m = 100_000;
            let avg: f64 = (0..m)
                .map(|i| {
                    let u = -1.0 + 2.0 * (i as f64 + 0.5) / m as f64;
                    two_qubit_y(psi, u.acos()).unwrap()
                })
                .sum::<f64>()
                / m as f64;
            assert!((avg - two_qubit_mean(psi).unwrap()).abs() < 1e-8, "psi={psi}");
        }
    }

    #[test]
    fn evaluate_picks_path() {
        let ghz = named_state("ghz", &[]).unwrap();
        let full = DetectorSet::computational(ghz.dims(), vec![0, 1, 2], 2).unwrap();
        assert_eq!(evaluate(&ghz, &full).unwrap().path, ComputationPath::FullProduct);
        let bc = DetectorSet::computational(ghz.dims(), vec![1, 2], 2).unwrap();
        let r = evaluate(&ghz, &bc).unwrap();
        assert_eq!(r.path, ComputationPath::GramFormula);
        assert!((r.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn larger_party_a_uses_gram_path() {
        // qutrit A, qubit B: |0>|0> + |2>|1>
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = make_state(vec![c(h), c(0.0), c(0.0), c(0.0), c(0.0), c(h)], &[3, 2]).unwrap();
        let d = DetectorSet::new(vec![1], vec![LocalBasis::computational(2, 2).unwrap()]).unwrap();
        assert!((evaluate(&s, &d).unwrap().value - 0.25).abs() < 1e-15);
    }
}
