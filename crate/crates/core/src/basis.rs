//! Local detector bases and the conditional states they induce.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

/// Orthonormality tolerance for bases read from input files.
pub const INPUT_ORTHO_TOLERANCE: f64 = 1e-9;

/// Set of `N` orthonormal vectors in one party's Hilbert space.
///
/// Vectors are stored as columns, so a full basis doubles as the unitary
/// mapping `|i>` onto its `i`-th vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    vectors: Vec<Vec<Complex64>>,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl LocalBasis {
    /// Wraps vectors after checking they are orthonormal within `tolerance`.
    pub fn new(vectors: Vec<Vec<Complex64>>, tolerance: f64) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Shape("a local basis needs at least one vector".into()))?;
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("basis vectors differ in dimension".into()));
        }
        if vectors.len() > dim {
            return Err(Error::Shape(format!(
                "{} vectors cannot be orthonormal in dimension {dim}",
                vectors.len()
            )));
        }
        for (j, a) in vectors.iter().enumerate() {
            for (k, b) in vectors.iter().enumerate() {
                let expected = if j == k { 1.0 } else { 0.0 };
                let overlap = inner(a, b);
                if (overlap - expected).norm() > tolerance {
                    return Err(Error::Param(format!(
                        "basis vectors {j} and {k} have overlap {overlap}, expected {expected}"
                    )));
                }
            }
        }
        Ok(LocalBasis { vectors })
    }

    /// Standard basis `|0>, ..., |n-1>` of a `dim`-dimensional space.
    pub fn computational(dim: usize, n: usize) -> Result<Self> {
        if n > dim || n == 0 {
            return Err(Error::Shape(format!(
                "cannot take {n} computational vectors in dimension {dim}"
            )));
        }
        let vectors = (0..n)
            .map(|j| {
                (0..dim)
                    .map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Ok(LocalBasis { vectors })
    }

    pub(crate) fn from_vectors_unchecked(vectors: Vec<Vec<Complex64>>) -> Self {
        LocalBasis { vectors }
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// Number of vectors `N`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Dimension of the party's Hilbert space.
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Keeps the first `n` vectors.
    pub fn truncated(&self, n: usize) -> LocalBasis {
        LocalBasis {
            vectors: self.vectors[..n.min(self.vectors.len())].to_vec(),
        }
    }
}

/// Bloch-sphere angles `θ ∈ [0, π]`, `φ ∈ [0, 2π)` of a qubit detector basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Range(format!("θ = {theta} outside [0, π]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::Range(format!("φ = {phi} outside [0, 2π)")));
        }
        Ok(BlochAngles { theta, phi })
    }

    /// Maps arbitrary real angles onto the canonical ranges, flipping the
    /// azimuth when the polar angle wraps past π. The basis changes only by
    /// per-vector phases.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut phi = phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        BlochAngles { theta, phi }
    }
}

pub(crate) fn bloch_vectors(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    [
        [Complex64::new(c, 0.0), e * s],
        [Complex64::new(s, 0.0), -e * c],
    ]
}

/// Qubit basis `|a1> = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`,
/// `|a2> = sin(θ/2)|0> - e^{iφ} cos(θ/2)|1>`.
pub fn bloch_basis(angles: BlochAngles) -> Result<LocalBasis> {
    let angles = BlochAngles::new(angles.theta, angles.phi)?;
    let [a1, a2] = bloch_vectors(angles.theta, angles.phi);
    Ok(LocalBasis {
        vectors: vec![a1.to_vec(), a2.to_vec()],
    })
}

/// Haar-distributed orthonormal basis of `C^dim`.
///
/// Gram–Schmidt on a matrix of independent standard complex Gaussians; the
/// implied `R` factor has a positive real diagonal, which fixes the phases
/// so the result is exactly Haar.
pub fn haar_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<LocalBasis> {
    if dim < 2 {
        return Err(Error::Shape(format!("Haar basis needs dim >= 2, got {dim}")));
    }
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        // two passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for q in &vectors {
                let proj = inner(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= proj * qi);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        vectors.push(v);
    }
    Ok(LocalBasis { vectors })
}

/// One basis per listed party, all sharing the same number of vectors `N`.
///
/// The `j`-th detector state is `|a_j>` of each listed party tensored
/// together in party order.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSet {
    parties: Vec<usize>,
    bases: Vec<LocalBasis>,
}

impl DetectorSet {
    pub fn new(parties: Vec<usize>, bases: Vec<LocalBasis>) -> Result<Self> {
        if parties.is_empty() || parties.len() != bases.len() {
            return Err(Error::Shape(format!(
                "{} parties but {} bases",
                parties.len(),
                bases.len()
            )));
        }
        if parties.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Shape(
                "detector parties must be strictly increasing".into(),
            ));
        }
        let n = bases[0].len();
        if bases.iter().any(|b| b.len() != n) {
            return Err(Error::Shape("bases do not share the same N".into()));
        }
        Ok(DetectorSet { parties, bases })
    }

    /// Computational bases on `parties`, pairing `|j>` with `|j>` across
    /// parties.
    pub fn computational(dims: &[usize], parties: Vec<usize>, n: usize) -> Result<Self> {
        let bases = parties
            .iter()
            .map(|&p| {
                let d = *dims
                    .get(p)
                    .ok_or_else(|| Error::Shape(format!("party {p} out of range")))?;
                LocalBasis::computational(d, n)
            })
            .collect::<Result<Vec<_>>>()?;
        DetectorSet::new(parties, bases)
    }

    /// Qubit bases from Bloch angles, one pair per listed party.
    pub fn from_angles(parties: Vec<usize>, angles: &[BlochAngles]) -> Result<Self> {
        let bases = angles
            .iter()
            .map(|&a| bloch_basis(a))
            .collect::<Result<Vec<_>>>()?;
        DetectorSet::new(parties, bases)
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn bases(&self) -> &[LocalBasis] {
        &self.bases
    }

    /// Common basis size `N`.
    pub fn n(&self) -> usize {
        self.bases[0].len()
    }

    /// Detector set with one more party prepended, e.g. party A in front of a
    /// B..K set.
    pub fn with_leading(&self, party: usize, basis: LocalBasis) -> Result<Self> {
        let mut parties = vec![party];
        parties.extend_from_slice(&self.parties);
        let mut bases = vec![basis];
        bases.extend(self.bases.iter().cloned());
        DetectorSet::new(parties, bases)
    }

    fn check_against(&self, state: &StateVector, expected: &[usize]) -> Result<()> {
        if self.parties != expected {
            return Err(Error::Shape(format!(
                "detectors cover parties {:?}, expected {:?}",
                self.parties, expected
            )));
        }
        for (&p, b) in self.parties.iter().zip(&self.bases) {
            if b.dim() != state.dims()[p] {
                return Err(Error::Shape(format!(
                    "basis for party {p} has dimension {}, state has {}",
                    b.dim(),
                    state.dims()[p]
                )));
            }
        }
        Ok(())
    }

    /// Checks the set covers parties `B..K` of `state`.
    pub fn check_conditional(&self, state: &StateVector) -> Result<()> {
        let expected: Vec<usize> = (1..state.parties()).collect();
        self.check_against(state, &expected)
    }

    /// Checks the set covers every party of `state`.
    pub fn check_full(&self, state: &StateVector) -> Result<()> {
        let expected: Vec<usize> = (0..state.parties()).collect();
        self.check_against(state, &expected)
    }

    /// Conjugated amplitudes of the `j`-th detector product state, row-major
    /// over the covered parties.
    pub(crate) fn bra_weights(&self, j: usize) -> Vec<Complex64> {
        let mut weights = vec![Complex64::new(1.0, 0.0)];
        for basis in &self.bases {
            let v = &basis.vectors[j];
            weights = weights
                .iter()
                .flat_map(|w| v.iter().map(move |x| w * x.conj()))
                .collect();
        }
        weights
    }
}

/// Human label of a party index: 0 → "A", 1 → "B", ...
pub fn party_label(index: usize) -> String {
    let letter = (b'A' + (index % 26) as u8) as char;
    if index < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", index / 26)
    }
}

/// Inverse of [`party_label`].
pub fn parse_party_label(label: &str) -> Result<usize> {
    let mut chars = label.trim().chars();
    let first = chars
        .next()
        .filter(|c| c.is_ascii_uppercase())
        .ok_or_else(|| Error::Parse(format!("bad party label `{label}`")))?;
    let base = (first as u8 - b'A') as usize;
    let rest: String = chars.collect();
    if rest.is_empty() {
        Ok(base)
    } else {
        let cycle: usize = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad party label `{label}`")))?;
        Ok(base + 26 * cycle)
    }
}

pub(crate) fn conditional_with_weights(
    state: &StateVector,
    weights: &[Complex64],
) -> Vec<Complex64> {
    let rest = weights.len();
    state
        .amplitudes()
        .chunks_exact(rest)
        .map(|row| row.iter().zip(weights).map(|(a, w)| a * w).sum())
        .collect()
}

/// Unnormalized conditional state `|φ_j> = (<a_j^B| ⊗ ... ⊗ <a_j^K|) |Ψ>`
/// in party A's space. `j` is zero-based.
pub fn project_conditional(
    state: &StateVector,
    detectors: &DetectorSet,
    j: usize,
) -> Result<Vec<Complex64>> {
    detectors.check_conditional(state)?;
    if j >= detectors.n() {
        return Err(Error::Shape(format!(
            "detector index {j} out of range for N = {}",
            detectors.n()
        )));
    }
    Ok(conditional_with_weights(state, &detectors.bra_weights(j)))
}
