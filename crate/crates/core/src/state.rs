//! Pure states of K-partite systems.
//!
//! Amplitudes are stored row-major with party A as the most significant
//! index, so for dims `[2, 2, 2]` the amplitude of `|abc>` sits at
//! `4a + 2b + c`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::LocalBasis;
use crate::error::{Error, Result};

/// Accepted deviation of an input state's norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct StateVector {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

impl TryFrom<RawState> for StateVector {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        make_state(raw.amplitudes, &raw.dims)
    }
}

impl From<StateVector> for RawState {
    fn from(state: StateVector) -> Self {
        RawState {
            dims: state.dims,
            amplitudes: state.amplitudes,
        }
    }
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Shape("dims must be nonempty".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::Shape(format!("party dimension {d} is below 2")));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Shape("dimension product overflows".into()))?;
    if total != len {
        return Err(Error::Shape(format!(
            "{len} amplitudes do not match dims {dims:?} (product {total})"
        )));
    }
    Ok(())
}

/// Validates amplitudes against `dims` and the unit-norm contract.
///
/// Norm deviations up to [`NORM_TOLERANCE`] are renormalized away; anything
/// larger is rejected.
pub fn make_state(amplitudes: Vec<Complex64>, dims: &[usize]) -> Result<StateVector> {
    check_dims(dims, amplitudes.len())?;
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Norm {
            norm,
            tolerance: NORM_TOLERANCE,
        });
    }
    let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
    Ok(StateVector {
        dims: dims.to_vec(),
        amplitudes,
    })
}

impl StateVector {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// Product state `self ⊗ other`, with `self`'s parties first.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector { dims, amplitudes }
    }

    /// Applies the unitary whose columns are `unitary`'s vectors to one party.
    pub fn apply_local(&self, party: usize, unitary: &LocalBasis) -> Result<StateVector> {
        let d = *self
            .dims
            .get(party)
            .ok_or_else(|| Error::Shape(format!("party {party} out of range")))?;
        if unitary.len() != d || unitary.dim() != d {
            return Err(Error::Shape(format!(
                "local unitary must be {d}x{d} for party {party}"
            )));
        }
        let inner: usize = self.dims[party + 1..].iter().product();
        let outer: usize = self.dims[..party].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for o in 0..outer {
            for i in 0..inner {
                for (col, vector) in unitary.vectors().iter().enumerate() {
                    let amp = self.amplitudes[(o * d + col) * inner + i];
                    if amp == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (row, u) in vector.iter().enumerate() {
                        out[(o * d + row) * inner + i] += u * amp;
                    }
                }
            }
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            amplitudes: out,
        })
    }
}

fn basis_state(dims: &[usize], digits: &[usize]) -> Vec<Complex64> {
    let total: usize = dims.iter().product();
    let index = digits
        .iter()
        .zip(dims)
        .fold(0usize, |acc, (&digit, &d)| acc * d + digit);
    let mut amps = vec![Complex64::new(0.0, 0.0); total];
    amps[index] = Complex64::new(1.0, 0.0);
    amps
}

fn count_param(name: &str, params: &[f64], idx: usize, default: usize, min: usize) -> Result<usize> {
    match params.get(idx) {
        None => Ok(default),
        Some(&v) if v.fract() == 0.0 && v >= min as f64 && v <= 64.0 => Ok(v as usize),
        Some(&v) => Err(Error::Param(format!(
            "{name} expects integer parameters >= {min}, got {v}"
        ))),
    }
}

/// Builds one of the reference states by name.
///
/// * `bell`: `(|00> + |11>)/√2`
/// * `ghz` `[K, N]`: `(1/√N) Σ_i |i>^⊗K`, defaults `K = 3`, `N = 2`
/// * `w`: `(|001> + |010> + |100>)/√3`
/// * `bs`: bi-separable `|0>_A ⊗ (|00> + |11>)_BC/√2`
/// * `schmidt` `[ψ]`: `cos(ψ/2)|00> + sin(ψ/2)|11>`, `ψ ∈ [0, π]`
/// * `sep` `[K, N]`: `|0>^⊗K` over quNits, defaults `K = 2`, `N = 2`
pub fn named_state(name: &str, params: &[f64]) -> Result<StateVector> {
    let zero = Complex64::new(0.0, 0.0);
    let too_many = |max: usize| -> Result<()> {
        if params.len() > max {
            Err(Error::Param(format!(
                "{name} takes at most {max} parameters, got {}",
                params.len()
            )))
        } else {
            Ok(())
        }
    };
    match name.to_ascii_lowercase().as_str() {
        "bell" => {
            too_many(0)?;
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            make_state(vec![h, zero, zero, h], &[2, 2])
        }
        "ghz" => {
            too_many(2)?;
            let k = count_param(name, params, 0, 3, 2)?;
            let n = count_param(name, params, 1, 2, 2)?;
            let dims = vec![n; k];
            let total = n
                .checked_pow(k as u32)
                .filter(|&t| t <= 1 << 24)
                .ok_or_else(|| Error::Param(format!("ghz({k},{n}) is too large")))?;
            let mut amps = vec![zero; total];
            let weight = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
            for i in 0..n {
                let digits = vec![i; k];
                let idx = digits.iter().fold(0usize, |acc, &x| acc * n + x);
                amps[idx] = weight;
            }
            make_state(amps, &dims)
        }
        "w" => {
            too_many(0)?;
            let c = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
            let mut amps = vec![zero; 8];
            amps[1] = c;
            amps[2] = c;
            amps[4] = c;
            make_state(amps, &[2, 2, 2])
        }
        "bs" => {
            too_many(0)?;
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            let mut amps = vec![zero; 8];
            amps[0] = h;
            amps[3] = h;
            make_state(amps, &[2, 2, 2])
        }
        "schmidt" => {
            too_many(1)?;
            let psi = *params
                .first()
                .ok_or_else(|| Error::Param("schmidt requires the Schmidt angle ψ".into()))?;
            if !(0.0..=PI).contains(&psi) {
                return Err(Error::Param(format!("Schmidt angle {psi} outside [0, π]")));
            }
            let (s, c) = (psi / 2.0).sin_cos();
            make_state(
                vec![Complex64::new(c, 0.0), zero, zero, Complex64::new(s, 0.0)],
                &[2, 2],
            )
        }
        "sep" => {
            too_many(2)?;
            let k = count_param(name, params, 0, 2, 2)?;
            let n = count_param(name, params, 1, 2, 2)?;
            let dims = vec![n; k];
            if n.checked_pow(k as u32).is_none_or(|t| t > 1 << 24) {
                return Err(Error::Param(format!("sep({k},{n}) is too large")));
            }
            make_state(basis_state(&dims, &vec![0; k]), &dims)
        }
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// Parses the `name[:p1,p2,...]` shorthand, e.g. `schmidt:0.5` or `ghz:3`.
pub fn parse_named_state(spec: &str) -> Result<StateVector> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (spec, None),
    };
    let params = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Param(format!("cannot parse parameter `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    named_state(name.trim(), &params)
}

/// Schmidt angle of a two-qubit state, canonicalized to `[0, π/2]`.
///
/// With singular values `s1 ≥ s2` of the coefficient matrix,
/// `s1 = cos(ψ/2)` and `s2 = sin(ψ/2)`.
pub fn schmidt_angle(state: &StateVector) -> Result<f64> {
    if state.dims != [2, 2] {
        return Err(Error::Shape(format!(
            "Schmidt angle needs a two-qubit state, got dims {:?}",
            state.dims
        )));
    }
    let a = &state.amplitudes;
    let frob: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let det = (a[0] * a[3] - a[1] * a[2]).norm() / frob;
    // s1² + s2² = 1, s1·s2 = |det|
    let disc = (1.0 - 4.0 * det * det).max(0.0).sqrt();
    let s2_sq = 2.0 * det * det / (1.0 + disc);
    let s1_sq = 1.0 - s2_sq;
    Ok(2.0 * s2_sq.sqrt().atan2(s1_sq.sqrt()))
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Haar-random (Fubini–Study uniform) pure state.
pub fn random_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<StateVector> {
    let total: usize = dims.iter().product();
    check_dims(dims, total)?;
    Ok(StateVector {
        dims: dims.to_vec(),
        amplitudes: normalized(gaussian_vector(total, rng)),
    })
}

/// Tensor product of independent Haar-random local states.
pub fn random_product_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<StateVector> {
    check_dims(dims, dims.iter().product())?;
    let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
    for &d in dims {
        let local = normalized(gaussian_vector(d, rng));
        amplitudes = amplitudes
            .iter()
            .flat_map(|a| local.iter().map(move |b| a * b))
            .collect();
    }
    Ok(StateVector {
        dims: dims.to_vec(),
        amplitudes,
    })
}
