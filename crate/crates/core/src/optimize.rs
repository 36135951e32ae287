//! Maximization and minimization of collectibility over detector settings.
//!
//! When every party `B..K` is a qubit, party A is handled by the Gram
//! formula and the search runs over one `(θ, φ)` pair per remaining party.
//! Otherwise the projection product is searched directly over unitary
//! parameterizations of every party's basis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{bloch_basis, bloch_vectors, BlochAngles, DetectorSet, LocalBasis};
use crate::collect::{bound_max, projection_product, qubit_collectibility, ComputationPath};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Restarts whose best value lies this close to the overall best count as
/// agreeing.
pub const AGREEMENT_TOLERANCE: f64 = 1e-8;

/// Default cap on grid-oracle evaluations.
pub const DEFAULT_GRID_BUDGET: u128 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 32,
            max_iterations: 2000,
            tolerance: 1e-10,
            seed: 0,
            mode: Mode::Maximize,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Param("restarts must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Param("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumResult {
    pub value: f64,
    pub mode: Mode,
    pub path: ComputationPath,
    /// Search parameters at the optimum; `(θ, φ)` per party on the qubit
    /// path, `dim²` unitary parameters per party otherwise.
    pub params: Vec<f64>,
    pub detectors: DetectorSet,
    pub restarts: usize,
    pub restarts_agreeing: usize,
    pub converged: bool,
}

/// Columns of a `dim × dim` unitary built from `dim²` unconstrained reals.
///
/// Parameters come in `(θ, φ)` pairs for each index pair `p < q` in
/// lexicographic order, each pair contributing the two-level rotation
/// `|p> → cos(θ/2)|p> + e^{iφ} sin(θ/2)|q>`,
/// `|q> → −e^{−iφ} sin(θ/2)|p> + cos(θ/2)|q>`, followed by one phase per
/// column. Every unitary is reached this way.
pub fn unitary_from_params(params: &[f64], dim: usize) -> Result<LocalBasis> {
    if dim < 1 || params.len() != dim * dim {
        return Err(Error::Shape(format!(
            "a {dim}-dimensional unitary takes {} parameters, got {}",
            dim * dim,
            params.len()
        )));
    }
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            (0..dim)
                .map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let mut it = params.iter();
    for p in 0..dim {
        for q in p + 1..dim {
            let theta = *it.next().expect("length checked");
            let phi = *it.next().expect("length checked");
            let (s, c) = (theta / 2.0).sin_cos();
            let e = Complex64::from_polar(1.0, phi);
            let (cp, cq) = (cols[p].clone(), cols[q].clone());
            for i in 0..dim {
                cols[p][i] = cp[i] * c + cq[i] * e * s;
                cols[q][i] = -cp[i] * e.conj() * s + cq[i] * c;
            }
        }
    }
    for col in cols.iter_mut() {
        let phase = Complex64::from_polar(1.0, *it.next().expect("length checked"));
        col.iter_mut().for_each(|x| *x *= phase);
    }
    Ok(LocalBasis::from_vectors_unchecked(cols))
}

/// What the optimizer searches over.
#[derive(Debug, Clone)]
enum SearchSpace {
    /// `(θ, φ)` per qubit party `B..K`; party A by the Gram formula.
    Qubit { parties: usize },
    /// `dim²` unitary parameters per party, first `n` columns used.
    General { dims: Vec<usize>, n: usize },
}

impl SearchSpace {
    fn for_state(state: &StateVector) -> Result<Self> {
        let dims = state.dims();
        if dims.len() < 2 {
            return Err(Error::Shape("collectibility needs at least two parties".into()));
        }
        if dims[1..].iter().all(|&d| d == 2) {
            Ok(SearchSpace::Qubit {
                parties: dims.len() - 1,
            })
        } else {
            let n = *dims.iter().min().expect("nonempty");
            Ok(SearchSpace::General {
                dims: dims.to_vec(),
                n,
            })
        }
    }

    fn n(&self) -> usize {
        match self {
            SearchSpace::Qubit { .. } => 2,
            SearchSpace::General { n, .. } => *n,
        }
    }

    fn len(&self) -> usize {
        match self {
            SearchSpace::Qubit { parties } => 2 * parties,
            SearchSpace::General { dims, .. } => dims.iter().map(|d| d * d).sum(),
        }
    }

    fn path(&self) -> ComputationPath {
        match self {
            SearchSpace::Qubit { .. } => ComputationPath::GramFormula,
            SearchSpace::General { .. } => ComputationPath::FullProduct,
        }
    }

    fn objective(&self, state: &StateVector, x: &[f64]) -> f64 {
        match self {
            SearchSpace::Qubit { .. } => {
                let bases: Vec<[[Complex64; 2]; 2]> =
                    x.chunks_exact(2).map(|a| bloch_vectors(a[0], a[1])).collect();
                qubit_collectibility(state, &bases)
            }
            SearchSpace::General { .. } => {
                let set = self.decode_raw(x).expect("parameter layout is fixed");
                projection_product(state, &set).expect("detectors match the state")
            }
        }
    }

    fn decode_raw(&self, x: &[f64]) -> Result<DetectorSet> {
        match self {
            SearchSpace::Qubit { parties } => {
                let angles: Vec<BlochAngles> = x
                    .chunks_exact(2)
                    .map(|a| BlochAngles::wrapped(a[0], a[1]))
                    .collect();
                DetectorSet::from_angles((1..=*parties).collect(), &angles)
            }
            SearchSpace::General { dims, n } => {
                let mut offset = 0;
                let bases = dims
                    .iter()
                    .map(|&d| {
                        let basis = unitary_from_params(&x[offset..offset + d * d], d)?;
                        offset += d * d;
                        Ok(basis.truncated(*n))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DetectorSet::new((0..dims.len()).collect(), bases)
            }
        }
    }

    /// Canonical form of the parameter vector (angles wrapped on the qubit
    /// path).
    fn canonical(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SearchSpace::Qubit { .. } => x
                .chunks_exact(2)
                .flat_map(|a| {
                    let w = BlochAngles::wrapped(a[0], a[1]);
                    [w.theta, w.phi]
                })
                .collect(),
            SearchSpace::General { .. } => x.to_vec(),
        }
    }
}

struct SimplexOutcome {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Nelder–Mead minimization with standard coefficients (reflection 1,
/// expansion 2, contraction ½, shrink ½). Stops when the spread of the
/// simplex values drops below `tolerance`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    max_iterations: usize,
    tolerance: f64,
) -> SimplexOutcome {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let point = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };
    let mut converged = false;
    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[dim].1 - simplex[0].1 <= tolerance {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / dim as f64);
        }
        let worst = simplex[dim].clone();
        let reflected = point(&centroid, &worst.0, -1.0);
        let f_reflected = f(&reflected);
        if f_reflected < simplex[0].1 {
            let expanded = point(&centroid, &worst.0, -2.0);
            let f_expanded = f(&expanded);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
            continue;
        }
        let (contracted, limit) = if f_reflected < worst.1 {
            (point(&centroid, &reflected, 0.5), f_reflected)
        } else {
            (point(&centroid, &worst.0, 0.5), worst.1)
        };
        let f_contracted = f(&contracted);
        if f_contracted < limit {
            simplex[dim] = (contracted, f_contracted);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = point(&best, &entry.0, 0.5);
            let fx = f(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexOutcome {
        x,
        value,
        converged,
    }
}

struct RestartOutcome {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

fn run_restart(
    space: &SearchSpace,
    state: &StateVector,
    config: &OptimizerConfig,
    restart: usize,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
    let x0: Vec<f64> = (0..space.len())
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect();
    let sign = match config.mode {
        Mode::Maximize => -1.0,
        Mode::Minimize => 1.0,
    };
    let f = |x: &[f64]| sign * space.objective(state, x);
    let first = nelder_mead(&f, &x0, 0.6, config.max_iterations, config.tolerance);
    // a second, tighter simplex guards against premature collapse
    let polish = nelder_mead(&f, &first.x, 0.05, config.max_iterations, config.tolerance);
    let converged = first.converged || polish.converged;
    let best = if polish.value <= first.value { polish } else { first };
    RestartOutcome {
        x: best.x,
        value: sign * best.value,
        converged,
    }
}

fn optimize(state: &StateVector, config: &OptimizerConfig) -> Result<OptimumResult> {
    config.validate()?;
    let space = SearchSpace::for_state(state)?;
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(&space, state, config, r))
        .collect();
    if !outcomes.iter().any(|o| o.converged) {
        return Err(Error::Convergence {
            restarts: config.restarts,
        });
    }
    let better = |a: f64, b: f64| match config.mode {
        Mode::Maximize => a > b,
        Mode::Minimize => a < b,
    };
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if better(o.value, outcomes[best].value) {
            best = i;
        }
    }
    let best = &outcomes[best];
    let agreeing = outcomes
        .iter()
        .filter(|o| (o.value - best.value).abs() <= AGREEMENT_TOLERANCE)
        .count();
    let params = space.canonical(&best.x);
    let detectors = space.decode_raw(&params)?;
    Ok(OptimumResult {
        value: best.value.clamp(0.0, bound_max(space.n())),
        mode: config.mode,
        path: space.path(),
        params,
        detectors,
        restarts: config.restarts,
        restarts_agreeing: agreeing,
        converged: best.converged,
    })
}

/// Largest collectibility over detector settings (`config.mode` is
/// overridden to maximize).
pub fn maximize_collectibility(state: &StateVector, config: &OptimizerConfig) -> Result<OptimumResult> {
    optimize(
        state,
        &OptimizerConfig {
            mode: Mode::Maximize,
            ..config.clone()
        },
    )
}

/// Smallest collectibility over detector settings.
pub fn minimize_collectibility(state: &StateVector, config: &OptimizerConfig) -> Result<OptimumResult> {
    optimize(
        state,
        &OptimizerConfig {
            mode: Mode::Minimize,
            ..config.clone()
        },
    )
}

/// Runs the optimizer in `config.mode`.
pub fn optimize_collectibility(state: &StateVector, config: &OptimizerConfig) -> Result<OptimumResult> {
    optimize(state, config)
}

/// Uniform angle grid: `θ_i = iπ/(r−1)` for `i < r`, `φ_k = 2πk/r`.
pub fn grid_angles(resolution: usize) -> (Vec<f64>, Vec<f64>) {
    let thetas = (0..resolution)
        .map(|i| PI * i as f64 / (resolution - 1) as f64)
        .collect();
    let phis = (0..resolution)
        .map(|k| 2.0 * PI * k as f64 / resolution as f64)
        .collect();
    (thetas, phis)
}

/// Brute-force maximum of the Gram-formula collectibility over a
/// `(θ, φ)` grid for each qubit party `B..K`.
pub fn grid_oracle(state: &StateVector, resolution: usize) -> Result<f64> {
    grid_oracle_with_budget(state, resolution, DEFAULT_GRID_BUDGET)
}

pub fn grid_oracle_with_budget(state: &StateVector, resolution: usize, budget: u128) -> Result<f64> {
    if resolution < 2 {
        return Err(Error::Param("grid resolution must be at least 2".into()));
    }
    let parties = match SearchSpace::for_state(state)? {
        SearchSpace::Qubit { parties } => parties,
        SearchSpace::General { .. } => {
            return Err(Error::Shape("grid oracle needs qubit parties B..K".into()))
        }
    };
    let per_party = (resolution as u128) * (resolution as u128);
    let points = per_party
        .checked_pow(parties as u32)
        .unwrap_or(u128::MAX);
    if points > budget {
        return Err(Error::Scale { points, budget });
    }
    let (thetas, phis) = grid_angles(resolution);
    let table: Vec<[[Complex64; 2]; 2]> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| bloch_vectors(t, p)))
        .collect();
    let per_party = per_party as u64;
    let best = (0..points as u64)
        .into_par_iter()
        .map(|mut idx| {
            let bases: Vec<[[Complex64; 2]; 2]> = (0..parties)
                .map(|_| {
                    let b = table[(idx % per_party) as usize];
                    idx /= per_party;
                    b
                })
                .collect();
            qubit_collectibility(state, &bases)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Brute-force maximum of `projection_product` over a `(θ, φ)` grid of
/// qubit bases for party A, with the `B..K` detectors held fixed.
pub fn party_a_grid_max(state: &StateVector, detectors: &DetectorSet, resolution: usize) -> Result<f64> {
    if resolution < 2 {
        return Err(Error::Param("grid resolution must be at least 2".into()));
    }
    detectors.check_conditional(state)?;
    if state.dims()[0] != 2 {
        return Err(Error::Shape("party-A grid needs a qubit party A".into()));
    }
    let (thetas, phis) = grid_angles(resolution);
    let rows = thetas
        .par_iter()
        .map(|&t| {
            phis.iter().try_fold(0.0f64, |best, &p| {
                let a = bloch_basis(BlochAngles::wrapped(t, p))?;
                let full = detectors.with_leading(0, a)?;
                Ok(best.max(projection_product(state, &full)?))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Detector set of the qubit path for explicit angles, one pair per party
/// `B..K`.
pub fn qubit_detectors(angles: &[BlochAngles]) -> Result<DetectorSet> {
    let bases = angles
        .iter()
        .map(|&a| bloch_basis(a))
        .collect::<Result<Vec<_>>>()?;
    DetectorSet::new((1..=angles.len()).collect(), bases)
}
