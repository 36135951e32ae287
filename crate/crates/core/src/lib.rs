//! Collectibility entanglement indicators for pure multipartite states.
//!
//! The crate evaluates the product of projections of a state onto `N`
//! locally orthogonal separable states, its closed-form one-step maximum
//! for qubit detectors, numerical maxima and minima over detector settings,
//! Monte Carlo statistics over Haar-random detectors, and forward models of
//! two interferometric schemes that measure the underlying Gram matrix.

#![allow(clippy::needless_range_loop)]

pub mod basis;
pub mod collect;
pub mod error;
pub mod experiment;
pub mod io;
pub mod json;
pub mod optimize;
pub mod sampling;
pub mod scan;
pub mod state;

pub use basis::{
    bloch_basis, haar_basis, project_conditional, BlochAngles, DetectorSet, LocalBasis,
};
pub use collect::{
    collectibility_gram, evaluate, gram_matrix, projection_product, two_qubit_detect_prob,
    two_qubit_extremes, two_qubit_mean, two_qubit_y, verdict, CollectibilityReport,
    ComputationPath, GramMatrix, Verdict,
};
pub use error::{Error, Result};
pub use state::{make_state, named_state, parse_named_state, schmidt_angle, StateVector};
