//! Lyapunov data at periodic orbits: spectra, Oseledec splittings, the
//! ε-Lyapunov scalar product, Pesin-block levels, and instance checks of
//! the norm and cone estimates used by the construction.
//!
//! At a periodic point every Oseledec quantity is exact linear algebra on
//! the period product `A(x, p)`, which is why everything here is keyed by a
//! cyclically legal word.

mod bounds;
mod lemmas;
mod metric;
mod qr;
mod spectrum;
mod splitting;
mod vector;

pub use bounds::{verify_norm_bounds, BoundCheck, BoundKind, BoundsOptions, BoundsReport};
pub use lemmas::{
    cone_verify, default_cone_eta, exponential_closeness, lemma31_verify, ConeOptions, ConeReport,
    Lemma31Report,
};
pub use metric::{
    lyapunov_gram, lyapunov_operator_norm, pesin_certificate, GramOptions, LyapunovMetric,
    PesinCertificate,
};
pub use qr::qr_exponents;
pub use spectrum::{periodic_spectrum, LyapunovSpectrum, SpectrumBlock, MERGE_TOLERANCE, SEPARATION_TOLERANCE};
pub use splitting::{oseledec_splitting_periodic, OseledecSplitting};
pub use vector::{finite_time_vector_exponent, vector_exponent_series};

use serde::Serialize;
use thiserror::Error;

use crate::cocycle::CocycleError;
use crate::symbolic::SymbolicError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("eigensolver did not converge on the period product of {0}")]
    EigenFailure(String),
    #[error("eigenvalue moduli {first:e} and {second:e} (log scale, per period) are closer than the separation tolerance but not equal")]
    ClusteredSpectrum { first: f64, second: f64 },
    #[error("generalized eigenspaces of the period product do not form a direct sum")]
    DegenerateSplitting,
    #[error("epsilon {epsilon} must be positive and below the smallest exponent gap {gap}")]
    EpsilonTooLarge { epsilon: f64, gap: f64 },
    #[error("Lyapunov series needs more than {cap} terms to reach the tolerance")]
    SlowDecay { cap: usize },
    #[error("zero vector has no Lyapunov exponent")]
    ZeroVector,
    #[error("bound violated: {0}")]
    BoundViolation(Box<BoundCheck>),
    #[error("cone escape at step {step}: image of {vector:?} leaves the cone")]
    ConeEscape { step: usize, vector: Vec<f64>, ratio: f64, growth: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

/// Outcome of a single instance check, for report serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}
