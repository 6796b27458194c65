//! Certified Lyapunov-irregular points.
//!
//! Two periodic measures with different top exponents `a > b` are
//! alternated along a single orbit: a long block shadowing the high
//! measure pushes the running average `(1/n) log |A(y, n)|` above `a - τ`,
//! a longer block shadowing the low one pulls it under `b + τ`, and so on.
//! Block lengths are found by simulating the running average; the
//! resulting point is rebuilt and re-evaluated independently before any
//! claim is made.
//!
//! Gaps between blocks are filled by bridging words, so every point lies in
//! the shift space and agrees with a prescribed cylinder on its window.

mod build;
mod certify;
mod gap;
mod lift;
mod scan;
mod schedule;
mod target;

pub use build::build_point;
pub use certify::{certify_witness, on_membership, IrregularWitness, Membership, WitnessLevel};
pub use gap::{spectrum_gap, IndexGap, SpectrumGapReport};
pub use lift::{lift_to_li, LiftOptions, LiftResult, VectorOscillation};
pub use scan::{density_scan, DensityReport, DensityRow};
pub use schedule::{plan_schedule, BlockKind, BlockSchedule, ClosedForm, PlanOptions, ScheduleLevel};
pub use target::IrregularTarget;

use thiserror::Error;

use crate::cocycle::CocycleError;
use crate::lyapunov::LyapunovError;
use crate::symbolic::SymbolicError;

/// Slack every certified inequality must keep.
pub const CERTIFICATION_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrregularError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error("no spectrum gap: a - 2τ = {high} is not above b + 2τ = {low}")]
    NoGap { high: f64, low: f64 },
    #[error("epsilon {epsilon} must lie in (0, τ/2) with τ = {tau}")]
    InvalidEpsilon { epsilon: f64, tau: f64 },
    #[error("level {level}: {kind:?} block needs more than {cap} symbols (running average {average} at the cap, threshold {threshold})")]
    BudgetExceeded {
        level: usize,
        kind: BlockKind,
        cap: u64,
        average: f64,
        threshold: f64,
    },
    #[error("certification failed at level {level}: average {average} at n = {time} against threshold {threshold}")]
    CertificationFailed {
        level: usize,
        time: u64,
        average: f64,
        threshold: f64,
    },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("all supplied measures have the same Lyapunov spectrum")]
    AllSpectraEqual,
    #[error("at least one periodic measure is required")]
    NoMeasures,
}
