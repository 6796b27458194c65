use serde::Serialize;

use super::{
    build_point, certify_witness, plan_schedule, spectrum_gap, BlockSchedule, IrregularError, IrregularTarget,
    IrregularWitness, PlanOptions, SpectrumGapReport,
};
use crate::cocycle::{exterior_power, MatrixCocycle};
use crate::linalg::Vector;
use crate::lyapunov::vector_exponent_series;
use crate::symbolic::{Cylinder, ShiftPoint, ShiftSpace, Word};

#[derive(Clone, Debug, Serialize)]
pub struct LiftOptions {
    /// Defaults to a fifth of the spread of `Λ_i`.
    pub tau: Option<f64>,
    /// Defaults to `τ/4`.
    pub epsilon: Option<f64>,
    pub levels: usize,
    pub plan: PlanOptions,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self {
            tau: None,
            epsilon: None,
            levels: 3,
            plan: PlanOptions::default(),
        }
    }
}

/// Partial averages `(1/t) log |A(y, t) e_j|` of one standard basis vector
/// at the certified times.
#[derive(Clone, Debug, Serialize)]
pub struct VectorOscillation {
    pub basis_index: usize,
    pub averages: Vec<f64>,
    /// Largest minus smallest of `averages`.
    pub oscillation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftResult {
    pub gap: SpectrumGapReport,
    pub index: usize,
    pub target: IrregularTarget,
    pub epsilon: f64,
    pub schedule: BlockSchedule,
    pub witness: IrregularWitness,
    pub times: Vec<u64>,
    pub vectors: Vec<VectorOscillation>,
    /// Containment used to read the witness as a point of `LI(A, f)`.
    pub chain: String,
    /// The measures compared are exactly the supplied periodic ones.
    pub scope: String,
}

impl LiftResult {
    /// Largest oscillation among the basis vectors.
    pub fn max_vector_oscillation(&self) -> f64 {
        self.vectors.iter().map(|v| v.oscillation).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Finds the least separating exterior index `i`, runs the construction on
/// `∧^i A` and measures vector exponents of `A` along the witness.
pub fn lift_to_li(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    words: &[Word],
    cylinder: &Cylinder,
    options: &LiftOptions,
) -> Result<(LiftResult, ShiftPoint), IrregularError> {
    let gap = spectrum_gap(a, space, words)?;
    let index = gap.separating_index.ok_or(IrregularError::AllSpectraEqual)?;
    let ext = if index == 1 { a.clone() } else { exterior_power(a, index)? };
    let g = gap.index(index);
    let tau = options.tau.unwrap_or((g.sup - g.inf) / 5.0);
    let target = IrregularTarget::new(
        &ext,
        space,
        words[g.argsup].clone(),
        words[g.arginf].clone(),
        tau,
        cylinder,
        index,
    )?;
    let epsilon = options.epsilon.unwrap_or(tau / 4.0);
    let schedule = plan_schedule(&ext, space, &target, options.levels, epsilon, &options.plan)?;
    let y = build_point(&schedule, space)?;
    let witness = certify_witness(&ext, space, &y, &schedule, &target)?;
    let times = schedule.certified_times();
    let mut vectors = Vec::with_capacity(a.dim());
    if !times.is_empty() {
        for j in 0..a.dim() {
            let e = Vector::from_fn(a.dim(), |r, _| if r == j { 1.0 } else { 0.0 });
            let averages = vector_exponent_series(a, &y, &e, &times)?;
            let hi = averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = averages.iter().copied().fold(f64::INFINITY, f64::min);
            vectors.push(VectorOscillation {
                basis_index: j,
                averages,
                oscillation: hi - lo,
            });
        }
    }
    let chain = if index == 1 {
        "MLI(A, f) ⊆ LI(A, f)".to_string()
    } else {
        format!("MLI(∧^{index} A, f) ⊆ LI(A, f)")
    };
    let result = LiftResult {
        gap,
        index,
        target,
        epsilon,
        schedule,
        witness,
        times,
        vectors,
        chain,
        scope: format!("inf/sup taken over the {} supplied periodic measures", words.len()),
    };
    Ok((result, y))
}
