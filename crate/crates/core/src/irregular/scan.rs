use serde::Serialize;

use super::{build_point, certify_witness, plan_schedule, IrregularError, IrregularTarget, PlanOptions};
use crate::cocycle::MatrixCocycle;
use crate::exec::{self, Execution};
use crate::symbolic::{Cylinder, ShiftSpace, Word};

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub window: Word,
    pub window_lo: i64,
    pub certified: bool,
    /// Coordinates of the built point equal the base on the whole window.
    pub agrees_on_window: bool,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub oscillation_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub n: u64,
    pub levels: usize,
    pub high: Word,
    pub low: Word,
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub rows: Vec<DensityRow>,
    pub certified: usize,
    pub total: usize,
}

impl DensityReport {
    pub fn complete(&self) -> bool {
        self.certified == self.total
    }

    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.certified as f64 / self.total as f64
        }
    }
}

fn scan_one(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    target: &IrregularTarget,
    cylinder: &Cylinder,
    levels: usize,
    epsilon: f64,
    options: &PlanOptions,
) -> DensityRow {
    let target = target.with_cylinder(cylinder);
    let outcome = plan_schedule(a, space, &target, levels, epsilon, options).and_then(|s| {
        let y = build_point(&s, space)?;
        let w = certify_witness(a, space, &y, &s, &target)?;
        let agrees = (cylinder.lo()..=cylinder.hi()).all(|i| y.symbol(i) == cylinder.base().symbol(i));
        Ok((w, agrees))
    });
    let mut row = DensityRow {
        window: cylinder.window_word(),
        window_lo: cylinder.lo(),
        certified: false,
        agrees_on_window: false,
        n1: None,
        n2: None,
        oscillation_gap: None,
        error: None,
    };
    match outcome {
        Ok((w, agrees)) => {
            let first = w.levels.first();
            row.certified = agrees && w.in_cylinder && first.is_some_and(|l| l.n1 > options.min_time);
            row.agrees_on_window = agrees;
            row.n1 = first.map(|l| l.n1);
            row.n2 = first.map(|l| l.n2);
            row.oscillation_gap = Some(w.oscillation_gap);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Plans, builds and certifies a point of `O_n` in every cylinder.
///
/// `target` supplies the measures and `τ`; its own cylinder is ignored.
/// Failures are listed per cylinder and make [`DensityReport::complete`]
/// false.
#[allow(clippy::too_many_arguments)]
pub fn density_scan(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    target: &IrregularTarget,
    cylinders: &[Cylinder],
    n: u64,
    levels: usize,
    epsilon: f64,
    exec: Execution,
) -> Result<DensityReport, IrregularError> {
    if !(target.a - 2.0 * target.tau > target.b + 2.0 * target.tau) {
        return Err(IrregularError::NoGap {
            high: target.a - 2.0 * target.tau,
            low: target.b + 2.0 * target.tau,
        });
    }
    let options = PlanOptions {
        min_time: n,
        ..PlanOptions::default()
    };
    let rows = exec::map(exec, cylinders, |c| scan_one(a, space, target, c, levels.max(1), epsilon, &options));
    let certified = rows.iter().filter(|r| r.certified).count();
    Ok(DensityReport {
        n,
        levels: levels.max(1),
        high: target.high.clone(),
        low: target.low.clone(),
        a: target.a,
        b: target.b,
        tau: target.tau,
        epsilon,
        total: rows.len(),
        certified,
        rows,
    })
}
