use serde::{Deserialize, Serialize};

use super::{BlockSchedule, IrregularError, IrregularTarget, CERTIFICATION_SLACK};
use crate::cocycle::MatrixCocycle;
use crate::linalg::ScaledMatrix;
use crate::symbolic::{Cylinder, ShiftPoint, ShiftSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessLevel {
    pub level: usize,
    pub n1: u64,
    pub n2: u64,
    /// `(1/n1) log |A(y, n1)|`.
    pub high_average: f64,
    /// `(1/n2) log |A(y, n2)|`.
    pub low_average: f64,
    /// `high_average - (a - τ)`.
    pub high_slack: f64,
    /// `(b + τ) - low_average`.
    pub low_slack: f64,
    /// `log |A(y, n1)| >= log m(A(y, s)) + log |A(f^s y, H)|` with `s` the
    /// high block start.
    pub min_norm_step: bool,
}

/// Finite certificate that the running top exponent of `y` keeps crossing
/// `a - τ` upwards and `b + τ` downwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularWitness {
    pub exterior_index: usize,
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub schedule: BlockSchedule,
    pub levels: Vec<WitnessLevel>,
    /// Least high average minus greatest low average over the levels.
    pub oscillation_gap: f64,
    /// `(a - τ) - (b + τ)`.
    pub required_gap: f64,
    pub in_cylinder: bool,
    /// `y ∈ O_n` for every `n` below this (the first certified time of the
    /// last level); 0 without levels.
    pub member_below: u64,
}

/// Re-evaluates every planned comparison on `y` itself.
pub fn certify_witness(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    y: &ShiftPoint,
    schedule: &BlockSchedule,
    target: &IrregularTarget,
) -> Result<IrregularWitness, IrregularError> {
    let cylinder = Cylinder::from_window(space, &schedule.window, schedule.window_lo)?;
    let high_threshold = target.high_threshold();
    let low_threshold = target.low_threshold();
    let mut levels = Vec::with_capacity(schedule.levels.len());
    for (k, lv) in schedule.levels.iter().enumerate() {
        let level = k + 1;
        let log_n1 = a.log_norm_product(y, lv.n1);
        let high_average = log_n1 / lv.n1 as f64;
        let high_slack = high_average - high_threshold;
        if !(high_slack >= CERTIFICATION_SLACK) {
            return Err(IrregularError::CertificationFailed {
                level,
                time: lv.n1,
                average: high_average,
                threshold: high_threshold,
            });
        }
        let low_average = a.log_norm_product(y, lv.n2) / lv.n2 as f64;
        let low_slack = low_threshold - low_average;
        if !(low_slack >= CERTIFICATION_SLACK) {
            return Err(IrregularError::CertificationFailed {
                level,
                time: lv.n2,
                average: low_average,
                threshold: low_threshold,
            });
        }
        let s = lv.high_start as u64;
        let lower = a.log_min_norm_product(y, s) + a.log_norm_product(&y.shift(s as i64), lv.high_len);
        levels.push(WitnessLevel {
            level,
            n1: lv.n1,
            n2: lv.n2,
            high_average,
            low_average,
            high_slack,
            low_slack,
            min_norm_step: log_n1 >= lower - 1e-9 * (1.0 + lower.abs()),
        });
    }
    let oscillation_gap = levels.iter().map(|l| l.high_average).fold(f64::INFINITY, f64::min)
        - levels.iter().map(|l| l.low_average).fold(f64::NEG_INFINITY, f64::max);
    Ok(IrregularWitness {
        exterior_index: target.exterior_index,
        a: target.a,
        b: target.b,
        tau: target.tau,
        schedule: schedule.clone(),
        oscillation_gap,
        required_gap: high_threshold - low_threshold,
        in_cylinder: cylinder.contains(y),
        member_below: levels.last().map_or(0, |l| l.n1),
        levels,
    })
}

/// Result of searching for `O_n` witnesses up to a horizon. `member =
/// false` only means none was found before the horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub horizon: u64,
}

/// First `n1, n2` in `(n, horizon]` with `(1/n1) log |A(w, n1)| > a - τ`
/// and `(1/n2) log |A(w, n2)| < b + τ`.
pub fn on_membership(
    cocycle: &MatrixCocycle,
    w: &ShiftPoint,
    n: u64,
    a: f64,
    b: f64,
    tau: f64,
    horizon: u64,
) -> Membership {
    let mut acc = ScaledMatrix::identity(cocycle.dim());
    let mut n1 = None;
    let mut n2 = None;
    let mut t = 0u64;
    for run in w.runs(0, horizon as i64) {
        for j in run.lo..run.hi {
            acc.left_mul(cocycle.generator(run.symbol(j)));
            t += 1;
            if t <= n {
                continue;
            }
            let avg = acc.log_norm() / t as f64;
            if n1.is_none() && avg > a - tau {
                n1 = Some(t);
            }
            if n2.is_none() && avg < b + tau {
                n2 = Some(t);
            }
            if n1.is_some() && n2.is_some() {
                return Membership {
                    member: true,
                    n1,
                    n2,
                    horizon,
                };
            }
        }
    }
    Membership {
        member: false,
        n1,
        n2,
        horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irregular::{build_point, plan_schedule, PlanOptions};
    use crate::linalg::Matrix;
    use crate::symbolic::Word;

    fn diag_example() -> MatrixCocycle {
        MatrixCocycle::new(vec![
            Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
            Matrix::identity(2, 2),
        ])
        .unwrap()
    }

    fn pipeline(k: usize) -> (MatrixCocycle, ShiftSpace, IrregularTarget, BlockSchedule, ShiftPoint) {
        let a = diag_example();
        let space = ShiftSpace::full_shift(2);
        let cyl = Cylinder::centered(&space, &"0".parse().unwrap()).unwrap();
        let t = IrregularTarget::new(&a, &space, "0".parse().unwrap(), "1".parse().unwrap(), 0.05, &cyl, 1).unwrap();
        let s = plan_schedule(&a, &space, &t, k, 0.0125, &PlanOptions::default()).unwrap();
        let y = build_point(&s, &space).unwrap();
        (a, space, t, s, y)
    }

    #[test]
    fn three_levels_certify() {
        let (a, space, t, s, y) = pipeline(3);
        let w = certify_witness(&a, &space, &y, &s, &t).unwrap();
        assert_eq!(w.levels.len(), 3);
        assert!(w.in_cylinder);
        assert!(w.oscillation_gap >= 2f64.ln() - 0.1);
        assert!(w.levels.iter().all(|l| l.min_norm_step));
        // the diagonal cocycle makes the norm count the zeros exactly
        for l in &w.levels {
            let zeros = (0..l.n1 as i64).filter(|&i| y.symbol(i) == 0).count() as f64;
            assert!((l.high_average - zeros * 2f64.ln() / l.n1 as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn single_level_is_strict() {
        let (a, space, t, s, y) = pipeline(1);
        let w = certify_witness(&a, &space, &y, &s, &t).unwrap();
        assert!(w.levels[0].high_slack > 0.0 && w.levels[0].low_slack > 0.0);
    }

    #[test]
    fn constant_cocycle_fails_at_level_one() {
        let (_, space, t, s, y) = pipeline(2);
        let c = MatrixCocycle::constant(Matrix::identity(2, 2), 2).unwrap();
        let err = certify_witness(&c, &space, &y, &s, &t).unwrap_err();
        assert!(matches!(err, IrregularError::CertificationFailed { level: 1, .. }));
    }

    #[test]
    fn membership_of_the_witness() {
        let (a, _, t, s, y) = pipeline(1);
        let n = s.levels[0].n1 - 1;
        let m = on_membership(&a, &y, n, t.a, t.b, t.tau, s.levels[0].n2 + 10);
        assert!(m.member);
        assert!(m.n1.unwrap() > n && m.n2.unwrap() <= s.levels[0].n2);
    }

    #[test]
    fn high_fixed_point_is_never_a_member() {
        let a = diag_example();
        let x = ShiftPoint::periodic(&"0".parse::<Word>().unwrap());
        let m = on_membership(&a, &x, 0, 2f64.ln(), 0.0, 0.1, 10_000);
        assert!(!m.member && m.n1 == Some(1) && m.n2.is_none());
        let id = MatrixCocycle::constant(Matrix::identity(2, 2), 2).unwrap();
        let m = on_membership(&id, &x, 0, 1.0, 0.0, 0.1, 10_000);
        assert!(!m.member && m.n1.is_none());
    }
}
