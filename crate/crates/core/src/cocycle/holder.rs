use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::MatrixCocycle;
use crate::linalg::op_norm;
use crate::symbolic::{shift_metric, Cylinder, ShiftPoint, ShiftSpace, Word};

#[derive(Clone, Debug, Serialize)]
pub struct HolderCertificate {
    pub alpha: f64,
    /// Largest observed `|A(x) - A(y)| / d(x, y)^alpha`.
    pub coefficient: f64,
    pub pairs: usize,
    /// `2 C e^{decay * alpha}`, valid for every locally constant cocycle.
    pub analytic_bound: f64,
}

fn random_point(space: &ShiftSpace, rng: &mut ChaCha8Rng, half_width: usize) -> ShiftPoint {
    let k = space.alphabet_size();
    let mut symbols = vec![rng.gen_range(0..k) as u8];
    for _ in 0..2 * half_width {
        let last = *symbols.last().unwrap();
        let succ: Vec<u8> = space.successors(last).collect();
        symbols.push(succ[rng.gen_range(0..succ.len())]);
    }
    Cylinder::from_window(space, &Word::new(symbols), -(half_width as i64))
        .expect("random walk word is legal")
        .base()
        .clone()
}

/// Measured Hölder coefficient of `a` over `samples` random point pairs.
pub fn holder_certificate(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    alpha: f64,
    samples: usize,
    seed: u64,
) -> HolderCertificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefficient: f64 = 0.0;
    for _ in 0..samples {
        let x = random_point(space, &mut rng, 6);
        // half of the pairs share a long common window with x
        let y = if rng.gen_bool(0.5) {
            let keep = rng.gen_range(0..6i64);
            let tail = random_point(space, &mut rng, 6);
            crate::symbolic::splice(
                &[
                    crate::symbolic::Segment::new(x.clone(), -keep, keep),
                    crate::symbolic::Segment::new(tail, keep + space.spec_gap() as i64 + 1, keep + 40),
                ],
                space,
            )
            .unwrap_or_else(|_| x.clone())
        } else {
            random_point(space, &mut rng, 6)
        };
        let d = shift_metric(space, &x, &y, 64).value();
        let diff = op_norm(&(a.generator(x.symbol(0)) - a.generator(y.symbol(0))));
        if diff == 0.0 {
            continue;
        }
        coefficient = coefficient.max(diff / d.powf(alpha));
    }
    HolderCertificate {
        alpha,
        coefficient,
        pairs: samples,
        analytic_bound: a.holder_bound(space.decay(), alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn constant_cocycle_has_zero_coefficient() {
        let a = MatrixCocycle::constant(Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]), 2).unwrap();
        let c = holder_certificate(&a, &ShiftSpace::full_shift(2), 1.0, 200, 1);
        assert_eq!(c.coefficient, 0.0);
    }

    #[test]
    fn diagonal_versus_identity() {
        let a = MatrixCocycle::new(vec![
            Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
            Matrix::identity(2, 2),
        ])
        .unwrap();
        let space = ShiftSpace::full_shift(2);
        let c = holder_certificate(&a, &space, 1.0, 400, 3);
        // |diag(1, -1/2)| = 1 at distance 1
        assert!((c.coefficient - 1.0).abs() < 1e-12);
        assert!(c.coefficient <= c.analytic_bound);
    }
}
