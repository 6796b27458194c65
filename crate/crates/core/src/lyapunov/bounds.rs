use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::metric::{pesin_certificate, LyapunovMetric};
use super::splitting::OseledecSplitting;
use super::LyapunovError;
use crate::cocycle::MatrixCocycle;
use crate::linalg::{cholesky_lower, op_norm, symmetric_eigenvalues, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `e^{nχ_i - ε|n|} |u|_x <= |A(x,n)u|_{f^n x}` for `u ∈ E_i(x)`.
    VectorLower,
    /// `|A(x,n)u|_{f^n x} <= e^{nχ_i + ε|n|} |u|_x`.
    VectorUpper,
    /// `e^{nχ - ε|n|} <= |A(x,n)|_{f^n x <- x}`.
    OperatorLower,
    /// `|A(x,n)|_{f^n x <- x} <= e^{nχ + ε|n|}`.
    OperatorUpper,
    /// `|u| <= |u|_x`, i.e. `G ⪰ I`.
    StandardComparison,
    /// `K(x) e^{-ε|n|} <= K(f^n x) <= K(x) e^{ε|n|}`; reported, not enforced.
    KDrift,
    /// `K(x)^{-1} |B| <= |B|_{y <- x}`.
    ChangeLower,
    /// `|B|_{y <- x} <= K(y) |B|`.
    ChangeUpper,
}

/// One instance `lhs <= rhs`, compared on log scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub orbit_index: usize,
    pub n: i64,
    pub block: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `log rhs - log lhs`; negative means violated.
    pub log_margin: f64,
    pub pass: bool,
}

impl std::fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:?} at x_{} n={} block={:?}: {:.6e} <= {:.6e} fails (log margin {:.3e})",
            self.kind, self.orbit_index, self.n, self.block, self.lhs, self.rhs, self.log_margin
        )
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundsOptions {
    pub n_min: i64,
    pub n_max: i64,
    /// Relative tolerance on each inequality.
    pub tolerance: f64,
    /// Random matrices per orbit pair for the change-of-norm bounds.
    pub samples: usize,
    pub seed: u64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            n_min: -20,
            n_max: 20,
            tolerance: 1e-6,
            samples: 16,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub word: String,
    pub epsilon: f64,
    pub checks: usize,
    pub failures: usize,
    /// Check with the smallest log margin among the enforced kinds.
    pub worst: Option<BoundCheck>,
    pub drift_ok: bool,
    pub level: f64,
    pub seed: u64,
}

struct Collector {
    tol: f64,
    checks: usize,
    failures: usize,
    worst: Option<BoundCheck>,
    drift_ok: bool,
}

impl Collector {
    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, kind: BoundKind, j: usize, n: i64, block: Option<usize>, lhs: f64, rhs: f64) {
        let log_margin = rhs.ln() - lhs.ln();
        let pass = log_margin >= -self.tol;
        let check = BoundCheck {
            kind,
            orbit_index: j,
            n,
            block,
            lhs,
            rhs,
            log_margin,
            pass,
        };
        if kind == BoundKind::KDrift {
            self.drift_ok &= pass;
            return;
        }
        self.checks += 1;
        if !pass {
            self.failures += 1;
        }
        if self.worst.as_ref().is_none_or(|w| log_margin < w.log_margin) {
            self.worst = Some(check);
        }
    }
}

/// `A(x_j, n)` along the periodic orbit of the splitting.
fn orbit_product(a: &MatrixCocycle, word: &[u8], j: usize, n: i64) -> Matrix {
    let p = word.len() as i64;
    let m = a.dim();
    let mut acc = Matrix::identity(m, m);
    if n >= 0 {
        for k in 0..n {
            acc = a.generator(word[((j as i64 + k) % p) as usize]) * acc;
        }
    } else {
        for k in 1..=-n {
            acc = a.inverse(word[(j as i64 - k).rem_euclid(p) as usize]) * acc;
        }
    }
    acc
}

/// Operator norm of `b` restricted to the subspace spanned by `e`.
fn restricted_norm(metric: &LyapunovMetric, b: &Matrix, e: &Matrix, from: usize, to: usize) -> f64 {
    let inner = e.transpose() * metric.gram(from) * e;
    let Some(r) = cholesky_lower(&inner) else {
        return f64::NAN;
    };
    let r_inv_t = r.transpose().try_inverse().expect("factor of a positive definite matrix");
    op_norm(&(metric.factor(to).transpose() * b * e * r_inv_t))
}

/// Instance checks of the Lyapunov-norm estimates along a periodic orbit.
///
/// The operator bracket is enforced for `n >= 0` on the full space and for
/// `n < 0` on the top Oseledec block; the `K` drift is reported only.
pub fn verify_norm_bounds(
    a: &MatrixCocycle,
    splitting: &OseledecSplitting,
    metric: &LyapunovMetric,
    options: &BoundsOptions,
) -> Result<BoundsReport, LyapunovError> {
    let word = splitting.word.symbols();
    let p = word.len();
    let m = splitting.dim();
    let eps = metric.epsilon;
    let top = splitting.block_count() - 1;
    let chi = splitting.exponents[top];
    let mut c = Collector {
        tol: options.tolerance,
        checks: 0,
        failures: 0,
        worst: None,
        drift_ok: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let cert = pesin_certificate(metric);
    for j in 0..p {
        let ev = symmetric_eigenvalues(metric.gram(j));
        c.push(BoundKind::StandardComparison, j, 0, None, 1.0, ev[0]);
        for n in options.n_min..=options.n_max {
            let prod = orbit_product(a, word, j, n);
            let to = (j as i64 + n).rem_euclid(p as i64) as usize;
            let slack = (eps * n.unsigned_abs() as f64).exp();
            let to_frame = splitting.stacked(to).lu();
            for (i, &chi_i) in splitting.exponents.iter().enumerate() {
                let e = splitting.basis(j, i);
                let cols = splitting.block_columns(i);
                let mut vectors: Vec<Vector> = e.column_iter().map(|c| c.into_owned()).collect();
                let mix = Vector::from_fn(e.ncols(), |_, _| rng.gen_range(-1.0..1.0));
                vectors.push(e * mix);
                let growth = (n as f64 * chi_i).exp();
                for u in &vectors {
                    let before = metric.norm(j, u);
                    // drop roundoff leaked into the other blocks
                    let coords = to_frame.solve(&(&prod * u)).expect("splitting frame is invertible");
                    let image = splitting.basis(to, i) * coords.rows(cols.start, cols.len());
                    let after = metric.norm(to, &image);
                    c.push(BoundKind::VectorLower, j, n, Some(i), growth / slack * before, after);
                    c.push(BoundKind::VectorUpper, j, n, Some(i), after, growth * slack * before);
                }
            }
            let op = if n >= 0 {
                metric.operator_norm(&prod, j, to)
            } else {
                restricted_norm(metric, &prod, splitting.basis(j, top), j, to)
            };
            let growth = (n as f64 * chi).exp();
            c.push(BoundKind::OperatorLower, j, n, None, growth / slack, op);
            c.push(BoundKind::OperatorUpper, j, n, None, op, growth * slack);
            let k_from = cert.k_values[j];
            let k_to = cert.k_values[to];
            c.push(BoundKind::KDrift, j, n, None, k_from / slack, k_to);
            c.push(BoundKind::KDrift, j, n, None, k_to, k_from * slack);
        }
        for to in 0..p {
            for _ in 0..options.samples {
                let b = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
                let plain = op_norm(&b);
                let changed = metric.operator_norm(&b, j, to);
                c.push(BoundKind::ChangeLower, j, 0, None, plain / cert.k_values[j], changed);
                c.push(BoundKind::ChangeUpper, j, 0, None, changed, cert.k_values[to] * plain);
            }
        }
    }
    let report = BoundsReport {
        word: splitting.word.to_string(),
        epsilon: eps,
        checks: c.checks,
        failures: c.failures,
        worst: c.worst,
        drift_ok: c.drift_ok,
        level: cert.level,
        seed: options.seed,
    };
    if report.failures > 0 {
        return Err(LyapunovError::BoundViolation(Box::new(report.worst.clone().expect("a failure was recorded"))));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::{lyapunov_gram, oseledec_splitting_periodic, GramOptions};
    use crate::symbolic::ShiftSpace;

    fn setup(gens: Vec<Matrix>, word: &str, eps: f64) -> (MatrixCocycle, OseledecSplitting, LyapunovMetric) {
        let a = MatrixCocycle::new(gens).unwrap();
        let space = ShiftSpace::full_shift(a.alphabet_size());
        let s = oseledec_splitting_periodic(&a, &space, &word.parse().unwrap()).unwrap();
        let g = lyapunov_gram(&a, &s, eps, &GramOptions::default()).unwrap();
        (a, s, g)
    }

    fn diag() -> Vec<Matrix> {
        vec![Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]), Matrix::identity(2, 2)]
    }

    #[test]
    fn diagonal_suite_passes() {
        let (a, s, g) = setup(diag(), "0", 0.1);
        let r = verify_norm_bounds(&a, &s, &g, &BoundsOptions::default()).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.drift_ok);
    }

    #[test]
    fn triangular_suite_passes() {
        let t = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
        let (a, s, g) = setup(vec![t], "0", 0.1);
        verify_norm_bounds(&a, &s, &g, &BoundsOptions::default()).unwrap();
    }

    #[test]
    fn identity_suite_is_trivial() {
        let (a, s, g) = setup(vec![Matrix::identity(3, 3)], "0", 0.1);
        let r = verify_norm_bounds(&a, &s, &g, &BoundsOptions::default()).unwrap();
        assert!(r.worst.unwrap().log_margin >= -1e-12);
    }

    #[test]
    fn corrupted_gram_is_caught() {
        let (a, s, g) = setup(diag(), "01", 0.1);
        verify_norm_bounds(&a, &s, &g, &BoundsOptions::default()).unwrap();
        let bad = g.scaled_at(0, 10.0);
        let err = verify_norm_bounds(&a, &s, &bad, &BoundsOptions::default()).unwrap_err();
        assert!(matches!(err, LyapunovError::BoundViolation(_)));
    }
}
