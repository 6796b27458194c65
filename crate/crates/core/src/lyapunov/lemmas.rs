use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::metric::{pesin_certificate, LyapunovMetric};
use super::splitting::OseledecSplitting;
use super::{LyapunovError, Verdict};
use crate::cocycle::MatrixCocycle;
use crate::linalg::Vector;
use crate::symbolic::{shift_metric, ShiftPoint, ShiftSpace};

/// `η = (1 - e^{-(χ - ν - 2ε)}) / 2`: half the contraction of the cone
/// aperture that the exact orbit achieves in one step.
pub fn default_cone_eta(chi: f64, nu: f64, epsilon: f64) -> f64 {
    0.5 * (1.0 - (-(chi - nu - 2.0 * epsilon)).exp())
}

/// Smallest `δ` with `d(f^i y, f^i x) <= δ e^{-λ min(i, n-i)}` for
/// `0 <= i <= n`, distances searched up to `horizon`.
pub fn exponential_closeness(space: &ShiftSpace, x: &ShiftPoint, y: &ShiftPoint, n: u64, horizon: u64) -> f64 {
    let lambda = space.decay();
    (0..=n as i64)
        .map(|i| {
            let d = shift_metric(space, &x.shift(i), &y.shift(i), horizon).value();
            d * (lambda * i.min(n as i64 - i) as f64).exp()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeOptions {
    /// Cone shrink parameter; `None` uses [`default_cone_eta`].
    pub eta: Option<f64>,
    /// Hölder exponent of the cocycle.
    pub alpha: f64,
    /// Sampled vectors per step.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        Self {
            eta: None,
            alpha: 1.0,
            samples: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub verdict: Verdict,
    pub eta: f64,
    pub epsilon: f64,
    /// `min(λα, (χ - ν)/2)`.
    pub epsilon_bound: f64,
    pub steps: usize,
    pub samples: usize,
    /// Smallest `((1-η)|v'| - |v^⊥|) / |v'|` over all images.
    pub cone_margin: f64,
    /// Smallest `log|v'| - log|u'| - (χ - 2ε)`.
    pub growth_margin: f64,
    pub seed: u64,
}

/// Splits `u` at `x_j` into its top-block part and the rest, returning
/// `(|u'|_j, |u^⊥|_j)`.
fn split_norms(splitting: &OseledecSplitting, metric: &LyapunovMetric, j: usize, u: &Vector) -> (f64, f64) {
    let b = splitting.stacked(j);
    let coords = b.clone().lu().solve(u).expect("stacked bases are invertible");
    let top = splitting.block_columns(splitting.block_count() - 1);
    let mut top_coords = coords.clone();
    for k in 0..coords.len() {
        if top.contains(&k) {
            top_coords[k] = 0.0;
        }
    }
    let rest = &b * top_coords;
    let prime = u - &rest;
    (metric.norm(j, &prime), metric.norm(j, &rest))
}

/// Cone invariance and growth for the shadowing orbit `y`: for every step
/// `i < n`, samples `u ∈ K_i` and checks `A(y_i) u ∈ K_{i+1}^η` and
/// `|(A(y_i) u)'|_{i+1} >= e^{χ - 2ε} |u'|_i`.
pub fn cone_verify(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    splitting: &OseledecSplitting,
    metric: &LyapunovMetric,
    y: &ShiftPoint,
    n: usize,
    options: &ConeOptions,
) -> Result<ConeReport, LyapunovError> {
    let l = splitting.block_count();
    let eps = metric.epsilon;
    let chi = splitting.exponents[l - 1];
    let nu = if l >= 2 { splitting.exponents[l - 2] } else { f64::NEG_INFINITY };
    let epsilon_bound = (space.decay() * options.alpha).min((chi - nu) / 2.0);
    if l < 2 {
        return Ok(ConeReport {
            verdict: Verdict::Vacuous,
            eta: options.eta.unwrap_or(0.0),
            epsilon: eps,
            epsilon_bound,
            steps: n,
            samples: 0,
            cone_margin: f64::INFINITY,
            growth_margin: f64::INFINITY,
            seed: options.seed,
        });
    }
    if !(eps < epsilon_bound) {
        return Err(LyapunovError::HypothesisViolated(format!(
            "epsilon {eps} is not below min(lambda*alpha, (chi-nu)/2) = {epsilon_bound}"
        )));
    }
    let eta = options.eta.unwrap_or_else(|| default_cone_eta(chi, nu, eps));
    let m = splitting.dim();
    let top = splitting.block_columns(l - 1);
    let p = splitting.period();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut cone_margin = f64::INFINITY;
    let mut growth_margin = f64::INFINITY;
    let mut count = 0;
    for i in 0..n {
        let j = i % p;
        let b = splitting.stacked(j);
        let g = a.generator(y.symbol(i as i64));
        for s in 0..options.samples {
            let mut prime_c = Vector::zeros(m);
            let mut rest_c = Vector::zeros(m);
            for k in 0..m {
                let r = rng.gen_range(-1.0..1.0);
                if top.contains(&k) {
                    prime_c[k] = r;
                } else {
                    rest_c[k] = r;
                }
            }
            let prime: Vector = &b * prime_c;
            let rest: Vector = &b * rest_c;
            let pn = metric.norm(j, &prime);
            let rn = metric.norm(j, &rest);
            if !(pn > 0.0) || !(rn > 0.0) {
                continue;
            }
            // first sample on the boundary, the rest spread over the cone
            let ratio = if s == 0 { 1.0 } else { rng.gen_range(0.0..=1.0) };
            let u = &prime / pn + &rest * (ratio / rn);
            let image: Vector = g * &u;
            let (vp, vr) = split_norms(splitting, metric, j + 1, &image);
            let cm = ((1.0 - eta) * vp - vr) / vp;
            let gm = vp.ln() - (chi - 2.0 * eps);
            count += 1;
            cone_margin = cone_margin.min(cm);
            growth_margin = growth_margin.min(gm);
            if cm < 0.0 || gm < 0.0 {
                return Err(LyapunovError::ConeEscape {
                    step: i,
                    vector: u.iter().copied().collect(),
                    ratio: vr / vp,
                    growth: vp.ln(),
                });
            }
        }
    }
    Ok(ConeReport {
        verdict: Verdict::Pass,
        eta,
        epsilon: eps,
        epsilon_bound,
        steps: n,
        samples: count,
        cone_margin,
        growth_margin,
        seed: options.seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma31Report {
    pub n: u64,
    pub level: f64,
    pub epsilon: f64,
    pub decay: f64,
    pub alpha: f64,
    /// Measured exponential closeness of `y` to the `x` segment.
    pub delta: f64,
    /// `log |A(y,n)|_{f^n x <- x}`.
    pub log_lyapunov_norm: f64,
    /// `log |A(y,n)|`.
    pub log_norm: f64,
    /// `log |A(x,n)|`.
    pub log_norm_reference: f64,
    /// Smallest `c >= 0` for which the Lyapunov-norm bound holds here.
    pub minimal_c: f64,
    /// `log(l^2 e^{c l δ^α} e^{n(χ+ε)}) - log|A(y,n)|`.
    pub standard_margin: f64,
    /// `l^2 e^l e^{n(χ+ε)} / |A(y,n)|`.
    pub eq9_ratio: f64,
    pub eq9_pass: bool,
    /// `c δ^α < 1`.
    pub proof_form: bool,
    /// `c l δ^α <= l`.
    pub display_form: bool,
}

/// Instance of the norm estimate for orbit segments exponentially close to
/// a periodic orbit. `y` is compared with the periodic point of the
/// splitting over `0..=n`.
#[allow(clippy::too_many_arguments)]
pub fn lemma31_verify(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    splitting: &OseledecSplitting,
    metric: &LyapunovMetric,
    y: &ShiftPoint,
    n: u64,
    alpha: f64,
    horizon: u64,
) -> Result<Lemma31Report, LyapunovError> {
    let eps = metric.epsilon;
    let lambda = space.decay();
    if !(lambda > eps / alpha) {
        return Err(LyapunovError::HypothesisViolated(format!(
            "decay {lambda} must exceed epsilon/alpha = {}",
            eps / alpha
        )));
    }
    let x = ShiftPoint::periodic(&splitting.word);
    let p = splitting.period();
    let chi = *splitting.exponents.last().expect("non-empty spectrum");
    let level = pesin_certificate(metric).level;
    let delta = exponential_closeness(space, &x, y, n, horizon);

    let prod = a.scaled_product(y, n);
    let to = (n % p as u64) as usize;
    let log_lyapunov_norm = prod.log_scale() + metric.operator_norm(prod.normalized(), 0, to).ln();
    let log_norm = prod.log_norm();
    let log_norm_reference = a.log_norm_product(&x, n);
    let growth = n as f64 * (chi + eps);

    let excess = log_lyapunov_norm - growth;
    let scale = level * delta.powf(alpha);
    let minimal_c = if excess <= 0.0 {
        0.0
    } else if scale > 0.0 {
        excess / scale
    } else {
        f64::INFINITY
    };
    let l2 = 2.0 * level.ln();
    let standard_margin = l2 + minimal_c * scale + growth - log_norm;
    let eq9_log = l2 + level + growth - log_norm;
    let cd = minimal_c * delta.powf(alpha);
    Ok(Lemma31Report {
        n,
        level,
        epsilon: eps,
        decay: lambda,
        alpha,
        delta,
        log_lyapunov_norm,
        log_norm,
        log_norm_reference,
        minimal_c,
        standard_margin,
        eq9_ratio: eq9_log.exp(),
        eq9_pass: eq9_log > 0.0,
        proof_form: cd < 1.0,
        display_form: cd * level <= level,
    })
}
