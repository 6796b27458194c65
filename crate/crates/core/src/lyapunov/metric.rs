use serde::Serialize;

use super::splitting::OseledecSplitting;
use super::LyapunovError;
use crate::cocycle::MatrixCocycle;
use crate::linalg::{cholesky_lower, op_norm, symmetric_eigenvalues, symmetrize, Matrix, Vector};
use crate::symbolic::Word;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GramOptions {
    /// Bound on the discarded tail of each block series, relative to the
    /// `n = 0` term.
    pub tolerance: f64,
    /// Largest admissible truncation length.
    pub cap: usize,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            cap: 100_000,
        }
    }
}

/// Gram matrices of the ε-Lyapunov scalar product at each orbit point.
#[derive(Clone, Debug, Serialize)]
pub struct LyapunovMetric {
    pub epsilon: f64,
    pub word: Word,
    pub tolerance: f64,
    /// Largest `T` used: the series were summed over `|n| <= T`.
    pub truncation: usize,
    #[serde(skip)]
    grams: Vec<Matrix>,
    #[serde(skip)]
    factors: Vec<Matrix>,
}

impl LyapunovMetric {
    /// Metric from explicit Gram matrices, e.g. the standard one.
    pub fn from_grams(epsilon: f64, word: Word, grams: Vec<Matrix>) -> Option<Self> {
        let grams: Vec<Matrix> = grams.iter().map(symmetrize).collect();
        let factors = grams.iter().map(cholesky_lower).collect::<Option<Vec<_>>>()?;
        Some(Self {
            epsilon,
            word,
            tolerance: 0.0,
            truncation: 0,
            grams,
            factors,
        })
    }

    pub fn standard(word: Word, dim: usize) -> Self {
        let p = word.len();
        Self::from_grams(0.0, word, vec![Matrix::identity(dim, dim); p]).expect("identity is positive definite")
    }

    pub fn period(&self) -> usize {
        self.grams.len()
    }

    pub fn gram(&self, j: usize) -> &Matrix {
        &self.grams[j % self.period()]
    }

    /// Lower factor `L_j` with `G_j = L_j L_j^T`.
    pub fn factor(&self, j: usize) -> &Matrix {
        &self.factors[j % self.period()]
    }

    pub fn inner(&self, j: usize, u: &Vector, v: &Vector) -> f64 {
        (u.transpose() * self.gram(j) * v)[(0, 0)]
    }

    pub fn norm(&self, j: usize, u: &Vector) -> f64 {
        (self.factor(j).transpose() * u).norm()
    }

    /// `K_ε(x_j)`: smallest `K` with `|u|_{x_j} <= K |u|`.
    pub fn k_value(&self, j: usize) -> f64 {
        symmetric_eigenvalues(self.gram(j)).last().copied().unwrap_or(1.0).sqrt()
    }

    /// `|B|_{x_to <- x_from}`.
    pub fn operator_norm(&self, b: &Matrix, from: usize, to: usize) -> f64 {
        lyapunov_operator_norm(b, self.gram(from), self.gram(to))
    }

    /// Copy with the Gram matrix at `x_j` multiplied by `factor`.
    pub fn scaled_at(&self, j: usize, factor: f64) -> Self {
        let mut grams = self.grams.clone();
        let p = self.period();
        grams[j % p] *= factor;
        let mut out = Self::from_grams(self.epsilon, self.word.clone(), grams).expect("positive rescaling");
        out.tolerance = self.tolerance;
        out.truncation = self.truncation;
        out
    }
}

/// `sup |B u|_to / |u|_from` for Gram matrices `g_from`, `g_to`, i.e. the
/// top singular value of `L_to^T B L_from^{-T}`. NaN if a Gram matrix is not
/// positive definite.
pub fn lyapunov_operator_norm(b: &Matrix, g_from: &Matrix, g_to: &Matrix) -> f64 {
    let (Some(lf), Some(lt)) = (cholesky_lower(&symmetrize(g_from)), cholesky_lower(&symmetrize(g_to))) else {
        return f64::NAN;
    };
    let Some(lf_inv) = lf.transpose().try_inverse() else {
        return f64::NAN;
    };
    op_norm(&(lt.transpose() * b * lf_inv))
}

/// One-sided block series `Σ_{n>=1} e^{-ε n} W_n^T W_n` with `W_n` produced
/// by `step`; returns the sum and the number of terms.
fn half_series(
    start: &Matrix,
    mut step: impl FnMut(usize, &Matrix) -> Matrix,
    epsilon: f64,
    min_terms: usize,
    options: &GramOptions,
) -> Result<(Matrix, usize), LyapunovError> {
    let d = start.ncols();
    let mut acc = Matrix::zeros(d, d);
    let mut w = start.clone();
    let mut peak = op_norm(start).powi(2);
    let geometric = 1.0 / (1.0 - (-epsilon).exp());
    let mut n = 0;
    loop {
        n += 1;
        w = step(n, &w);
        let wn = op_norm(&w).powi(2);
        peak = peak.max(wn);
        acc += w.transpose() * &w * (-epsilon * n as f64).exp();
        let tail = peak * (-epsilon * (n + 1) as f64).exp() * geometric;
        if n >= min_terms && tail <= 0.5 * options.tolerance {
            return Ok((acc, n));
        }
        if n >= options.cap {
            return Err(LyapunovError::SlowDecay { cap: options.cap });
        }
    }
}

/// ε-Lyapunov scalar product along the orbit of a splitting. Each block
/// series is rescaled by `e^{-χ_i n}` and summed over `|n| <= T`, with `T`
/// chosen so the geometric tail estimate is below the tolerance.
pub fn lyapunov_gram(
    a: &MatrixCocycle,
    splitting: &OseledecSplitting,
    epsilon: f64,
    options: &GramOptions,
) -> Result<LyapunovMetric, LyapunovError> {
    let gap = splitting
        .exponents
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if !(epsilon > 0.0) || epsilon >= gap {
        return Err(LyapunovError::EpsilonTooLarge { epsilon, gap });
    }
    let word = splitting.word.symbols();
    let p = word.len();
    let m = splitting.dim();
    let mut grams = Vec::with_capacity(p);
    let mut truncation = 0;
    for j in 0..p {
        let b = splitting.stacked(j);
        let mut mid = Matrix::zeros(m, m);
        for (i, &chi) in splitting.exponents.iter().enumerate() {
            let e = splitting.basis(j, i);
            // projecting back onto the block keeps rounding from leaking
            // into faster blocks, where it would be amplified
            let project = |k: usize, w: Matrix| {
                let b = splitting.basis(k, i);
                b * (b.transpose() * w)
            };
            let forward = |n: usize, w: &Matrix| project(j + n, a.generator(word[(j + n - 1) % p]) * w * (-chi).exp());
            let backward = |n: usize, w: &Matrix| {
                let idx = (j as i64 - n as i64).rem_euclid(p as i64) as usize;
                project(idx, a.inverse(word[idx]) * w * chi.exp())
            };
            let (fwd, tf) = half_series(e, forward, epsilon, p, options)?;
            let (bwd, tb) = half_series(e, backward, epsilon, p, options)?;
            truncation = truncation.max(tf).max(tb);
            let block = (e.transpose() * e + fwd + bwd) * m as f64;
            let cols = splitting.block_columns(i);
            mid.view_mut((cols.start, cols.start), (cols.len(), cols.len())).copy_from(&block);
        }
        let b_inv = b.try_inverse().ok_or(LyapunovError::DegenerateSplitting)?;
        grams.push(symmetrize(&(b_inv.transpose() * mid * &b_inv)));
    }
    let mut metric =
        LyapunovMetric::from_grams(epsilon, splitting.word.clone(), grams).ok_or(LyapunovError::DegenerateSplitting)?;
    metric.tolerance = options.tolerance;
    metric.truncation = truncation;
    Ok(metric)
}

#[derive(Clone, Debug, Serialize)]
pub struct PesinCertificate {
    pub epsilon: f64,
    /// `K_ε(x_j)` along the orbit.
    pub k_values: Vec<f64>,
    /// `l = max_j K_ε(x_j)`; the orbit lies in the block of this level.
    pub level: f64,
    /// Largest `|log K(x_{j+1}) - log K(x_j)|`.
    pub max_drift: f64,
    /// Whether every step satisfies `K e^{-ε} <= K' <= K e^{ε}`.
    pub drift_ok: bool,
}

impl PesinCertificate {
    pub fn contains_orbit(&self, level: f64) -> bool {
        self.level <= level
    }
}

pub fn pesin_certificate(metric: &LyapunovMetric) -> PesinCertificate {
    let p = metric.period();
    let k_values: Vec<f64> = (0..p).map(|j| metric.k_value(j)).collect();
    let level = k_values.iter().copied().fold(1.0, f64::max);
    let max_drift = (0..p)
        .map(|j| (k_values[(j + 1) % p].ln() - k_values[j].ln()).abs())
        .fold(0.0, f64::max);
    PesinCertificate {
        epsilon: metric.epsilon,
        k_values,
        level,
        max_drift,
        drift_ok: max_drift <= metric.epsilon * (1.0 + 1e-12),
    }
}
