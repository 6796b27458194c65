//! Locally constant matrix cocycles over a shift: products along orbits,
//! inverse products, minimal norms, exterior powers and Hölder data.

mod exterior;
mod holder;

pub use exterior::{compound_matrix, exterior_power, k_subsets};
pub use holder::{holder_certificate, HolderCertificate};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix, ScaledMatrix};
use crate::symbolic::{Run, ShiftPoint, Symbol};

/// Entry magnitude beyond which exact products refuse to continue.
pub const OVERFLOW_BUDGET: f64 = 1e150;

/// Periodic runs at least this many periods long are multiplied by
/// repeated squaring of the period product.
const POWER_MIN_PERIODS: usize = 2;
const POWER_MAX_PERIOD: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("cocycle needs at least one generator")]
    Empty,
    #[error("generator {symbol} is {rows}x{cols}, expected {dim}x{dim}")]
    DimensionMismatch {
        symbol: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("generator {0} is singular")]
    SingularGenerator(usize),
    #[error("matrix is numerically singular")]
    Singular,
    #[error("product entries exceed {OVERFLOW_BUDGET:e} after {step} steps; use log-scaled products")]
    NumericOverflow { step: u64 },
    #[error("symbol {symbol} has no generator (alphabet has {alphabet} generators)")]
    MissingGenerator { symbol: Symbol, alphabet: usize },
    #[error("exterior power index {index} outside 1..={dim}")]
    BadExteriorIndex { index: usize, dim: usize },
}

/// A locally constant cocycle: `A(x)` depends only on `x_0`.
#[derive(Clone, Debug)]
pub struct MatrixCocycle {
    dim: usize,
    generators: Vec<Matrix>,
    inverses: Vec<Matrix>,
    bound: f64,
    exact_threshold: u64,
}

/// Serializable form: one row-major matrix per symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleDescription {
    pub dimension: usize,
    pub generators: Vec<Vec<Vec<f64>>>,
}

/// `A(x, n)` together with the data that produced it.
#[derive(Clone, Debug)]
pub struct CocycleProduct {
    pub value: Matrix,
    pub base_point: ShiftPoint,
    pub steps: i64,
}

impl MatrixCocycle {
    pub fn new(generators: Vec<Matrix>) -> Result<Self, CocycleError> {
        let first = generators.first().ok_or(CocycleError::Empty)?;
        let dim = first.nrows();
        let mut inverses = Vec::with_capacity(generators.len());
        let mut bound: f64 = 1.0;
        for (symbol, g) in generators.iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim || dim == 0 {
                return Err(CocycleError::DimensionMismatch {
                    symbol,
                    rows: g.nrows(),
                    cols: g.ncols(),
                    dim,
                });
            }
            let sv = linalg::singular_values(g);
            let (top, bottom) = (sv[0], sv[sv.len() - 1]);
            if !(bottom > 1e-13 * top) || !top.is_finite() {
                return Err(CocycleError::SingularGenerator(symbol));
            }
            let inv = g
                .clone()
                .try_inverse()
                .ok_or(CocycleError::SingularGenerator(symbol))?;
            bound = bound.max(top).max(1.0 / bottom);
            inverses.push(inv);
        }
        Ok(Self {
            dim,
            generators,
            inverses,
            bound,
            exact_threshold: 64,
        })
    }

    pub fn from_description(d: &CocycleDescription) -> Result<Self, CocycleError> {
        let gens = d
            .generators
            .iter()
            .enumerate()
            .map(|(symbol, rows)| {
                if rows.len() != d.dimension || rows.iter().any(|r| r.len() != d.dimension) {
                    return Err(CocycleError::DimensionMismatch {
                        symbol,
                        rows: rows.len(),
                        cols: rows.first().map_or(0, |r| r.len()),
                        dim: d.dimension,
                    });
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Ok(Matrix::from_row_slice(d.dimension, d.dimension, &flat))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(gens)
    }

    pub fn description(&self) -> CocycleDescription {
        CocycleDescription {
            dimension: self.dim,
            generators: self
                .generators
                .iter()
                .map(|g| (0..self.dim).map(|r| g.row(r).iter().copied().collect()).collect())
                .collect(),
        }
    }

    /// Same matrix for every symbol.
    pub fn constant(matrix: Matrix, alphabet_size: usize) -> Result<Self, CocycleError> {
        Self::new(vec![matrix; alphabet_size])
    }

    /// Products shorter than this are formed exactly before taking norms.
    pub fn with_exact_threshold(mut self, threshold: u64) -> Self {
        self.exact_threshold = threshold;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet_size(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn generator(&self, s: Symbol) -> &Matrix {
        &self.generators[s as usize]
    }

    pub fn inverse(&self, s: Symbol) -> &Matrix {
        &self.inverses[s as usize]
    }

    /// `C = max over symbols of max(|A|, |A^-1|)`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Hölder coefficient bound `2 C e^{decay * alpha}` valid for every
    /// exponent alpha.
    pub fn holder_bound(&self, decay: f64, alpha: f64) -> f64 {
        2.0 * self.bound * (decay * alpha).exp()
    }

    /// Exact `A(x, n)` for any integer `n`; refuses once entries leave the
    /// representable budget.
    pub fn product(&self, x: &ShiftPoint, n: i64) -> Result<CocycleProduct, CocycleError> {
        let mut acc = Matrix::identity(self.dim, self.dim);
        for k in 0..n.unsigned_abs() {
            if n > 0 {
                acc = self.generator(x.symbol(k as i64)) * acc;
            } else {
                acc = self.inverse(x.symbol(-(k as i64) - 1)) * acc;
            }
            if linalg::max_abs(&acc) > OVERFLOW_BUDGET {
                return Err(CocycleError::NumericOverflow { step: k + 1 });
            }
        }
        Ok(CocycleProduct {
            value: acc,
            base_point: x.clone(),
            steps: n,
        })
    }

    /// Product of `steps` generators read cyclically from `word` starting at
    /// `phase`, later symbols on the left.
    fn word_product(&self, word: &[Symbol], phase: usize, steps: usize) -> ScaledMatrix {
        let mut acc = ScaledMatrix::identity(self.dim);
        let p = word.len();
        for k in 0..steps {
            acc.left_mul(self.generator(word[(phase + k) % p]));
        }
        acc
    }

    fn word_inverse_product(&self, word: &[Symbol], phase: usize, steps: usize) -> ScaledMatrix {
        let mut acc = ScaledMatrix::identity(self.dim);
        let p = word.len();
        for k in 0..steps {
            acc.right_mul(self.inverse(word[(phase + k) % p]));
        }
        acc
    }

    /// Product along one run, later coordinates on the left.
    pub fn run_product(&self, run: &Run) -> ScaledMatrix {
        let len = (run.hi - run.lo) as usize;
        let p = run.period();
        let phase = run.phase(run.lo);
        if len >= POWER_MIN_PERIODS * p && p <= POWER_MAX_PERIOD {
            let mut seg = self.word_product(&run.word, phase, p).pow((len / p) as u64);
            seg.left_mul_scaled(&self.word_product(&run.word, phase, len % p));
            seg
        } else {
            self.word_product(&run.word, phase, len)
        }
    }

    fn run_inverse(&self, run: &Run) -> ScaledMatrix {
        let len = (run.hi - run.lo) as usize;
        let p = run.period();
        let phase = run.phase(run.lo);
        if len >= POWER_MIN_PERIODS * p && p <= POWER_MAX_PERIOD {
            let mut seg = self.word_inverse_product(&run.word, phase, p).pow((len / p) as u64);
            seg.right_mul_scaled(&self.word_inverse_product(&run.word, phase, len % p));
            seg
        } else {
            self.word_inverse_product(&run.word, phase, len)
        }
    }

    /// `A(x, n)` for `n >= 0` in log-scaled form. Long periodic runs of the
    /// point are handled by repeated squaring.
    pub fn scaled_product(&self, x: &ShiftPoint, n: u64) -> ScaledMatrix {
        let mut acc = ScaledMatrix::identity(self.dim);
        for run in x.runs(0, n as i64) {
            acc.left_mul_scaled(&self.run_product(&run));
        }
        acc
    }

    /// `A(x, n)^{-1}` for `n >= 0` in log-scaled form.
    pub fn scaled_inverse_product(&self, x: &ShiftPoint, n: u64) -> ScaledMatrix {
        let mut acc = ScaledMatrix::identity(self.dim);
        for run in x.runs(0, n as i64) {
            acc.right_mul_scaled(&self.run_inverse(&run));
        }
        acc
    }

    /// `log |A(x, n)|` in the operator 2-norm; `0` for `n = 0`.
    pub fn log_norm_product(&self, x: &ShiftPoint, n: u64) -> f64 {
        if n < self.exact_threshold {
            if let Ok(p) = self.product(x, n as i64) {
                return linalg::op_norm(&p.value).ln();
            }
        }
        self.scaled_product(x, n).log_norm()
    }

    /// `log m(A(x, n)) = -log |A(x, n)^{-1}|`.
    pub fn log_min_norm_product(&self, x: &ShiftPoint, n: u64) -> f64 {
        -self.scaled_inverse_product(x, n).log_norm()
    }

    /// Product of the generators along one period of `word`,
    /// `A(w_{p-1}) ... A(w_0)`, in log-scaled form.
    pub fn period_product(&self, word: &[Symbol]) -> ScaledMatrix {
        self.word_product(word, 0, word.len())
    }

    pub fn check_alphabet(&self, word: &[Symbol]) -> Result<(), CocycleError> {
        match word.iter().find(|&&s| s as usize >= self.generators.len()) {
            Some(&symbol) => Err(CocycleError::MissingGenerator {
                symbol,
                alphabet: self.generators.len(),
            }),
            None => Ok(()),
        }
    }
}

/// Smallest singular value `m(B) = |B^{-1}|^{-1}`.
pub fn minimal_norm(b: &Matrix) -> Result<f64, CocycleError> {
    let sv = linalg::singular_values(b);
    let (top, bottom) = (sv[0], sv[sv.len() - 1]);
    if bottom <= 1e-14 * top || bottom == 0.0 {
        return Err(CocycleError::Singular);
    }
    Ok(bottom)
}
