use nalgebra::{Complex, Schur};
use serde::Serialize;

use super::LyapunovError;
use crate::cocycle::MatrixCocycle;
use crate::linalg::Matrix;
use crate::symbolic::{ShiftSpace, Word};

/// Per-period log-moduli closer than this are the same exponent (rounding).
pub const MERGE_TOLERANCE: f64 = 1e-9;
/// Per-period log-moduli between the merge tolerance and this are refused.
pub const SEPARATION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumBlock {
    pub exponent: f64,
    pub multiplicity: usize,
}

/// Distinct exponents with multiplicities, increasing, for the periodic
/// orbit measure of `word`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovSpectrum {
    pub word: Word,
    pub blocks: Vec<SpectrumBlock>,
}

impl LyapunovSpectrum {
    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity).sum()
    }

    /// Largest exponent `χ`.
    pub fn max_exponent(&self) -> f64 {
        self.blocks.last().map(|b| b.exponent).unwrap_or(f64::NAN)
    }

    /// Second largest distinct exponent `ν`, absent for a single block.
    pub fn second_exponent(&self) -> Option<f64> {
        let n = self.blocks.len();
        (n >= 2).then(|| self.blocks[n - 2].exponent)
    }

    /// Exponents repeated by multiplicity, decreasing.
    pub fn exponents_desc(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .rev()
            .flat_map(|b| std::iter::repeat_n(b.exponent, b.multiplicity))
            .collect()
    }

    /// `Λ_i`: sum of the `i` largest exponents with multiplicity.
    pub fn top_sum(&self, i: usize) -> f64 {
        self.exponents_desc().iter().take(i).sum()
    }

    /// `Σ m_i χ_i`.
    pub fn weighted_sum(&self) -> f64 {
        self.blocks.iter().map(|b| b.multiplicity as f64 * b.exponent).sum()
    }

    /// Same exponents and multiplicities within `tol`.
    pub fn approx_eq(&self, other: &LyapunovSpectrum, tol: f64) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.multiplicity == b.multiplicity && (a.exponent - b.exponent).abs() <= tol)
    }
}

/// Eigen-data of the period product.
pub(crate) struct PeriodEigen {
    /// Normalized forward product and its log-scale.
    pub mat: Matrix,
    /// Forward eigenvalues of `mat`, sorted by modulus ascending.
    pub values: Vec<Complex<f64>>,
    /// Per-period log-moduli (scale included), ascending, each taken from
    /// whichever of the forward or inverse product resolves it better.
    pub log_moduli: Vec<f64>,
    /// Index groups into `values` / `log_moduli` of equal modulus.
    pub groups: Vec<Vec<usize>>,
    /// Normalized inverse product and its eigenvalues, ascending modulus.
    pub inv_mat: Matrix,
    pub inv_values: Vec<Complex<f64>>,
    /// Log-moduli below this are resolved on the inverse product.
    pub pivot: f64,
}

fn eigenvalues(mat: &Matrix, word: &Word) -> Result<Vec<Complex<f64>>, LyapunovError> {
    if mat.nrows() == 1 {
        return Ok(vec![Complex::new(mat[(0, 0)], 0.0)]);
    }
    let schur = Schur::try_new(mat.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| LyapunovError::EigenFailure(word.to_string()))?;
    let mut v: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    if v.iter().any(|z| !(z.norm() > 0.0) || !z.re.is_finite()) {
        return Err(LyapunovError::EigenFailure(word.to_string()));
    }
    v.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    Ok(v)
}

pub(crate) fn period_eigen(a: &MatrixCocycle, word: &Word) -> Result<PeriodEigen, LyapunovError> {
    let s = word.symbols();
    let fwd = a.period_product(s);
    let mut inv = crate::linalg::ScaledMatrix::identity(a.dim());
    for &sym in s {
        inv.right_mul(a.inverse(sym));
    }
    let values = eigenvalues(fwd.normalized(), word)?;
    let inv_values = eigenvalues(inv.normalized(), word)?;
    let fwd_log_norm = fwd.log_norm();
    let inv_log_norm = inv.log_norm();
    let pivot = 0.5 * (fwd_log_norm - inv_log_norm);
    let m = values.len();
    let log_moduli: Vec<f64> = (0..m)
        .map(|k| {
            let forward = values[k].norm().ln() + fwd.log_scale();
            // the k-th smallest modulus of P is the k-th largest of P^{-1}
            let backward = -(inv_values[m - 1 - k].norm().ln() + inv.log_scale());
            if forward >= pivot {
                forward
            } else {
                backward
            }
        })
        .collect();
    let groups = group_moduli(&log_moduli)?;
    Ok(PeriodEigen {
        mat: fwd.normalized().clone(),
        values,
        log_moduli,
        groups,
        inv_mat: inv.normalized().clone(),
        inv_values,
        pivot,
    })
}

/// Consecutive groups of an ascending list; refuses ambiguous gaps.
pub(crate) fn group_moduli(sorted: &[f64]) -> Result<Vec<Vec<usize>>, LyapunovError> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in sorted.iter().enumerate() {
        match groups.last_mut() {
            Some(g) => {
                let prev = sorted[*g.last().unwrap()];
                let d = (v - prev).abs();
                if d <= MERGE_TOLERANCE {
                    g.push(k);
                } else if d <= SEPARATION_TOLERANCE {
                    return Err(LyapunovError::ClusteredSpectrum { first: prev, second: v });
                } else {
                    groups.push(vec![k]);
                }
            }
            None => groups.push(vec![k]),
        }
    }
    Ok(groups)
}

/// Lyapunov spectrum of the periodic orbit measure carried by `word`.
pub fn periodic_spectrum(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    word: &Word,
) -> Result<LyapunovSpectrum, LyapunovError> {
    space.check_cyclic_word(word)?;
    a.check_alphabet(word.symbols())?;
    let eig = period_eigen(a, word)?;
    let p = word.len() as f64;
    let blocks = eig
        .groups
        .iter()
        .map(|g| SpectrumBlock {
            exponent: g.iter().map(|&k| eig.log_moduli[k]).sum::<f64>() / (g.len() as f64 * p),
            multiplicity: g.len(),
        })
        .collect();
    Ok(LyapunovSpectrum {
        word: word.clone(),
        blocks,
    })
}
