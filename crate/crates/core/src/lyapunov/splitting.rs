use nalgebra::Complex;
use serde::Serialize;

use super::spectrum::{period_eigen, PeriodEigen};
use super::LyapunovError;
use crate::cocycle::MatrixCocycle;
use crate::linalg::{max_abs, min_singular_value, null_space, orthonormalize, subspace_distance, Matrix};
use crate::symbolic::{ShiftSpace, Word};

/// Eigenvalues closer than this (relative) are one cluster when forming
/// the annihilating polynomial; absorbs the spread of defective eigenvalues.
const CLUSTER_TOLERANCE: f64 = 1e-4;
/// Kernel singular values above this fraction of the top one are refused.
const KERNEL_TOLERANCE: f64 = 1e-6;

/// Oseledec subspaces along a periodic orbit.
#[derive(Clone, Debug, Serialize)]
pub struct OseledecSplitting {
    pub word: Word,
    /// Increasing.
    pub exponents: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// `bases[j][i]`: orthonormal basis of `E_{χ_i}(x_j)`.
    #[serde(skip)]
    pub bases: Vec<Vec<Matrix>>,
}

impl OseledecSplitting {
    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn block_count(&self) -> usize {
        self.exponents.len()
    }

    pub fn basis(&self, j: usize, i: usize) -> &Matrix {
        &self.bases[j % self.period()][i]
    }

    /// All block bases at `x_j` side by side, lowest exponent first.
    pub fn stacked(&self, j: usize) -> Matrix {
        let blocks = &self.bases[j % self.period()];
        let m = self.dim();
        let mut out = Matrix::zeros(m, m);
        let mut col = 0;
        for b in blocks {
            out.columns_mut(col, b.ncols()).copy_from(b);
            col += b.ncols();
        }
        out
    }

    /// Column range of block `i` inside `stacked`.
    pub fn block_columns(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.multiplicities[..i].iter().sum();
        start..start + self.multiplicities[i]
    }

    /// Smallest singular value of the stacked bases over the orbit; positive
    /// iff the sum is direct everywhere.
    pub fn direct_sum_margin(&self) -> f64 {
        (0..self.period())
            .map(|j| min_singular_value(&self.stacked(j)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest principal-angle sine between `A(x_j) E_i(x_j)` and
    /// `E_i(x_{j+1})` over the orbit.
    pub fn equivariance_defect(&self, a: &MatrixCocycle) -> f64 {
        let p = self.period();
        let mut worst: f64 = 0.0;
        for j in 0..p {
            let g = a.generator(self.word.symbols()[j]);
            for i in 0..self.block_count() {
                let image = orthonormalize(&(g * &self.bases[j][i]));
                worst = worst.max(subspace_distance(&image, &self.bases[(j + 1) % p][i]));
            }
        }
        worst
    }
}

/// Annihilating polynomial of the eigenvalues `values` evaluated at `mat`,
/// each factor rescaled to unit max-abs entry.
fn annihilator(mat: &Matrix, values: &[Complex<f64>]) -> Matrix {
    let m = mat.nrows();
    let id = Matrix::identity(m, m);
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    'outer: for &z in values {
        for (c, n) in clusters.iter_mut() {
            if (*c - z).norm() <= CLUSTER_TOLERANCE * z.norm() {
                *c = (*c * *n as f64 + z) / (*n as f64 + 1.0);
                *n += 1;
                continue 'outer;
            }
        }
        clusters.push((z, 1));
    }
    let mut q = id.clone();
    for (c, n) in clusters {
        let factor = if c.im.abs() <= CLUSTER_TOLERANCE * c.norm() {
            mat - &id * c.re
        } else if c.im > 0.0 {
            mat * mat - mat * (2.0 * c.re) + &id * c.norm_sqr()
        } else {
            continue;
        };
        let s = max_abs(&factor);
        let factor = if s > 0.0 { factor / s } else { factor };
        for _ in 0..n {
            q = &factor * q;
            let s = max_abs(&q);
            if s > 0.0 {
                q /= s;
            }
        }
    }
    q
}

/// Bases at `x_0` of the generalized eigenspaces, one per modulus group.
pub(crate) fn generalized_eigenspaces(eig: &PeriodEigen) -> Result<Vec<Matrix>, LyapunovError> {
    let m = eig.mat.nrows();
    let mut out = Vec::with_capacity(eig.groups.len());
    for g in &eig.groups {
        let d = g.len();
        if d == m {
            out.push(Matrix::identity(m, m));
            continue;
        }
        let mean = g.iter().map(|&k| eig.log_moduli[k]).sum::<f64>() / d as f64;
        let q = if mean >= eig.pivot {
            let vals: Vec<_> = g.iter().map(|&k| eig.values[k]).collect();
            annihilator(&eig.mat, &vals)
        } else {
            let vals: Vec<_> = g.iter().map(|&k| eig.inv_values[m - 1 - k]).collect();
            annihilator(&eig.inv_mat, &vals)
        };
        let (basis, kept, next) = null_space(&q, d);
        if !(kept <= KERNEL_TOLERANCE) || !(next > kept) {
            return Err(LyapunovError::DegenerateSplitting);
        }
        out.push(orthonormalize(&basis));
    }
    Ok(out)
}

/// Oseledec splitting along the periodic orbit of `word`.
pub fn oseledec_splitting_periodic(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    word: &Word,
) -> Result<OseledecSplitting, LyapunovError> {
    space.check_cyclic_word(word)?;
    a.check_alphabet(word.symbols())?;
    let eig = period_eigen(a, word)?;
    let p = word.len();
    let first = generalized_eigenspaces(&eig)?;
    let mut bases = Vec::with_capacity(p);
    bases.push(first);
    for j in 1..p {
        let g = a.generator(word.symbols()[j - 1]);
        let next: Vec<Matrix> = bases[j - 1].iter().map(|b| orthonormalize(&(g * b))).collect();
        bases.push(next);
    }
    let exponents = eig
        .groups
        .iter()
        .map(|g| g.iter().map(|&k| eig.log_moduli[k]).sum::<f64>() / (g.len() * p) as f64)
        .collect();
    let splitting = OseledecSplitting {
        word: word.clone(),
        exponents,
        multiplicities: eig.groups.iter().map(Vec::len).collect(),
        bases,
    };
    if !(splitting.direct_sum_margin() > 1e-10) {
        return Err(LyapunovError::DegenerateSplitting);
    }
    Ok(splitting)
}
