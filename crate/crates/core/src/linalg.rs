//! Small dense linear algebra on top of `nalgebra`: operator norms, scaled
//! products that never overflow, subspace utilities.

use nalgebra::{DMatrix, DVector, SVD};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest singular value (operator 2-norm).
pub fn op_norm(m: &Matrix) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    if m.is_empty() {
        return 0.0;
    }
    SVD::new(m.clone(), false, false).singular_values[0]
}

/// All singular values, sorted descending.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 1 && m.ncols() == 1 {
        return vec![m[(0, 0)].abs()];
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Smallest singular value.
pub fn min_singular_value(m: &Matrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Orthonormal basis for the column span of `cols` (thin QR). Columns are
/// assumed linearly independent.
pub fn orthonormalize(cols: &Matrix) -> Matrix {
    let (rows, ncols) = cols.shape();
    if ncols == 0 {
        return Matrix::zeros(rows, 0);
    }
    let qr = cols.clone().qr();
    let q = qr.q();
    q.columns(0, ncols).into_owned()
}

/// Largest sine of the principal angles between two subspaces of equal
/// dimension, each given by an orthonormal basis.
pub fn subspace_distance(a: &Matrix, b: &Matrix) -> f64 {
    if a.ncols() == 0 && b.ncols() == 0 {
        return 0.0;
    }
    let residual = a - b * (b.transpose() * a);
    op_norm(&residual)
}

/// Right singular vectors belonging to the `dim` smallest singular values,
/// together with the ratio (largest discarded)/(largest) and
/// (largest kept)/(largest) singular values.
pub fn null_space(m: &Matrix, dim: usize) -> (Matrix, f64, f64) {
    let n = m.ncols();
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let top = sv[0].max(f64::MIN_POSITIVE);
    let mut basis = Matrix::zeros(n, dim);
    for k in 0..dim {
        let row = n - dim + k;
        for r in 0..n {
            basis[(r, k)] = v_t[(row, r)];
        }
    }
    let kept = if dim > 0 { sv[n - dim] / top } else { 0.0 };
    let next = if dim < n { sv[n - dim - 1] / top } else { 0.0 };
    (basis, kept, next)
}

/// Matrix stored as `exp(log_scale) * mat` with `mat` normalized to unit
/// max-abs entry. Products of arbitrary length stay representable.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    mat: Matrix,
    log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Matrix::identity(dim, dim),
            log_scale: 0.0,
        }
    }

    pub fn new(mat: Matrix) -> Self {
        let mut s = Self { mat, log_scale: 0.0 };
        s.normalize();
        s
    }

    /// `exp(log_scale) * mat`.
    pub fn from_parts(mat: Matrix, log_scale: f64) -> Self {
        let mut s = Self { mat, log_scale };
        s.normalize();
        s
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn normalized(&self) -> &Matrix {
        &self.mat
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn normalize(&mut self) {
        let s = max_abs(&self.mat);
        if s > 0.0 && s.is_finite() {
            self.mat /= s;
            self.log_scale += s.ln();
        }
    }

    /// `self <- other * self`.
    pub fn left_mul(&mut self, other: &Matrix) {
        self.mat = other * &self.mat;
        self.normalize();
    }

    /// `self <- self * other`.
    pub fn right_mul(&mut self, other: &Matrix) {
        self.mat = &self.mat * other;
        self.normalize();
    }

    /// `self <- other * self` for a scaled factor.
    pub fn left_mul_scaled(&mut self, other: &ScaledMatrix) {
        self.mat = &other.mat * &self.mat;
        self.log_scale += other.log_scale;
        self.normalize();
    }

    /// `self <- self * other` for a scaled factor.
    pub fn right_mul_scaled(&mut self, other: &ScaledMatrix) {
        self.mat = &self.mat * &other.mat;
        self.log_scale += other.log_scale;
        self.normalize();
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut exp: u64) -> ScaledMatrix {
        let mut result = ScaledMatrix::identity(self.dim());
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result.right_mul_scaled(&base);
            }
            exp >>= 1;
            if exp > 0 {
                let sq = base.clone();
                base.right_mul_scaled(&sq);
            }
        }
        result
    }

    /// log of the operator 2-norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + op_norm(&self.mat).ln()
    }

    /// The represented matrix; entries may overflow for long products.
    pub fn to_matrix(&self) -> Matrix {
        &self.mat * self.log_scale.exp()
    }
}

/// Lower Cholesky factor `L` with `g = L L^T`, or `None` if `g` is not
/// numerically positive definite.
pub fn cholesky_lower(g: &Matrix) -> Option<Matrix> {
    g.clone().cholesky().map(|c| c.l())
}

pub fn symmetrize(g: &Matrix) -> Matrix {
    (g + g.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(g: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = g.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_power_matches_direct() {
        let a = Matrix::from_row_slice(2, 2, &[1.1, 0.3, -0.2, 0.9]);
        let direct = (0..7).fold(Matrix::identity(2, 2), |acc, _| &a * acc);
        let p = ScaledMatrix::new(a).pow(7).to_matrix();
        assert!((direct - p).abs().max() < 1e-12);
    }

    #[test]
    fn huge_powers_stay_finite() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let p = ScaledMatrix::new(a).pow(1_000_000);
        assert!((p.log_norm() - 1_000_000.0 * 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let (basis, kept, next) = null_space(&m, 1);
        assert!((&m * &basis).norm() < 1e-12);
        assert!(kept < 1e-14 && next > 0.5);
    }
}
