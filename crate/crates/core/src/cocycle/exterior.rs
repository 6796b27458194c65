use super::{CocycleError, MatrixCocycle};
use crate::linalg::Matrix;

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The `k`-th compound matrix: all `k x k` minors, rows and columns indexed
/// by lexicographic `k`-subsets. Represents `B` acting on `Λ^k R^m`.
pub fn compound_matrix(b: &Matrix, k: usize) -> Matrix {
    let n = b.nrows();
    let subsets = k_subsets(n, k);
    let d = subsets.len();
    let mut out = Matrix::zeros(d, d);
    let mut minor = Matrix::zeros(k, k);
    for (r, rows) in subsets.iter().enumerate() {
        for (c, cols) in subsets.iter().enumerate() {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    minor[(i, j)] = b[(ri, cj)];
                }
            }
            out[(r, c)] = minor.clone().determinant();
        }
    }
    out
}

/// Generator-wise `k`-th exterior power of a cocycle.
pub fn exterior_power(a: &MatrixCocycle, k: usize) -> Result<MatrixCocycle, CocycleError> {
    if k == 0 || k > a.dim() {
        return Err(CocycleError::BadExteriorIndex {
            index: k,
            dim: a.dim(),
        });
    }
    if k == 1 {
        return Ok(a.clone());
    }
    MatrixCocycle::new(a.generators().iter().map(|g| compound_matrix(g, k)).collect())
}
