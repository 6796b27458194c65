use crate::cocycle::MatrixCocycle;
use crate::linalg::Matrix;
use crate::symbolic::ShiftPoint;

/// Finite-time exponents `(1/n) Σ log|R_kk|` from QR re-orthonormalization
/// of `A(x, n)`, decreasing.
pub fn qr_exponents(a: &MatrixCocycle, x: &ShiftPoint, n: u64) -> Vec<f64> {
    let m = a.dim();
    let mut q = Matrix::identity(m, m);
    let mut sums = vec![0.0; m];
    for k in 0..n {
        let qr = (a.generator(x.symbol(k as i64)) * &q).qr();
        let r = qr.r();
        let mut qk = qr.q();
        for i in 0..m {
            let d = r[(i, i)];
            sums[i] += d.abs().ln();
            if d < 0.0 {
                qk.column_mut(i).neg_mut();
            }
        }
        q = qk;
    }
    let mut out: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Word;

    #[test]
    fn diagonal_qr() {
        let a = MatrixCocycle::new(vec![Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])]).unwrap();
        let e = qr_exponents(&a, &ShiftPoint::periodic(&Word::new(vec![0])), 50);
        assert!((e[0] - 2f64.ln()).abs() < 1e-12 && (e[1] + 2f64.ln()).abs() < 1e-12);
    }
}
