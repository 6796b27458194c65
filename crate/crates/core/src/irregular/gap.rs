use serde::Serialize;

use super::IrregularError;
use crate::cocycle::{exterior_power, MatrixCocycle};
use crate::lyapunov::{periodic_spectrum, LyapunovSpectrum};
use crate::symbolic::{ShiftSpace, Word};

/// Differences of `Λ_i` at most this are ties.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Top exponent of `∧^i A` across the supplied measures.
#[derive(Clone, Debug, Serialize)]
pub struct IndexGap {
    pub index: usize,
    /// One value per measure, in input order.
    pub values: Vec<f64>,
    pub inf: f64,
    pub sup: f64,
    /// Measures attaining `sup` and `inf` (first occurrence).
    pub argsup: usize,
    pub arginf: usize,
}

impl IndexGap {
    pub fn separates(&self) -> bool {
        self.sup - self.inf > GAP_TOLERANCE
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumGapReport {
    pub words: Vec<Word>,
    pub indices: Vec<IndexGap>,
    pub separating_index: Option<usize>,
    /// Full spectra of `A` per measure.
    pub spectra: Vec<LyapunovSpectrum>,
    /// All spectra agree (exponents and multiplicities).
    pub spectra_equal: bool,
}

impl SpectrumGapReport {
    #[allow(clippy::should_implement_trait)]
    pub fn index(&self, i: usize) -> &IndexGap {
        &self.indices[i - 1]
    }
}

/// `Λ_i(μ)` for every `i` and every periodic measure `μ` in `words`.
pub fn spectrum_gap(a: &MatrixCocycle, space: &ShiftSpace, words: &[Word]) -> Result<SpectrumGapReport, IrregularError> {
    if words.is_empty() {
        return Err(IrregularError::NoMeasures);
    }
    let spectra = words
        .iter()
        .map(|w| periodic_spectrum(a, space, w))
        .collect::<Result<Vec<_>, _>>()?;
    let mut indices = Vec::with_capacity(a.dim());
    for i in 1..=a.dim() {
        let ext = exterior_power(a, i)?;
        let values = words
            .iter()
            .map(|w| periodic_spectrum(&ext, space, w).map(|s| s.max_exponent()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut argsup = 0;
        let mut arginf = 0;
        for (k, &v) in values.iter().enumerate() {
            if v > values[argsup] {
                argsup = k;
            }
            if v < values[arginf] {
                arginf = k;
            }
        }
        indices.push(IndexGap {
            index: i,
            inf: values[arginf],
            sup: values[argsup],
            argsup,
            arginf,
            values,
        });
    }
    let separating_index = indices.iter().find(|g| g.separates()).map(|g| g.index);
    let spectra_equal = spectra.iter().all(|s| s.approx_eq(&spectra[0], GAP_TOLERANCE));
    Ok(SpectrumGapReport {
        words: words.to_vec(),
        indices,
        separating_index,
        spectra,
        spectra_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&crate::linalg::Vector::from_column_slice(d))
    }

    fn words(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| w.parse().unwrap()).collect()
    }

    #[test]
    fn diagonal_separates_at_one() {
        let a = MatrixCocycle::new(vec![diag(&[2.0, 0.5]), diag(&[1.0, 1.0])]).unwrap();
        let r = spectrum_gap(&a, &ShiftSpace::full_shift(2), &words(&["0", "1"])).unwrap();
        assert_eq!(r.separating_index, Some(1));
        let g = r.index(1);
        assert!((g.values[0] - 2f64.ln()).abs() < 1e-12 && g.values[1].abs() < 1e-12);
        assert_eq!((g.argsup, g.arginf), (0, 1));
    }

    #[test]
    fn constant_cocycle_has_no_gap() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 3.0]);
        let a = MatrixCocycle::constant(m, 2).unwrap();
        let r = spectrum_gap(&a, &ShiftSpace::full_shift(2), &words(&["0", "1", "01", "001"])).unwrap();
        assert_eq!(r.separating_index, None);
        assert!(r.spectra_equal);
    }

    #[test]
    fn per_index_values_in_three_dimensions() {
        let a = MatrixCocycle::new(vec![diag(&[2.0, 2.0, 0.25]), diag(&[4.0, 1.0, 0.25])]).unwrap();
        let r = spectrum_gap(&a, &ShiftSpace::full_shift(2), &words(&["0", "1"])).unwrap();
        let l2 = 2f64.ln();
        assert_eq!(r.separating_index, Some(1));
        assert!((r.index(1).values[0] - l2).abs() < 1e-12);
        assert!((r.index(1).values[1] - 2.0 * l2).abs() < 1e-12);
        // Λ_2 = log 4 at both measures
        assert!((r.index(2).values[0] - 2.0 * l2).abs() < 1e-12);
        assert!((r.index(2).values[1] - 2.0 * l2).abs() < 1e-12);
        assert!(!r.index(2).separates());
        assert!(r.index(3).values[0].abs() < 1e-12 && r.index(3).values[1].abs() < 1e-12);
    }
}
