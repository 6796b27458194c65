use serde::Serialize;

use super::{spectrum_gap, IrregularError};
use crate::cocycle::MatrixCocycle;
use crate::lyapunov::{periodic_spectrum, LyapunovSpectrum};
use crate::symbolic::{Cylinder, ShiftSpace, Word};

/// Two periodic measures with separated top exponents and the cylinder
/// the constructed point must enter.
///
/// `a` and `b` are top exponents of whichever cocycle the target was built
/// for; with `exterior_index = i > 1` that is `∧^i A`.
#[derive(Clone, Debug, Serialize)]
pub struct IrregularTarget {
    pub high: Word,
    pub low: Word,
    pub high_spectrum: LyapunovSpectrum,
    pub low_spectrum: LyapunovSpectrum,
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub window: Word,
    pub window_lo: i64,
    pub exterior_index: usize,
}

impl IrregularTarget {
    pub fn new(
        a: &MatrixCocycle,
        space: &ShiftSpace,
        high: Word,
        low: Word,
        tau: f64,
        cylinder: &Cylinder,
        exterior_index: usize,
    ) -> Result<Self, IrregularError> {
        let high_spectrum = periodic_spectrum(a, space, &high)?;
        let low_spectrum = periodic_spectrum(a, space, &low)?;
        let window = cylinder.window_word();
        space.check_word(&window)?;
        let target = Self {
            a: high_spectrum.max_exponent(),
            b: low_spectrum.max_exponent(),
            high,
            low,
            high_spectrum,
            low_spectrum,
            tau,
            window,
            window_lo: cylinder.lo(),
            exterior_index,
        };
        target.check_gap()?;
        Ok(target)
    }

    /// Highest and lowest top exponent among `words`; `τ` defaults to a
    /// fifth of the spread.
    pub fn from_measures(
        a: &MatrixCocycle,
        space: &ShiftSpace,
        words: &[Word],
        tau: Option<f64>,
        cylinder: &Cylinder,
        exterior_index: usize,
    ) -> Result<Self, IrregularError> {
        let report = spectrum_gap(a, space, words)?;
        let g = report.index(1);
        let tau = tau.unwrap_or((g.sup - g.inf) / 5.0);
        if !(g.sup - g.inf > 0.0) {
            return Err(IrregularError::NoGap {
                high: g.sup - 2.0 * tau,
                low: g.inf + 2.0 * tau,
            });
        }
        Self::new(
            a,
            space,
            words[g.argsup].clone(),
            words[g.arginf].clone(),
            tau,
            cylinder,
            exterior_index,
        )
    }

    fn check_gap(&self) -> Result<(), IrregularError> {
        let high = self.a - 2.0 * self.tau;
        let low = self.b + 2.0 * self.tau;
        if !(self.tau > 0.0) || !(high > low) {
            return Err(IrregularError::NoGap { high, low });
        }
        Ok(())
    }

    pub fn cylinder(&self, space: &ShiftSpace) -> Result<Cylinder, IrregularError> {
        Ok(Cylinder::from_window(space, &self.window, self.window_lo)?)
    }

    /// Same measures and `τ`, another cylinder.
    pub fn with_cylinder(&self, cylinder: &Cylinder) -> Self {
        Self {
            window: cylinder.window_word(),
            window_lo: cylinder.lo(),
            ..self.clone()
        }
    }

    /// `a - τ`, the level the running average must exceed at `n_1`.
    pub fn high_threshold(&self) -> f64 {
        self.a - self.tau
    }

    /// `b + τ`, the level the running average must undercut at `n_2`.
    pub fn low_threshold(&self) -> f64 {
        self.b + self.tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn diag_example() -> MatrixCocycle {
        MatrixCocycle::new(vec![
            Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
            Matrix::identity(2, 2),
        ])
        .unwrap()
    }

    #[test]
    fn picks_extremes_and_default_tau() {
        let space = ShiftSpace::full_shift(2);
        let cyl = Cylinder::centered(&space, &"0".parse().unwrap()).unwrap();
        let ws: Vec<Word> = ["1", "01", "0"].iter().map(|w| w.parse().unwrap()).collect();
        let t = IrregularTarget::from_measures(&diag_example(), &space, &ws, None, &cyl, 1).unwrap();
        assert_eq!(t.high.to_string(), "0");
        assert_eq!(t.low.to_string(), "1");
        assert!((t.tau - 2f64.ln() / 5.0).abs() < 1e-15);
    }

    #[test]
    fn large_tau_has_no_gap() {
        let space = ShiftSpace::full_shift(2);
        let cyl = Cylinder::centered(&space, &"0".parse().unwrap()).unwrap();
        let err = IrregularTarget::new(&diag_example(), &space, "0".parse().unwrap(), "1".parse().unwrap(), 0.2, &cyl, 1)
            .unwrap_err();
        assert!(matches!(err, IrregularError::NoGap { .. }));
        IrregularTarget::new(&diag_example(), &space, "0".parse().unwrap(), "1".parse().unwrap(), 0.17, &cyl, 1).unwrap();
    }
}
