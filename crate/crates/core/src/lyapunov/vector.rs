use std::collections::HashMap;

use super::spectrum::period_eigen;
use super::splitting::generalized_eigenspaces;
use super::LyapunovError;
use crate::cocycle::MatrixCocycle;
use crate::linalg::{Matrix, ScaledMatrix, Vector};
use crate::symbolic::{Run, ShiftPoint, Symbol, Word};

/// Runs shorter than this many steps are applied generator by generator.
const LONG_RUN: usize = 256;

/// `e^{scale} v` with `|v| = 1`.
#[derive(Clone, Debug)]
struct Layer {
    scale: f64,
    v: Vector,
}

/// A period product split along its generalized eigenspaces:
/// `P B_i = B_i R_i` for the column blocks `B_i` of `basis`.
struct Decomposition {
    basis: Matrix,
    basis_inv: Matrix,
    /// Relative size below which a block coordinate is rounding noise.
    noise: f64,
    blocks: Vec<(std::ops::Range<usize>, ScaledMatrix)>,
}

fn decompose(a: &MatrixCocycle, word: &[Symbol]) -> Option<Decomposition> {
    let eig = period_eigen(a, &Word::new(word.to_vec())).ok()?;
    let spaces = generalized_eigenspaces(&eig).ok()?;
    let m = a.dim();
    let mut basis = Matrix::zeros(m, m);
    let mut ranges = Vec::new();
    let mut col = 0;
    for s in &spaces {
        basis.columns_mut(col, s.ncols()).copy_from(s);
        ranges.push(col..col + s.ncols());
        col += s.ncols();
    }
    let basis_inv = basis.clone().try_inverse()?;
    let blocks = ranges
        .into_iter()
        .map(|r| {
            let mut image = ScaledMatrix::new(basis.columns(r.start, r.len()).into_owned());
            for &s in word {
                image.left_mul(a.generator(s));
            }
            let restricted = basis_inv.rows(r.start, r.len()) * image.normalized();
            (r, ScaledMatrix::from_parts(restricted, image.log_scale()))
        })
        .collect();
    let noise = 64.0 * f64::EPSILON * crate::linalg::op_norm(&basis) * crate::linalg::op_norm(&basis_inv);
    Some(Decomposition {
        basis,
        basis_inv,
        noise,
        blocks,
    })
}

/// `Σ e^{s_k} w_k` as one layer; `None` if the sum vanishes.
fn combine(terms: &[(f64, Vector)]) -> Option<Layer> {
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return None;
    }
    let mut sum = Vector::zeros(terms[0].1.len());
    for (s, w) in terms {
        sum += w * (s - top).exp();
    }
    let n = sum.norm();
    (n > 0.0).then(|| Layer {
        scale: top + n.ln(),
        v: sum / n,
    })
}

/// Tracks `A(x, t) v` as a sum of layers at separate scales, so vectors
/// whose components grow at different rates keep every component.
struct Propagator<'a> {
    a: &'a MatrixCocycle,
    x: &'a ShiftPoint,
    time: u64,
    layers: Vec<Layer>,
    cache: HashMap<Vec<Symbol>, Option<Decomposition>>,
}

impl<'a> Propagator<'a> {
    fn new(a: &'a MatrixCocycle, x: &'a ShiftPoint, v: &Vector) -> Self {
        let n = v.norm();
        Self {
            a,
            x,
            time: 0,
            layers: vec![Layer {
                scale: n.ln(),
                v: v / n,
            }],
            cache: HashMap::new(),
        }
    }

    fn step(&mut self, g: &Matrix) {
        self.layers.retain_mut(|l| {
            l.v = g * &l.v;
            let n = l.v.norm();
            if n > 0.0 {
                l.v /= n;
                l.scale += n.ln();
                true
            } else {
                false
            }
        });
    }

    fn long_run(&mut self, run: &Run, len: usize) -> bool {
        let p = run.period();
        let phase = run.phase(run.lo);
        let rotated: Vec<Symbol> = (0..p).map(|k| run.word[(phase + k) % p]).collect();
        let a = self.a;
        let Some(dec) = self.cache.entry(rotated.clone()).or_insert_with(|| decompose(a, &rotated)) else {
            return false;
        };
        let periods = (len / p) as u64;
        let mut out = Vec::with_capacity(dec.blocks.len());
        for (range, block) in &dec.blocks {
            let power = block.pow(periods);
            let mut terms = Vec::new();
            for l in &self.layers {
                let coords = dec.basis_inv.rows(range.start, range.len()) * &l.v;
                if coords.norm() <= dec.noise {
                    continue;
                }
                let moved = power.normalized() * coords;
                let w = dec.basis.columns(range.start, range.len()) * moved;
                let n = w.norm();
                if n > 0.0 {
                    terms.push((l.scale + power.log_scale() + n.ln(), w / n));
                }
            }
            if !terms.is_empty() {
                out.extend(combine(&terms));
            }
        }
        self.layers = out;
        for k in 0..len % p {
            self.step(self.a.generator(rotated[k % p]));
        }
        true
    }

    fn advance_to(&mut self, target: u64) {
        if target <= self.time {
            return;
        }
        let runs: Vec<Run> = self.x.runs(self.time as i64, target as i64).collect();
        for run in runs {
            let len = (run.hi - run.lo) as usize;
            let p = run.period();
            if len >= LONG_RUN && len >= 2 * p && p <= 4096 && self.long_run(&run, len) {
                continue;
            }
            for j in run.lo..run.hi {
                self.step(self.a.generator(run.symbol(j)));
            }
        }
        self.time = target;
    }

    fn log_norm(&self) -> f64 {
        let terms: Vec<(f64, Vector)> = self.layers.iter().map(|l| (l.scale, l.v.clone())).collect();
        if terms.is_empty() {
            return f64::NEG_INFINITY;
        }
        combine(&terms).map_or(f64::NEG_INFINITY, |l| l.scale)
    }
}

/// `(1/n) log |A(x, n) v|`.
pub fn finite_time_vector_exponent(
    a: &MatrixCocycle,
    x: &ShiftPoint,
    v: &Vector,
    n: u64,
) -> Result<f64, LyapunovError> {
    Ok(vector_exponent_series(a, x, v, &[n])?[0])
}

/// `(1/t) log |A(x, t) v|` at each of the increasing `times`.
pub fn vector_exponent_series(
    a: &MatrixCocycle,
    x: &ShiftPoint,
    v: &Vector,
    times: &[u64],
) -> Result<Vec<f64>, LyapunovError> {
    if !(v.norm() > 0.0) {
        return Err(LyapunovError::ZeroVector);
    }
    let mut prop = Propagator::new(a, x, v);
    Ok(times
        .iter()
        .map(|&t| {
            prop.advance_to(t);
            prop.log_norm() / t as f64
        })
        .collect())
}
