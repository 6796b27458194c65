use std::fmt;
use std::sync::Arc;

use super::{ShiftSpace, Symbol, Word};

/// A stretch of coordinates `lo..hi` (half-open) on which the sequence is
/// periodic: coordinate `j` carries `word[(j - anchor) mod |word|]`.
/// `i64::MIN` / `i64::MAX` bounds mean the run is unbounded on that side.
#[derive(Clone, Debug)]
pub struct Run {
    pub lo: i64,
    pub hi: i64,
    pub word: Arc<[Symbol]>,
    pub anchor: i64,
}

impl Run {
    pub fn periodic(word: Arc<[Symbol]>) -> Self {
        Self {
            lo: i64::MIN,
            hi: i64::MAX,
            word,
            anchor: 0,
        }
    }

    pub fn period(&self) -> usize {
        self.word.len()
    }

    /// Index into `word` of the symbol at coordinate `j`.
    pub fn phase(&self, j: i64) -> usize {
        let p = self.word.len() as i64;
        (j.wrapping_sub(self.anchor)).rem_euclid(p) as usize
    }

    pub fn symbol(&self, j: i64) -> Symbol {
        self.word[self.phase(j)]
    }

    fn clip(mut self, lo: i64, hi: i64) -> Self {
        self.lo = self.lo.max(lo);
        self.hi = self.hi.min(hi);
        self
    }

    fn translate(mut self, by: i64) -> Self {
        if self.lo != i64::MIN {
            self.lo = self.lo.saturating_sub(by);
        }
        if self.hi != i64::MAX {
            self.hi = self.hi.saturating_sub(by);
        }
        let p = self.word.len() as i64;
        self.anchor = (self.anchor.rem_euclid(p) - by.rem_euclid(p)).rem_euclid(p);
        self
    }
}

/// Lazily evaluated two-sided symbol sequence.
///
/// Implementations must be pure: `run_at(j)` always returns a run
/// containing `j`, and repeated calls agree.
pub trait SymbolSource: Send + Sync + fmt::Debug {
    fn run_at(&self, j: i64) -> Run;

    /// The defining word if the whole sequence is periodic with anchor 0.
    fn periodic_word(&self) -> Option<Arc<[Symbol]>> {
        None
    }
}

#[derive(Debug)]
struct PeriodicSource {
    word: Arc<[Symbol]>,
}

impl SymbolSource for PeriodicSource {
    fn run_at(&self, _j: i64) -> Run {
        Run::periodic(self.word.clone())
    }

    fn periodic_word(&self) -> Option<Arc<[Symbol]>> {
        Some(self.word.clone())
    }
}

/// A point of a shift space: a shared source viewed through a shift.
#[derive(Clone)]
pub struct ShiftPoint {
    source: Arc<dyn SymbolSource>,
    offset: i64,
}

impl fmt::Debug for ShiftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let window: String = (-4..=8)
            .map(|i| super::word::symbol_char(self.symbol(i)))
            .collect();
        write!(f, "ShiftPoint(..{}.{}..)", &window[..4], &window[4..])
    }
}

impl ShiftPoint {
    pub fn from_source(source: Arc<dyn SymbolSource>) -> Self {
        Self { source, offset: 0 }
    }

    /// Periodic point without a legality check; see
    /// [`ShiftSpace::periodic_point`] for the checked constructor.
    pub fn periodic(word: &Word) -> Self {
        assert!(!word.is_empty(), "periodic point needs a non-empty word");
        Self::from_source(Arc::new(PeriodicSource {
            word: word.symbols().into(),
        }))
    }

    /// Periodic point whose coordinate `start + k` is `word[k mod |word|]`.
    pub fn periodic_from(word: &Word, start: i64) -> Self {
        Self::periodic(word).shift(-start)
    }

    pub fn run_at(&self, i: i64) -> Run {
        self.source
            .run_at(i.wrapping_add(self.offset))
            .translate(self.offset)
    }

    pub fn symbol(&self, i: i64) -> Symbol {
        self.run_at(i).symbol(i)
    }

    /// `f^k(self)`: `shift(k).symbol(i) == symbol(i + k)`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            source: self.source.clone(),
            offset: self.offset + k,
        }
    }

    pub fn window(&self, lo: i64, hi: i64) -> Word {
        Word::new((lo..=hi).map(|i| self.symbol(i)).collect())
    }

    /// Runs covering `from..to`, clipped to that range.
    pub fn runs(&self, from: i64, to: i64) -> RunIter<'_> {
        RunIter {
            point: self,
            next: from,
            end: to,
        }
    }

    /// Word and phase if the point is purely periodic.
    fn periodic_view(&self) -> Option<(Arc<[Symbol]>, usize)> {
        let w = self.source.periodic_word()?;
        let p = w.len() as i64;
        Some((w, self.offset.rem_euclid(p) as usize))
    }

    /// `Some(true)` when both descriptions provably give the same sequence,
    /// `Some(false)` when they provably differ, `None` when undecided.
    pub fn same_sequence(&self, other: &ShiftPoint) -> Option<bool> {
        if Arc::ptr_eq(&self.source, &other.source) && self.offset == other.offset {
            return Some(true);
        }
        let (wa, pa) = self.periodic_view()?;
        let (wb, pb) = other.periodic_view()?;
        let l = lcm(wa.len(), wb.len());
        Some((0..l).all(|k| wa[(pa + k) % wa.len()] == wb[(pb + k) % wb.len()]))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub struct RunIter<'a> {
    point: &'a ShiftPoint,
    next: i64,
    end: i64,
}

impl Iterator for RunIter<'_> {
    type Item = Run;

    fn next(&mut self) -> Option<Run> {
        if self.next >= self.end {
            return None;
        }
        let run = self.point.run_at(self.next).clip(self.next, self.end);
        debug_assert!(run.hi > run.lo);
        self.next = run.hi;
        Some(run)
    }
}

/// Result of [`shift_metric`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distance {
    /// Disagreement found (or sequences known equal, value 0).
    Exact(f64),
    /// Agreement on all `|i| < horizon`; the true distance is at most this.
    AtMost(f64),
}

impl Distance {
    pub fn value(self) -> f64 {
        match self {
            Distance::Exact(v) | Distance::AtMost(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Distance::Exact(_))
    }
}

/// `d(x, y) = exp(-decay * k)` with `k` the least `|i|` where the points
/// differ, searched for `|i| < horizon`.
pub fn shift_metric(space: &ShiftSpace, x: &ShiftPoint, y: &ShiftPoint, horizon: u64) -> Distance {
    if x.same_sequence(y) == Some(true) {
        return Distance::Exact(0.0);
    }
    let lambda = space.decay();
    for k in 0..horizon as i64 {
        if x.symbol(k) != y.symbol(k) || x.symbol(-k) != y.symbol(-k) {
            return Distance::Exact((-lambda * k as f64).exp());
        }
    }
    Distance::AtMost((-lambda * horizon as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn periodic_evaluation_and_shift() {
        let p = ShiftPoint::periodic(&w("011"));
        let got: Vec<_> = (-3..6).map(|i| p.symbol(i)).collect();
        assert_eq!(got, vec![0, 1, 1, 0, 1, 1, 0, 1, 1]);
        let q = p.shift(1);
        for i in -10..10 {
            assert_eq!(q.symbol(i), p.symbol(i + 1));
        }
    }

    #[test]
    fn metric_examples() {
        let space = ShiftSpace::full_shift(2);
        let zero = ShiftPoint::periodic(&w("0"));
        let one = ShiftPoint::periodic(&w("1"));
        assert_eq!(shift_metric(&space, &zero, &zero.clone(), 10), Distance::Exact(0.0));
        assert_eq!(shift_metric(&space, &zero, &one, 10), Distance::Exact(1.0));
        // 0-bar with coordinate 2 flipped
        let flipped = super::super::splice(
            &[
                super::super::Segment::new(zero.clone(), 0, 1),
                super::super::Segment::new(one.clone(), 2, 2),
                super::super::Segment::new(zero.clone(), 3, 3),
            ],
            &space,
        )
        .unwrap();
        let d = shift_metric(&space, &zero, &flipped, 10);
        assert!(d.is_exact());
        assert!((d.value() - (-2f64).exp()).abs() < 1e-15);
        let near = shift_metric(&space, &ShiftPoint::periodic(&w("01")), &ShiftPoint::periodic(&w("0101")), 5);
        assert_eq!(near, Distance::Exact(0.0));
    }

    #[test]
    fn horizon_bound_marker() {
        let space = ShiftSpace::full_shift(2);
        let zero = ShiftPoint::periodic(&w("0"));
        let far = super::super::splice(
            &[
                super::super::Segment::new(zero.clone(), 0, 20),
                super::super::Segment::new(ShiftPoint::periodic(&w("1")), 21, 21),
            ],
            &space,
        )
        .unwrap();
        let d = shift_metric(&space, &zero, &far, 5);
        assert_eq!(d, Distance::AtMost((-5f64).exp()));
    }
}
