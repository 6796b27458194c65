use super::{ShiftPoint, ShiftSpace, Symbol, SymbolicError, Word};

/// Points agreeing with `base` on coordinates `lo..=hi`.
#[derive(Clone, Debug)]
pub struct Cylinder {
    base: ShiftPoint,
    lo: i64,
    hi: i64,
}

impl Cylinder {
    /// Half-width of the coordinate window equivalent to the ball of
    /// radius `t`: `ceil(-ln t / decay)`, never negative.
    pub fn radius_window(t: f64, decay: f64) -> i64 {
        ((-t.ln() / decay).ceil() as i64).max(0)
    }

    /// The ball `B(base, t)` as a symmetric window.
    pub fn from_radius(base: ShiftPoint, t: f64, space: &ShiftSpace) -> Self {
        let w = Self::radius_window(t, space.decay());
        Self { base, lo: -w, hi: w }
    }

    pub fn new(base: ShiftPoint, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi);
        Self { base, lo, hi }
    }

    /// Cylinder of a legal window word placed at `lo`, with the canonical
    /// base point: the periodic extension of the word (closed up by the
    /// shortest legal bridge).
    pub fn from_window(space: &ShiftSpace, word: &Word, lo: i64) -> Result<Self, SymbolicError> {
        if word.is_empty() {
            return Err(SymbolicError::EmptyWord);
        }
        space.check_word(word)?;
        let cyclic = periodic_closure(space, word);
        let base = ShiftPoint::periodic_from(&cyclic, lo);
        Ok(Self {
            base,
            lo,
            hi: lo + word.len() as i64 - 1,
        })
    }

    /// Window of length `len` centred on 0 (left-biased for even lengths).
    pub fn centered(space: &ShiftSpace, word: &Word) -> Result<Self, SymbolicError> {
        let lo = -(((word.len() as i64) - 1) / 2);
        Self::from_window(space, word, lo)
    }

    pub fn base(&self) -> &ShiftPoint {
        &self.base
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn window_word(&self) -> Word {
        self.base.window(self.lo, self.hi)
    }

    pub fn contains(&self, point: &ShiftPoint) -> bool {
        (self.lo..=self.hi).all(|i| point.symbol(i) == self.base.symbol(i))
    }

    /// Metric radius guaranteed by membership: points agreeing on
    /// `|i| <= w` are within `exp(-decay (w + 1))`.
    pub fn guaranteed_radius(&self, space: &ShiftSpace) -> f64 {
        let w = (-self.lo).min(self.hi);
        if w < 0 {
            1.0
        } else {
            (-space.decay() * (w + 1) as f64).exp()
        }
    }
}

/// `word` followed by the shortest legal bridge back to its first symbol.
pub(crate) fn periodic_closure(space: &ShiftSpace, word: &Word) -> Word {
    let s = word.symbols();
    let (last, first) = (s[s.len() - 1], s[0]);
    let bridge = (0..=space.spec_gap())
        .find_map(|len| space.bridge(last, first, len))
        .expect("bridge of length N always exists");
    word.concat(&bridge)
}

/// All legal words of length `len`, in lexicographic order.
pub fn legal_words(space: &ShiftSpace, len: usize) -> Vec<Word> {
    let mut out: Vec<Vec<Symbol>> = (0..space.alphabet_size() as Symbol).map(|s| vec![s]).collect();
    if len == 0 {
        return vec![Word::default()];
    }
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().unwrap();
                space
                    .successors(last)
                    .map(|s| {
                        let mut v = w.clone();
                        v.push(s);
                        v
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out.into_iter().map(Word::new).collect()
}
