use serde::{Deserialize, Serialize};

use super::{ShiftPoint, Symbol, SymbolicError, Word, MAX_ALPHABET};

/// Least `k >= 1` with `transition^k` entrywise positive.
///
/// Searches up to `alphabet_size^2`, which exceeds Wielandt's bound
/// `(n-1)^2 + 1` for primitive matrices.
pub fn primitivity_index(transition: &[Vec<bool>]) -> Result<usize, SymbolicError> {
    let n = transition.len();
    if n == 0 || transition.iter().any(|r| r.len() != n) {
        return Err(SymbolicError::NotSquare);
    }
    let limit = (n * n).max(1);
    let mut power = transition.to_vec();
    for k in 1..=limit {
        if power.iter().all(|r| r.iter().all(|&b| b)) {
            return Ok(k);
        }
        power = bool_mul(&power, transition);
    }
    Err(SymbolicError::NotPrimitive(limit))
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// A primitive subshift of finite type with the metric
/// `d(x, y) = exp(-decay * min{|i| : x_i != y_i})`.
#[derive(Clone, Debug)]
pub struct ShiftSpace {
    transition: Vec<Vec<bool>>,
    decay: f64,
    spec_gap: usize,
    /// `reach[r][a][b]`: a path with exactly `r` transitions from `a` to `b`,
    /// for `r <= spec_gap`. Longer paths always exist.
    reach: Vec<Vec<Vec<bool>>>,
}

/// Serializable description of a shift space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpaceDescription {
    pub alphabet_size: usize,
    pub transitions: Vec<Vec<u8>>,
    pub decay: f64,
}

impl ShiftSpace {
    pub fn new(transition: Vec<Vec<u8>>, decay: f64) -> Result<Self, SymbolicError> {
        let n = transition.len();
        if n == 0 || transition.iter().any(|r| r.len() != n) {
            return Err(SymbolicError::NotSquare);
        }
        if n > MAX_ALPHABET {
            return Err(SymbolicError::AlphabetTooLarge(n));
        }
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(SymbolicError::InvalidDecay(decay));
        }
        let mut t = vec![vec![false; n]; n];
        for (i, row) in transition.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[i][j] = match v {
                    0 => false,
                    1 => true,
                    value => return Err(SymbolicError::InvalidEntry { row: i, col: j, value }),
                };
            }
        }
        let spec_gap = primitivity_index(&t)?;
        let mut reach = Vec::with_capacity(spec_gap + 1);
        let identity: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        reach.push(identity);
        for r in 1..=spec_gap {
            let next = bool_mul(&reach[r - 1], &t);
            reach.push(next);
        }
        Ok(Self {
            transition: t,
            decay,
            spec_gap,
            reach,
        })
    }

    pub fn full_shift(alphabet_size: usize) -> Self {
        Self::new(vec![vec![1; alphabet_size]; alphabet_size], 1.0).expect("full shift is primitive")
    }

    /// The golden-mean shift: `1 -> 1` is forbidden.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![1, 1], vec![1, 0]], 1.0).expect("golden mean shift is primitive")
    }

    pub fn with_decay(mut self, decay: f64) -> Result<Self, SymbolicError> {
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(SymbolicError::InvalidDecay(decay));
        }
        self.decay = decay;
        Ok(self)
    }

    pub fn from_description(d: &ShiftSpaceDescription) -> Result<Self, SymbolicError> {
        if d.transitions.len() != d.alphabet_size {
            return Err(SymbolicError::NotSquare);
        }
        Self::new(d.transitions.clone(), d.decay)
    }

    pub fn description(&self) -> ShiftSpaceDescription {
        ShiftSpaceDescription {
            alphabet_size: self.alphabet_size(),
            transitions: self
                .transition
                .iter()
                .map(|r| r.iter().map(|&b| b as u8).collect())
                .collect(),
            decay: self.decay,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.transition.len()
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// The specification gap `N`: least `k >= 1` with `T^k > 0`.
    pub fn spec_gap(&self) -> usize {
        self.spec_gap
    }

    pub fn primitivity_index(&self) -> usize {
        self.spec_gap
    }

    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        self.transition
            .get(from as usize)
            .and_then(|r| r.get(to as usize))
            .copied()
            .unwrap_or(false)
    }

    pub fn successors(&self, from: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        self.transition[from as usize]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| j as Symbol)
    }

    fn reachable(&self, from: Symbol, to: Symbol, transitions: usize) -> bool {
        if transitions > self.spec_gap {
            return true;
        }
        self.reach[transitions][from as usize][to as usize]
    }

    fn check_symbols(&self, word: &Word) -> Result<(), SymbolicError> {
        match word.symbols().iter().find(|&&s| s as usize >= self.alphabet_size()) {
            Some(&s) => Err(SymbolicError::SymbolOutOfRange(s)),
            None => Ok(()),
        }
    }

    /// Checks every internal transition of `word`.
    pub fn check_word(&self, word: &Word) -> Result<(), SymbolicError> {
        self.check_symbols(word)?;
        for (k, pair) in word.symbols().windows(2).enumerate() {
            if !self.allows(pair[0], pair[1]) {
                return Err(SymbolicError::IllegalWord {
                    word: word.to_string(),
                    position: k,
                    from: pair[0],
                    to: pair[1],
                });
            }
        }
        Ok(())
    }

    /// Checks internal transitions and the wrap-around `last -> first`.
    pub fn check_cyclic_word(&self, word: &Word) -> Result<(), SymbolicError> {
        if word.is_empty() {
            return Err(SymbolicError::EmptyWord);
        }
        self.check_word(word)?;
        let s = word.symbols();
        let (last, first) = (s[s.len() - 1], s[0]);
        if !self.allows(last, first) {
            return Err(SymbolicError::IllegalWord {
                word: word.to_string(),
                position: s.len() - 1,
                from: last,
                to: first,
            });
        }
        Ok(())
    }

    pub fn is_legal(&self, word: &Word) -> bool {
        self.check_word(word).is_ok()
    }

    /// Lexicographically least word `w` of length `len` with
    /// `from -> w_0 -> ... -> w_{len-1} -> to` legal, if one exists.
    pub fn bridge(&self, from: Symbol, to: Symbol, len: usize) -> Option<Word> {
        if len == 0 {
            return self.allows(from, to).then(Word::default);
        }
        let mut out = Vec::with_capacity(len);
        let mut prev = from;
        for j in 0..len {
            let remaining = len - j;
            let next = self
                .successors(prev)
                .find(|&c| self.reachable(c, to, remaining))?;
            out.push(next);
            prev = next;
        }
        Some(Word::new(out))
    }

    /// The bridging word of length exactly `N` between two symbols.
    pub fn connect(&self, from: Symbol, to: Symbol) -> Word {
        self.bridge(from, to, self.spec_gap)
            .expect("primitive space admits bridges of length N")
    }

    /// The two-sided periodic point `...www.www...` with coordinate 0 equal
    /// to `word[0]`.
    pub fn periodic_point(&self, word: &Word) -> Result<ShiftPoint, SymbolicError> {
        self.check_cyclic_word(word)?;
        Ok(ShiftPoint::periodic(word))
    }

    /// Whether the point is legal on coordinates `lo..=hi`.
    pub fn check_point_window(&self, point: &ShiftPoint, lo: i64, hi: i64) -> bool {
        let mut prev = point.symbol(lo);
        for i in lo + 1..=hi {
            let s = point.symbol(i);
            if !self.allows(prev, s) {
                return false;
            }
            prev = s;
        }
        true
    }
}
