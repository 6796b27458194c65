use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SymbolicError;

pub type Symbol = u8;

/// Alphabets are serialized one character per symbol (`0-9a-z`).
pub const MAX_ALPHABET: usize = 36;

/// A finite word over the alphabet, serialized as a symbol string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cyclic rotation starting at `start`.
    pub fn rotated(&self, start: usize) -> Word {
        let n = self.0.len();
        Word((0..n).map(|k| self.0[(start + k) % n]).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Repeat the word `times` times.
    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }
}

pub(crate) fn symbol_char(s: Symbol) -> char {
    std::char::from_digit(s as u32, 36).unwrap_or('?')
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", symbol_char(s))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as Symbol)
                    .ok_or(SymbolicError::InvalidSymbolChar(c))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

impl TryFrom<String> for Word {
    type Error = SymbolicError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Word = "01a".parse().unwrap();
        assert_eq!(w.symbols(), &[0, 1, 10]);
        assert_eq!(w.to_string(), "01a");
        assert!("0-1".parse::<Word>().is_err());
    }

    #[test]
    fn rotation() {
        let w: Word = "012".parse().unwrap();
        assert_eq!(w.rotated(1).to_string(), "120");
    }
}
