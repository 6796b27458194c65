//! Mixing subshifts of finite type: exact shift metric, bridging words,
//! and shadowing by concatenation of orbit windows.
//!
//! Two-sided points are described lazily by a [`SymbolSource`]; every
//! source is immutable and pure, so points may be evaluated from many
//! threads at once. No source memoizes.

mod cylinder;
mod point;
mod space;
mod splice;
mod word;

pub use cylinder::{legal_words, Cylinder};
pub use point::{shift_metric, Distance, Run, ShiftPoint, SymbolSource};
pub use space::{primitivity_index, ShiftSpace, ShiftSpaceDescription};
pub use splice::{splice, Segment};
pub use word::{Symbol, Word, MAX_ALPHABET};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("transition matrix must be square and non-empty")]
    NotSquare,
    #[error("transition entry ({row}, {col}) is {value}, expected 0 or 1")]
    InvalidEntry { row: usize, col: usize, value: u8 },
    #[error("alphabet size {0} exceeds the supported maximum of {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("transition matrix is not primitive: no power up to {0} is strictly positive")]
    NotPrimitive(usize),
    #[error("metric decay rate must be positive and finite, got {0}")]
    InvalidDecay(f64),
    #[error("illegal word {word}: transition {from} -> {to} at position {position} is forbidden")]
    IllegalWord {
        word: String,
        position: usize,
        from: Symbol,
        to: Symbol,
    },
    #[error("empty word")]
    EmptyWord,
    #[error("symbol {0} is outside the alphabet")]
    SymbolOutOfRange(Symbol),
    #[error("invalid symbol character {0:?}")]
    InvalidSymbolChar(char),
    #[error("segments {index} and {next}: gap {gap} is smaller than the specification gap {required}", next = .index + 1)]
    GapTooSmall {
        index: usize,
        gap: i64,
        required: usize,
    },
    #[error("segment {0} has an empty or reversed window")]
    BadWindow(usize),
    #[error("splice needs at least one segment")]
    EmptySplice,
}
