use thiserror::Error;

use crate::homeo::Pair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet size must be in 2..=36, got {0}")]
    InvalidAlphabet(u32),

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u8, right: u8 },

    #[error("symbol {symbol} out of range for alphabet of size {k}")]
    InvalidSymbol { symbol: u8, k: u8 },

    #[error("cannot parse word {0:?}")]
    InvalidWord(String),

    #[error("cannot parse rational {0:?}")]
    InvalidRational(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("not a complete prefix code: {0}")]
    NotPrefixCode(String),

    #[error("pair {pair} is not a power of the odometer")]
    NotInFullGroup { pair: Pair },

    #[error("power table does not induce a permutation of level-{level} cylinders")]
    NotAPermutation { level: usize },

    #[error("element is not periodic")]
    NotPeriodic,

    #[error("epsilon must be a positive rational")]
    InvalidEpsilon,

    #[error("clopen base must be nonempty")]
    EmptyBase,

    #[error("refinement needs depth {needed}, above the cap {cap}")]
    RefinementImpossible { needed: usize, cap: usize },

    #[error("no construction met the budget up to depth {max_depth}")]
    BudgetUnreachable { max_depth: usize },

    #[error("measure #{index} has atoms; only continuous measures are allowed")]
    AtomicMeasure { index: usize },

    #[error("no strict matching for removed pieces at depth {depth}")]
    NoStrictMatch { depth: usize },

    #[error("cylinder counts {left} and {right} differ modulo {modulus}; no prefix-code bijection exists")]
    ResidueMismatch { left: usize, right: usize, modulus: usize },

    #[error("every invariant set within budget swallows a period base")]
    EmptyComplement,

    #[error("invalid pruned tree: {0}")]
    InvalidTree(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
