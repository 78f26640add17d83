//! Exact finite-alphabet probability.
//!
//! Joint pmfs are stored densely over the product of their variables'
//! alphabets (row-major, last variable fastest). Every information measure
//! is computed by exact summation in bits, with `0 log 0 = 0`.

mod alphabet;
mod info;
mod json;
mod kernel;
mod pmf;

pub use alphabet::Alphabet;
pub use info::{binary_entropy, star};
pub use json::PmfDocument;
pub use kernel::Kernel;
pub use pmf::{empirical_distribution, total_variation, JointPmf, MAX_SUPPORT};

use thiserror::Error;

/// Tolerance on the total mass of a pmf and on every kernel row.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("alphabet `{0}` has no symbols")]
    EmptyAlphabet(String),
    #[error("alphabet `{alphabet}` repeats symbol `{symbol}`")]
    DuplicateSymbol { alphabet: String, symbol: String },
    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` appears in more than one group")]
    OverlappingGroups(String),
    #[error("{0} must name at least one variable")]
    EmptyGroup(&'static str),
    #[error("sequence length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("symbol {symbol} is outside the alphabet of `{variable}`")]
    UnknownSymbol { variable: String, symbol: String },
    #[error("expected {expected} mass entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("negative or non-finite mass {0}")]
    InvalidMass(f64),
    #[error("masses sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("kernel row {row} sums to {sum}, not 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("distributions are defined over different variables or alphabets")]
    AlphabetMismatch,
    #[error("product space of {size} tuples exceeds the limit of {limit}")]
    Capacity { size: u128, limit: usize },
    #[error("{what} = {value} is outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("output variable `{0}` is also conditioned on")]
    OutputInGiven(String),
    #[error("kernel input `{0}` is not defined yet")]
    KernelInputUndefined(String),
    #[error("invalid pmf document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, ProbError>;
