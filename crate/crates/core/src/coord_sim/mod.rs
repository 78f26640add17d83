//! Random-binning coordination codes run end to end at small block lengths.
//!
//! `T_X` covers its source with `U`, then `V` and either `W` (scheme 1) or
//! `Z` (scheme 2) from sub-codebooks indexed by the chosen `U` codeword. It
//! sends the bin indices of `U` and `V` to the relay `T_Y`, which decodes
//! them against `Y^n` and covers the remaining auxiliary. `T_Z` combines
//! both links and emits `Z^n`.
//!
//! Every cover or decode failure emits index 0, sets a stage flag, and the
//! pipeline keeps going, so each trial still yields a full `(x, y, z)`
//! empirical distribution.

mod codebook;
mod monte_carlo;
mod pipeline;
mod rates;
mod typical;

pub use codebook::{generate_codebooks, Book, CodebookSuite, MAX_BOOK_SEQUENCES};
pub use monte_carlo::{monte_carlo, MonteCarloSummary, NSummary, SimConfig, StageCounts, TrialRecord};
pub use pipeline::{
    relay_process, relay_process_genie, run_trial, rx_decode, tx_encode, Channel,
    ChannelMessage, IndexField, RelayOutput, RxOutput, StageFlags, TrialPlan, TrialResult,
    TxOutput,
};
pub use rates::{derive_code_rates, BookSizes, CodeRates};
pub use typical::is_typical;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_prob::ProbError;
use crate::rate_region::{RegionError, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimScheme {
    #[serde(rename = "SCHEME_1")]
    One,
    #[serde(rename = "SCHEME_2")]
    Two,
}

impl SimScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimScheme::One => "SCHEME_1",
            SimScheme::Two => "SCHEME_2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "SCHEME_1" | "1" => Some(SimScheme::One),
            "SCHEME_2" | "2" => Some(SimScheme::Two),
            _ => None,
        }
    }

    /// The inner region whose factorization the scheme requires.
    pub fn region(&self) -> Scheme {
        match self {
            SimScheme::One => Scheme::R1,
            SimScheme::Two => Scheme::R2,
        }
    }
}

impl std::fmt::Display for SimScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("delta must be finite and non-negative, got {0}")]
    Delta(f64),
    #[error("epsilon must be in [0, 2], got {0}")]
    Epsilon(f64),
    #[error("block length must be positive")]
    BlockLength,
    #[error("packing constraint {constraint} is violated by {excess}")]
    Infeasible {
        constraint: &'static str,
        excess: f64,
    },
    #[error("{book} book would hold {size} sequences (limit {limit})")]
    Budget {
        book: &'static str,
        size: f64,
        limit: u64,
    },
    #[error("alphabet of `{name}` has {size} symbols (limit 256)")]
    Alphabet { name: String, size: usize },
    #[error("(X,Y,Z) marginal of the joint differs from the target by {0} in L1")]
    TargetMismatch(f64),
    #[error("malformed message: {0}")]
    Message(String),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least one block length is required")]
    NoBlockLengths,
}

pub type Result<T> = std::result::Result<T, SimError>;
