//! Integer sequences `[f(n)]`, s-fold sumsets, gaps, the Bezout certificate
//! and explicit representations, plus residue and fractional-part checks.

mod equidist;
mod export;
mod gaps;
mod lemma3;
mod sequence;
mod sumset;

use thiserror::Error;

use crate::function::EvalError;

pub use equidist::{fractional_density, residue_coverage, DensityReport};
pub use export::{read_bitmap_dump, write_bitmap_dump, write_sequence_csv, BITMAP_MAGIC};
pub use gaps::{basis_order_search, gap_report, GapReport, OrderLevel, OrderSearch};
pub use lemma3::{gcd_bezout, represent_lemma3, BasisCertificate, Lemma3Representation, MAX_PREFIX_TERMS};
pub use sequence::{
    floor_value, floor_value_with, gen_sequence, gen_sequence_with, FloorFlag, FloorValue, SequenceWindow,
    MAX_SEQUENCE_LEN,
};
pub use sumset::{sumset_fold, sumset_tower, SumsetBitmap, SumsetTower, DEFAULT_BITSET_BUDGET};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("[f({n})] = {value:e} does not fit in a 63-bit integer")]
    Overflow { n: u64, value: f64 },
    #[error("limit {limit} exceeds the bitset budget of {budget} bits")]
    Capacity { limit: u64, budget: u64 },
    #[error("no element of the set lies in [{lo}, {hi}]")]
    EmptyWindow { lo: u64, hi: u64 },
    #[error("gcd of differences over the first {terms} distinct values is {gcd}; hypothesis (b) unverifiable at this window")]
    CertificateFailure { gcd: i128, terms: usize },
    #[error("N = {n} lies outside [{threshold}, {limit}] where the construction applies")]
    Range { n: u64, threshold: u64, limit: u64 },
    #[error("bitset backtrack failed at {0}; the sumset levels are inconsistent")]
    Backtrack(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
