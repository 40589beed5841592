//! Robust typicality over finite alphabets and the random binning codebook.

mod codebook;
mod sets;

pub use codebook::{draw_bin, generate_codebook, num_bins_for, splitmix64, BinningCodebook, CodebookFile};
pub use sets::{
    conditional_typical_set, count_sequences, is_conditionally_typical, is_typical, sequence_at,
    typical_set, ConditionalTable, FiniteDistribution, TypicalSetSpec,
};
