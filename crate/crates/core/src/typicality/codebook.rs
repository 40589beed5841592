use serde::{Deserialize, Serialize};

use super::sets::{count_sequences, sequence_at};
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output function applied to `state`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bin of the sequence with lexicographic index `index`.
///
/// The draw is the `index`-th output of a SplitMix64 stream started at `seed`, i.e.
/// `h = splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15)` with wrapping arithmetic,
/// and the bin is `1 + floor(h * num_bins / 2^64)`.
pub fn draw_bin(seed: u64, index: u64, num_bins: u64) -> u64 {
    let h = splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
    1 + ((h as u128 * num_bins as u128) >> 64) as u64
}

/// Uniform random assignment of every `z^n` to a bin in `1..=num_bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningCodebook {
    n: usize,
    rate: f64,
    num_bins: u64,
    seed: u64,
    alphabet: Vec<String>,
    assignment: Vec<u64>,
}

/// On-disk form of a codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub n: usize,
    #[serde(rename = "Q")]
    pub rate: f64,
    pub seed: u64,
    pub alphabet: Vec<String>,
    pub assignment: Vec<u64>,
}

/// `ceil(2^{nQ})`, with a little slack so that exact powers of two are not rounded up.
pub fn num_bins_for(n: usize, rate: f64) -> Result<u64> {
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
    }
    let exponent = n as f64 * rate;
    if exponent > 63.0 {
        return Err(Error::GuardExceeded { what: "codebook size exponent nQ".into(), value: exponent, limit: 63.0 });
    }
    Ok((exponent.exp2() - 1e-9).ceil().max(1.0) as u64)
}

pub fn generate_codebook(n: usize, rate: f64, alphabet: &[String], seed: u64) -> Result<BinningCodebook> {
    if n == 0 || alphabet.is_empty() {
        return Err(Error::InvalidParameter("codebook needs n >= 1 and a non-empty alphabet".into()));
    }
    let num_bins = num_bins_for(n, rate)?;
    let total = count_sequences(alphabet.len(), n)?;
    let assignment = (0..total as u64).map(|i| draw_bin(seed, i, num_bins)).collect();
    Ok(BinningCodebook { n, rate, num_bins, seed, alphabet: alphabet.to_vec(), assignment })
}

impl BinningCodebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn num_bins(&self) -> u64 {
        self.num_bins
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Bin indices in lexicographic sequence order.
    pub fn assignment(&self) -> &[u64] {
        &self.assignment
    }

    pub fn index_of(&self, seq: &[usize]) -> usize {
        let k = self.alphabet.len();
        seq.iter().fold(0, |acc, &a| acc * k + a)
    }

    /// `m(z^n)`.
    pub fn bin_index(&self, seq: &[usize]) -> u64 {
        self.assignment[self.index_of(seq)]
    }

    /// Sequences assigned to bin `m`, in lexicographic order.
    pub fn bin_of(&self, m: u64) -> Vec<Vec<usize>> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == m)
            .map(|(i, _)| sequence_at(self.alphabet.len(), self.n, i))
            .collect()
    }

    pub fn to_file(&self) -> CodebookFile {
        CodebookFile {
            n: self.n,
            rate: self.rate,
            seed: self.seed,
            alphabet: self.alphabet.clone(),
            assignment: self.assignment.clone(),
        }
    }

    /// Rebuilds from a file, checking that the assignment matches the generator.
    pub fn from_file(file: &CodebookFile) -> Result<Self> {
        let cb = generate_codebook(file.n, file.rate, &file.alphabet, file.seed)?;
        if cb.assignment != file.assignment {
            return Err(Error::Parse("codebook assignment does not match its seed".into()));
        }
        Ok(cb)
    }
}
