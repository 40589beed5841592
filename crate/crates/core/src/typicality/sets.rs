use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// Probability vector over a named alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if alphabet.len() != probs.len() || probs.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "{} symbols but {} probabilities",
                alphabet.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let residual = (probs.iter().sum::<f64>() - 1.0).abs();
        if residual > TOL.letter_distribution {
            return Err(Error::InvalidDistribution(format!("entries sum to 1 {residual:+e}")));
        }
        Ok(Self { alphabet, probs })
    }

    /// Symbols named `0, 1, ..., k-1`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new((0..probs.len()).map(|i| i.to_string()).collect(), probs)
    }

    /// Normalizes non-negative weights; for spectra that are only approximately normalized.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::from_probs(clipped.iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / k as f64; k])
    }

    pub fn point(k: usize, symbol: usize) -> Result<Self> {
        let mut p = vec![0.0; k];
        *p.get_mut(symbol).ok_or_else(|| Error::InvalidParameter("symbol out of range".into()))? = 1.0;
        Self::from_probs(p)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of a sequence under the i.i.d. extension.
    pub fn sequence_prob(&self, seq: &[usize]) -> f64 {
        seq.iter().map(|&a| self.probs[a]).product()
    }
}

/// Rows `p(.|x)` of a conditional distribution, all over the same output alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    rows: Vec<FiniteDistribution>,
}

impl ConditionalTable {
    pub fn new(rows: Vec<FiniteDistribution>) -> Result<Self> {
        let k = rows.first().map(|r| r.len()).ok_or_else(|| {
            Error::InvalidDistribution("conditional table needs at least one row".into())
        })?;
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidDistribution("rows have different output alphabets".into()));
        }
        Ok(Self { rows })
    }

    pub fn row(&self, x: usize) -> &FiniteDistribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[FiniteDistribution] {
        &self.rows
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    /// `prod_i p(z_i|x_i)`.
    pub fn sequence_prob(&self, x: &[usize], z: &[usize]) -> f64 {
        x.iter().zip(z).map(|(&a, &b)| self.rows[a].probs[b]).product()
    }
}

/// Parameters of a robust typical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetSpec {
    pub base: FiniteDistribution,
    pub n: usize,
    pub delta: f64,
}

impl TypicalSetSpec {
    pub fn new(base: FiniteDistribution, n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { base, n, delta })
    }
}

/// `k^n`, refused above the enumeration guard.
pub fn count_sequences(k: usize, n: usize) -> Result<usize> {
    let total = (k as f64).powi(n as i32);
    if total > TOL.max_sequences as f64 {
        return Err(Error::GuardExceeded {
            what: format!("enumeration of {k}^{n} sequences"),
            value: total,
            limit: TOL.max_sequences as f64,
        });
    }
    Ok(k.pow(n as u32))
}

/// Sequence with lexicographic index `index` (first letter most significant).
pub fn sequence_at(k: usize, n: usize, mut index: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for slot in seq.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
    seq
}

fn within_band(count: usize, expected: f64, p: f64, delta: f64) -> bool {
    if p == 0.0 {
        return count == 0;
    }
    // relative slack so that boundary counts survive rounding
    (count as f64 - expected).abs() <= delta * expected + 1e-12 * expected.max(1.0)
}

/// `|N(a)/n - p(a)| <= delta p(a)` for every letter, and no zero-probability letters.
pub fn is_typical(seq: &[usize], p: &FiniteDistribution, delta: f64) -> bool {
    let n = seq.len();
    let mut counts = vec![0usize; p.len()];
    for &a in seq {
        if a >= p.len() {
            return false;
        }
        counts[a] += 1;
    }
    counts
        .iter()
        .zip(&p.probs)
        .all(|(&c, &q)| within_band(c, q * n as f64, q, delta))
}

/// `|N(x,z) - p(z|x) N(x)| <= delta p(z|x) N(x)` for every pair, and no zero-probability pairs.
pub fn is_conditionally_typical(x: &[usize], z: &[usize], table: &ConditionalTable, delta: f64) -> bool {
    let (kx, kz) = (table.input_size(), table.output_size());
    let mut nx = vec![0usize; kx];
    let mut nxz = vec![0usize; kx * kz];
    for (&a, &b) in x.iter().zip(z) {
        if a >= kx || b >= kz {
            return false;
        }
        nx[a] += 1;
        nxz[a * kz + b] += 1;
    }
    (0..kx).all(|a| {
        (0..kz).all(|b| {
            let q = table.rows[a].probs[b];
            within_band(nxz[a * kz + b], q * nx[a] as f64, q, delta)
        })
    })
}

/// All robust-typical sequences, in lexicographic order.
pub fn typical_set(spec: &TypicalSetSpec) -> Result<Vec<Vec<usize>>> {
    let k = spec.base.len();
    let total = count_sequences(k, spec.n)?;
    Ok((0..total)
        .map(|i| sequence_at(k, spec.n, i))
        .filter(|s| is_typical(s, &spec.base, spec.delta))
        .collect())
}

/// All `z^n` conditionally typical with `x^n`, in lexicographic order.
pub fn conditional_typical_set(x: &[usize], table: &ConditionalTable, delta: f64) -> Result<Vec<Vec<usize>>> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if let Some(&a) = x.iter().find(|&&a| a >= table.input_size()) {
        return Err(Error::InvalidParameter(format!("symbol {a} outside the conditioning alphabet")));
    }
    let kz = table.output_size();
    let total = count_sequences(kz, x.len())?;
    Ok((0..total)
        .map(|i| sequence_at(kz, x.len(), i))
        .filter(|z| is_conditionally_typical(x, z, table, delta))
        .collect())
}
