use super::broadcast::KRAUS_ENTRY_LIMIT;
use crate::error::{Error, Result};
use crate::qla::linalg::{kron, CMatrix, CVector};
use crate::qla::{copy_labels, DensityOperator, QuantumChannel, Subsystem, SystemLayout};
use crate::tolerance::TOL;
use crate::typicality::{is_typical, num_bins_for, sequence_at, FiniteDistribution};

/// Typical-subspace compression of `n` copies of a source into a message of dimension
/// `ceil(2^{nR})`.
///
/// Work happens in the eigenbasis of the source: sequence `t` (lexicographic over the
/// eigenvalue labels, largest eigenvalue first) is the product eigenvector `|e_t>`. The
/// codewords are robust-typical sequences, most probable first, truncated to the message
/// dimension. Message `0` carries codeword `c_0`, which is also where every atypical
/// sequence lands, so the round trip is
/// `rho -> P_C rho P_C + (tr rho - tr P_C rho) |e_{c_0}><e_{c_0}|`.
#[derive(Debug, Clone)]
pub struct SchumacherCode {
    label: String,
    n: usize,
    rate: f64,
    delta: f64,
    probs: Vec<f64>,
    vectors: Vec<CVector>,
    message_dim: u64,
    codewords: Vec<usize>,
    /// `slot[t]`: message index of codeword `t`, if it is one.
    slot: Vec<Option<usize>>,
    typical_weight: f64,
}

/// Builds the code for `n` copies of `source` (a single-system state) at rate `rate`.
/// When the message space holds every sequence the code is the identity.
pub fn schumacher_encode(source: &DensityOperator, n: usize, rate: f64, delta: f64) -> Result<SchumacherCode> {
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!("compression rate must be positive, got {rate}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    if source.layout().len() != 1 {
        return Err(Error::Labeling(format!(
            "compression source must be a single system, got {:?}",
            source.layout().labels()
        )));
    }
    let label = source.layout().labels()[0].to_string();
    let d = source.dim();
    let total = (d as f64).powi(n as i32);
    if total > TOL.max_dim as f64 {
        return Err(Error::DimensionGuard { dim: total as usize, limit: TOL.max_dim });
    }
    let total = total as usize;
    let pairs = source.spectral_decomposition()?;
    let probs: Vec<f64> = pairs.iter().map(|e| if e.value > TOL.rank_cutoff { e.value } else { 0.0 }).collect();
    let letters = FiniteDistribution::from_weights(&probs)?;
    let probs = letters.probs().to_vec();
    let vectors: Vec<CVector> = pairs.into_iter().map(|e| e.vector.amplitudes().clone()).collect();
    let message_dim = num_bins_for(n, rate)?;

    let seq_prob = |t: usize| sequence_at(d, n, t).iter().map(|&a| probs[a]).product::<f64>();
    let codewords: Vec<usize> = if message_dim >= total as u64 {
        (0..total).collect()
    } else {
        let mut typical: Vec<(f64, usize)> = (0..total)
            .filter(|&t| is_typical(&sequence_at(d, n, t), &letters, delta))
            .map(|t| (seq_prob(t), t))
            .collect();
        if typical.is_empty() {
            // nothing is typical: keep the single most probable sequence
            typical.push((seq_prob(0), 0));
        }
        typical.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        typical.truncate(message_dim as usize);
        typical.into_iter().map(|(_, t)| t).collect()
    };
    let mut slot = vec![None; total];
    for (i, &t) in codewords.iter().enumerate() {
        slot[t] = Some(i);
    }
    // exact 1 at full rate: distances scale like sqrt(1 - w), so rounding would show
    let typical_weight =
        if codewords.len() == total { 1.0 } else { codewords.iter().map(|&t| seq_prob(t)).sum::<f64>().min(1.0) };
    Ok(SchumacherCode { label, n, rate, delta, probs, vectors, message_dim, codewords, slot, typical_weight })
}

impl SchumacherCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn letter_dim(&self) -> usize {
        self.probs.len()
    }

    /// `d^n`.
    pub fn block_dim(&self) -> usize {
        self.letter_dim().pow(self.n as u32)
    }

    pub fn message_dim(&self) -> u64 {
        self.message_dim
    }

    /// Source eigenvalues, descending.
    pub fn spectrum(&self) -> &[f64] {
        &self.probs
    }

    /// Codeword sequence indices in message order.
    pub fn codewords(&self) -> &[usize] {
        &self.codewords
    }

    /// True when every sequence is a codeword and the round trip is the identity.
    pub fn is_full_rate(&self) -> bool {
        self.codewords.len() == self.block_dim()
    }

    /// Total probability of the codewords under the source, `tr P_C rho^{(x)n}`.
    pub fn typical_weight(&self) -> f64 {
        self.typical_weight
    }

    /// Where the round trip sends eigen-sequence `t`.
    pub fn image_of(&self, t: usize) -> usize {
        match self.slot[t] {
            Some(_) => t,
            None => self.codewords[0],
        }
    }

    /// `sum_t p(t) <e_t| round trip(|e_t><e_t|) |e_t>`, the source-ensemble fidelity.
    pub fn ensemble_fidelity(&self) -> f64 {
        let (d, n) = (self.letter_dim(), self.n);
        (0..self.block_dim())
            .filter(|&t| self.image_of(t) == t)
            .map(|t| sequence_at(d, n, t).iter().map(|&a| self.probs[a]).product::<f64>())
            .sum()
    }

    /// `<v| (id (x) round trip)(|v><v|) |v>` for the canonical purification `|v>` of the
    /// source; the cross terms between codewords and atypical sequences vanish, leaving
    /// the square of the codeword weight.
    pub fn entanglement_fidelity(&self) -> f64 {
        self.typical_weight * self.typical_weight
    }

    pub fn sequence_prob(&self, t: usize) -> f64 {
        sequence_at(self.letter_dim(), self.n, t).iter().map(|&a| self.probs[a]).product()
    }

    /// `U^{(x)n}`: column `t` is `|e_t>`.
    pub fn basis(&self) -> CMatrix {
        let u = CMatrix::from_columns(&self.vectors);
        (0..self.n).fold(CMatrix::identity(1, 1), |acc, _| kron(&acc, &u))
    }

    /// Round trip on an operator written in the eigen-sequence basis.
    pub fn round_trip_eigen(&self, rho: &CMatrix) -> CMatrix {
        let dim = self.block_dim();
        let mut out = CMatrix::zeros(dim, dim);
        let mut lost = rho.trace();
        for &s in &self.codewords {
            lost -= rho[(s, s)];
            for &t in &self.codewords {
                out[(s, t)] = rho[(s, t)];
            }
        }
        let c0 = self.codewords[0];
        out[(c0, c0)] += lost;
        out
    }

    /// Round trip on an operator on `A^n` in the computational basis.
    pub fn round_trip(&self, rho: &CMatrix) -> CMatrix {
        let u = self.basis();
        let eig = u.adjoint() * rho * &u;
        &u * self.round_trip_eigen(&eig) * u.adjoint()
    }

    fn guard(&self, count: usize) -> Result<usize> {
        let entries = count as f64 * self.message_dim as f64 * self.block_dim() as f64;
        if entries > KRAUS_ENTRY_LIMIT as f64 {
            return Err(Error::GuardExceeded {
                what: "Kraus storage (entries)".into(),
                value: entries,
                limit: KRAUS_ENTRY_LIMIT as f64,
            });
        }
        Ok(self.message_dim as usize)
    }

    fn copies_layout(&self) -> Result<SystemLayout> {
        SystemLayout::new(
            copy_labels(&self.label, self.n)
                .into_iter()
                .map(|l| Subsystem::new(l, self.letter_dim()))
                .collect(),
        )
    }

    /// `A_1..A_n -> message`, with message label `message`.
    pub fn compressor(&self, message: &str) -> Result<QuantumChannel> {
        let dim = self.block_dim();
        let m = self.guard(dim - self.codewords.len() + 1)?;
        let u = self.basis();
        let mut k0 = CMatrix::zeros(m, dim);
        for (i, &t) in self.codewords.iter().enumerate() {
            k0.row_mut(i).copy_from(&u.column(t).adjoint());
        }
        let mut kraus = vec![k0];
        for t in (0..dim).filter(|&t| self.slot[t].is_none()) {
            let mut k = CMatrix::zeros(m, dim);
            k.row_mut(0).copy_from(&u.column(t).adjoint());
            kraus.push(k);
        }
        QuantumChannel::new(self.copies_layout()?, SystemLayout::from_pairs(&[(message, m)])?, kraus)
    }

    /// `message -> A_1..A_n`; unused message indices decode to codeword `c_0`.
    pub fn decompressor(&self, message: &str) -> Result<QuantumChannel> {
        let dim = self.block_dim();
        let m = self.guard(self.message_dim as usize - self.codewords.len() + 1)?;
        let u = self.basis();
        let mut k0 = CMatrix::zeros(dim, m);
        for (i, &t) in self.codewords.iter().enumerate() {
            k0.column_mut(i).copy_from(&u.column(t));
        }
        let mut kraus = vec![k0];
        let c0 = u.column(self.codewords[0]).into_owned();
        for k in self.codewords.len()..m {
            let mut op = CMatrix::zeros(dim, m);
            op.column_mut(k).copy_from(&c0);
            kraus.push(op);
        }
        QuantumChannel::new(SystemLayout::from_pairs(&[(message, m)])?, self.copies_layout()?, kraus)
    }
}
