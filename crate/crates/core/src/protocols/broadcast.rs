use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{grouped_labels, summarize, tensor_copies, SeedOutcome, Side, SimulationReport};
use crate::error::{Error, Result};
use crate::qla::linalg::{kron, max_abs_diff, CMatrix, CVector};
use crate::qla::{copy_labels, trace_norm_half, DensityOperator, QuantumChannel, Subsystem, SystemLayout};
use crate::regions::{broadcast_feasibility, ClassicalQuantumState};
use crate::tolerance::TOL;
use crate::typicality::{
    count_sequences, generate_codebook, is_conditionally_typical, sequence_at, splitmix64, ConditionalTable,
    FiniteDistribution,
};

/// Most Kraus-matrix entries an explicit encoder or decoder may hold.
pub const KRAUS_ENTRY_LIMIT: usize = 1 << 24;

/// Largest `(dA dB dC)^n` for which the exact joint error is computed.
const JOINT_DIM_LIMIT: usize = 256;

/// Most `(x^n, y^n, z^n, w^n)` combinations visited by the exact joint error.
const JOINT_TERM_LIMIT: f64 = 1e6;

/// Allowed rise between consecutive mean errors in a sweep before it counts as increasing.
pub const MONOTONE_TOLERANCE: f64 = 0.02;

/// Spectral decompositions `sigma^(x) = sum_z p(z|x) |psi_{x,z}><psi_{x,z}|` of one
/// receiver's conditional states. Eigenvalues are descending, so `z = 0` is the largest.
#[derive(Debug, Clone)]
pub struct SpectralData {
    dim: usize,
    probs: Vec<Vec<f64>>,
    vectors: Vec<Vec<CVector>>,
    table: ConditionalTable,
}

impl SpectralData {
    pub fn from_states(states: &[DensityOperator]) -> Result<Self> {
        let dim = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("no conditional states".into()))?
            .dim();
        let mut probs = Vec::with_capacity(states.len());
        let mut vectors = Vec::with_capacity(states.len());
        for s in states {
            let pairs = s.spectral_decomposition()?;
            probs.push(pairs.iter().map(|e| if e.value > TOL.rank_cutoff { e.value } else { 0.0 }).collect::<Vec<_>>());
            vectors.push(pairs.into_iter().map(|e| e.vector.amplitudes().clone()).collect::<Vec<_>>());
        }
        let rows = probs
            .iter()
            .map(|p: &Vec<f64>| FiniteDistribution::from_weights(p))
            .collect::<Result<Vec<_>>>()?;
        let table = ConditionalTable::new(rows)?;
        let data = Self { dim, probs, vectors, table };
        let residual = data.reconstruction_residual(states);
        if residual > 1e-8 {
            return Err(Error::Numerical(format!("spectral data reproduces the states only to {residual:e}")));
        }
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `p_{Z|X}` rows.
    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn vectors(&self) -> &[Vec<CVector>] {
        &self.vectors
    }

    pub fn table(&self) -> &ConditionalTable {
        &self.table
    }

    /// Max-entry distance between `sum_z p(z|x) |psi><psi|` and each state.
    pub fn reconstruction_residual(&self, states: &[DensityOperator]) -> f64 {
        states
            .iter()
            .enumerate()
            .map(|(x, s)| {
                let mut m = CMatrix::zeros(self.dim, self.dim);
                for (p, v) in self.probs[x].iter().zip(&self.vectors[x]) {
                    m += (v * v.adjoint()).scale(*p);
                }
                max_abs_diff(&m, s.matrix())
            })
            .fold(0.0, f64::max)
    }

    pub fn sequence_prob(&self, x: &[usize], z: &[usize]) -> f64 {
        x.iter().zip(z).map(|(&a, &b)| self.probs[a][b]).product()
    }

    fn letter_basis(&self, x: usize) -> CMatrix {
        CMatrix::from_columns(&self.vectors[x])
    }

    /// `U_{x^n}`: column `z^n` (lexicographic) is `|psi_{x^n, z^n}>`.
    pub fn basis(&self, x: &[usize]) -> CMatrix {
        x.iter().fold(CMatrix::identity(1, 1), |acc, &a| kron(&acc, &self.letter_basis(a)))
    }
}

/// One receiver's view of the ensemble: Bob reads `(X, B)`, Charlie `(Y, C)`.
#[derive(Debug, Clone)]
struct Receiver {
    side: Side,
    system: &'static str,
    message: &'static str,
    rate: f64,
    p: Vec<f64>,
    spectral: SpectralData,
    /// `sigma_{A S}^(x)` on `(A, S)` or just `S`.
    sigma: Vec<DensityOperator>,
    /// Per-letter label weights `a(z) = sum_x p(x) <psi_{x,z}| omega_{AS} |psi_{x,z}>` on `A`.
    letter_ops: Vec<CMatrix>,
    /// `p(x^n)` by lexicographic index.
    x_weights: Vec<f64>,
    /// `T_delta^{Z^n|x^n}` as lexicographic `z^n` indices, for every `x^n` of positive weight.
    typical: Vec<Vec<usize>>,
}

/// Everything the binning protocol needs: the ensemble, blocklength, rates, `delta`, the
/// first codebook seed, and both receivers' spectral data and typical sets.
#[derive(Debug, Clone)]
pub struct BroadcastProtocolInstance {
    ensemble: ClassicalQuantumState,
    n: usize,
    delta: f64,
    base_seed: u64,
    a_dim: usize,
    has_a: bool,
    kx: usize,
    ky: usize,
    p_xy: Vec<f64>,
    /// `sigma_{ABC}^{(x,y)}` in `X`-major order, on `(A, B, C)` or `(B, C)`.
    sigma_xy: Vec<DensityOperator>,
    bob: Receiver,
    charlie: Receiver,
}

/// How the per-seed distances are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMethod {
    /// Diagonal shortcut when `A` is trivial, dense matrices otherwise.
    Auto,
    /// Always build the `(A^n, B^n)` matrices.
    Dense,
}

fn partial_inner(omega: &CMatrix, da: usize, ds: usize, psi: &CVector) -> CMatrix {
    CMatrix::from_fn(da, da, |i, j| {
        let mut acc = crate::qla::C64::new(0.0, 0.0);
        for b in 0..ds {
            for b2 in 0..ds {
                acc += psi[b].conj() * omega[(i * ds + b, j * ds + b2)] * psi[b2];
            }
        }
        acc
    })
}

fn sequence_index(seq: &[usize], k: usize) -> usize {
    seq.iter().fold(0, |acc, &a| acc * k + a)
}

fn alphabet(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

impl Receiver {
    #[allow(clippy::too_many_arguments)]
    fn build(
        side: Side,
        system: &'static str,
        message: &'static str,
        rate: f64,
        averaged: Vec<(f64, DensityOperator)>,
        has_a: bool,
        a_dim: usize,
        n: usize,
        delta: f64,
    ) -> Result<Self> {
        let order: Vec<&str> = if has_a { vec!["A", system] } else { vec![system] };
        let p: Vec<f64> = averaged.iter().map(|(p, _)| *p).collect();
        let sigma = averaged
            .iter()
            .map(|(_, s)| s.reorder(&order))
            .collect::<Result<Vec<_>>>()?;
        let reduced = sigma.iter().map(|s| s.partial_trace(&[system])).collect::<Result<Vec<_>>>()?;
        let spectral = SpectralData::from_states(&reduced)?;
        let ds = spectral.dim();

        let terms: Vec<(f64, &DensityOperator)> = p.iter().copied().zip(&sigma).collect();
        let omega = DensityOperator::mixture(&terms)?;
        let letter_ops = (0..ds)
            .map(|z| {
                let mut acc = CMatrix::zeros(a_dim, a_dim);
                for (x, &px) in p.iter().enumerate() {
                    if px > 0.0 {
                        acc += partial_inner(omega.matrix(), a_dim, ds, &spectral.vectors[x][z]).scale(px);
                    }
                }
                acc
            })
            .collect();

        let kx = p.len();
        count_sequences(kx * ds, n)?;
        let num_x = kx.pow(n as u32);
        let num_z = ds.pow(n as u32);
        let x_weights: Vec<f64> = (0..num_x)
            .map(|i| sequence_at(kx, n, i).iter().map(|&a| p[a]).product())
            .collect();
        let typical = (0..num_x)
            .into_par_iter()
            .map(|i| {
                if x_weights[i] == 0.0 {
                    return Vec::new();
                }
                let x = sequence_at(kx, n, i);
                (0..num_z)
                    .filter(|&j| is_conditionally_typical(&x, &sequence_at(ds, n, j), spectral.table(), delta))
                    .collect()
            })
            .collect();
        Ok(Self { side, system, message, rate, p, spectral, sigma, letter_ops, x_weights, typical })
    }

    fn num_letters(&self) -> usize {
        self.spectral.dim()
    }

    fn codebook_seed(&self, seed: u64) -> u64 {
        match self.side {
            Side::Charlie => splitmix64(seed),
            _ => seed,
        }
    }

    fn bins(&self, n: usize, seed: u64) -> Result<Vec<u64>> {
        let cb = generate_codebook(n, self.rate, &alphabet(self.num_letters()), self.codebook_seed(seed))?;
        Ok(cb.assignment().to_vec())
    }

    /// Weight of `z^n` in Alice's label distribution, as an operator on `A^n`.
    fn label_op(&self, z: &[usize]) -> CMatrix {
        z.iter().fold(CMatrix::identity(1, 1), |acc, &b| kron(&acc, &self.letter_ops[b]))
    }
}

/// Decoder support for one `x^n` and codebook: candidates `T` (or all of `Z^n` when
/// `T` is empty), the size of `T ∩ bin(m)` per bin, and the fallback coefficient.
struct Support<'a> {
    candidates: std::borrow::Cow<'a, [usize]>,
    group_sizes: BTreeMap<u64, usize>,
}

impl<'a> Support<'a> {
    fn new(typical: &'a [usize], num_z: usize, bins: &[u64]) -> Self {
        let candidates: std::borrow::Cow<'a, [usize]> = if typical.is_empty() {
            std::borrow::Cow::Owned((0..num_z).collect())
        } else {
            std::borrow::Cow::Borrowed(typical)
        };
        let mut group_sizes = BTreeMap::new();
        for &z in candidates.iter() {
            *group_sizes.entry(bins[z]).or_insert(0) += 1;
        }
        Self { candidates, group_sizes }
    }

    /// Sequences the decoder outputs for message `m`, each with weight `1/|S|`.
    fn decode(&self, m: u64, bins: &[u64]) -> (Vec<usize>, f64) {
        if self.group_sizes.contains_key(&m) {
            let s: Vec<usize> = self.candidates.iter().copied().filter(|&z| bins[z] == m).collect();
            let w = 1.0 / s.len() as f64;
            (s, w)
        } else {
            (self.candidates.to_vec(), 1.0 / self.candidates.len() as f64)
        }
    }
}

/// `|| target - output ||` for one receiver and `x^n` with trivial `A`: both states are
/// diagonal in the `psi_{x^n}` basis.
fn diagonal_error(r: &Receiver, x: &[usize], support: &Support, bins: &[u64], mass: &BTreeMap<u64, f64>) -> f64 {
    let ds = r.num_letters();
    let n = x.len();
    let num_z = bins.len();
    let fallback: f64 = mass.iter().filter(|(m, _)| !support.group_sizes.contains_key(m)).map(|(_, w)| w).sum();
    let fallback_coef = fallback / support.candidates.len() as f64;
    let mut q = vec![0.0; num_z];
    for &z in support.candidates.iter() {
        let m = bins[z];
        let own = mass.get(&m).copied().unwrap_or(0.0) / support.group_sizes[&m] as f64;
        q[z] = own + fallback_coef;
    }
    let mut err = 0.0;
    for (z, qz) in q.iter().enumerate() {
        let p = r.spectral.sequence_prob(x, &sequence_at(ds, n, z));
        err += (p - qz).abs();
    }
    (0.5 * err).min(1.0)
}

/// Same distance with `A` kept: the output is block diagonal in the `psi_{x^n}` basis of
/// `S^n`, with block `sum_m c(z, m) L(m)` on `A^n`.
fn dense_error(
    r: &Receiver,
    x: &[usize],
    a_dim: usize,
    support: &Support,
    bins: &[u64],
    blocks: &BTreeMap<u64, CMatrix>,
) -> Result<f64> {
    let n = x.len();
    let ds = r.num_letters();
    let dan = a_dim.pow(n as u32);
    let dsn = ds.pow(n as u32);
    let states: Vec<&DensityOperator> = x.iter().map(|&a| &r.sigma[a]).collect();
    let groups: Vec<&str> = if dan > 1 || r.sigma[0].layout().contains("A") { vec!["A", r.system] } else { vec![r.system] };
    let target = tensor_copies(&states)?.reorder(&grouped_labels(&groups, n))?;
    let u = kron(&CMatrix::identity(dan, dan), &r.spectral.basis(x));
    let rotated = u.adjoint() * target.matrix() * &u;

    let mut fallback = CMatrix::zeros(dan, dan);
    for (m, l) in blocks {
        if !support.group_sizes.contains_key(m) {
            fallback += l;
        }
    }
    let fallback = fallback.unscale(support.candidates.len() as f64);
    let mut out = CMatrix::zeros(dan * dsn, dan * dsn);
    for &z in support.candidates.iter() {
        let m = bins[z];
        let mut block = fallback.clone();
        if let Some(l) = blocks.get(&m) {
            block += l.unscale(support.group_sizes[&m] as f64);
        }
        for a in 0..dan {
            for a2 in 0..dan {
                out[(a * dsn + z, a2 * dsn + z)] = block[(a, a2)];
            }
        }
    }
    Ok(trace_norm_half(&(rotated - out)))
}

fn receiver_error(r: &Receiver, n: usize, a_dim: usize, seed: u64, method: SimulationMethod) -> Result<f64> {
    let bins = r.bins(n, seed)?;
    let kx = r.p.len();
    let ds = r.num_letters();
    let dense = method == SimulationMethod::Dense || a_dim > 1;
    let mut total = 0.0;
    if dense {
        let mut blocks: BTreeMap<u64, CMatrix> = BTreeMap::new();
        for (z, &m) in bins.iter().enumerate() {
            let op = r.label_op(&sequence_at(ds, n, z));
            match blocks.get_mut(&m) {
                Some(acc) => *acc += op,
                None => {
                    blocks.insert(m, op);
                }
            }
        }
        for (i, &px) in r.x_weights.iter().enumerate() {
            if px > 0.0 {
                let support = Support::new(&r.typical[i], bins.len(), &bins);
                total += px * dense_error(r, &sequence_at(kx, n, i), a_dim, &support, &bins, &blocks)?;
            }
        }
    } else {
        let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
        for (z, &m) in bins.iter().enumerate() {
            *mass.entry(m).or_insert(0.0) += r.label_op(&sequence_at(ds, n, z))[(0, 0)].re;
        }
        for (i, &px) in r.x_weights.iter().enumerate() {
            if px > 0.0 {
                let support = Support::new(&r.typical[i], bins.len(), &bins);
                total += px * diagonal_error(r, &sequence_at(kx, n, i), &support, &bins, &mass);
            }
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

impl BroadcastProtocolInstance {
    /// Validates the ensemble (classical `X`, `Y`; quantum `B`, `C`, optional `A`), the
    /// feasibility condition, rates and guards, and precomputes every typical set.
    pub fn new(ensemble: ClassicalQuantumState, n: usize, q1: f64, q2: f64, delta: f64, base_seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
        }
        for (name, q) in [("Q1", q1), ("Q2", q2)] {
            if !(q > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {q}")));
            }
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let f = broadcast_feasibility(&ensemble)?;
        if !f.feasible {
            return Err(Error::Infeasible {
                what: "omega_XYA is not a product omega_XY (x) omega_A".into(),
                residual: f.residual,
            });
        }
        let quantum = ensemble.quantum_layout();
        let has_a = quantum.contains("A");
        let a_dim = if has_a { quantum.dim_of("A")? } else { 1 };
        let keep_b: Vec<&str> = if has_a { vec!["A", "B"] } else { vec!["B"] };
        let keep_c: Vec<&str> = if has_a { vec!["A", "C"] } else { vec!["C"] };
        let keep_all: Vec<&str> = if has_a { vec!["A", "B", "C"] } else { vec!["B", "C"] };

        let on_b = ensemble.quantum_marginal(&keep_b)?.conditional_average(&["X"])?;
        let on_c = ensemble.quantum_marginal(&keep_c)?.conditional_average(&["Y"])?;
        let bob = Receiver::build(Side::Bob, "B", "M1", q1, on_b, has_a, a_dim, n, delta)?;
        let charlie = Receiver::build(Side::Charlie, "C", "M2", q2, on_c, has_a, a_dim, n, delta)?;

        let joint = ensemble.quantum_marginal(&keep_all)?.conditional_average(&["X", "Y"])?;
        let p_xy = joint.iter().map(|(p, _)| *p).collect();
        let sigma_xy = joint.iter().map(|(_, s)| s.reorder(&keep_all)).collect::<Result<Vec<_>>>()?;
        let (kx, ky) = (bob.p.len(), charlie.p.len());

        if has_a {
            for r in [&bob, &charlie] {
                let d = ((a_dim * r.num_letters()) as f64).powi(n as i32);
                if d > TOL.max_dim as f64 {
                    return Err(Error::DimensionGuard { dim: d as usize, limit: TOL.max_dim });
                }
            }
        }
        Ok(Self { ensemble, n, delta, base_seed, a_dim, has_a, kx, ky, p_xy, sigma_xy, bob, charlie })
    }

    /// Same ensemble and `delta` at another blocklength and rates.
    pub fn with_parameters(&self, n: usize, q1: f64, q2: f64) -> Result<Self> {
        Self::new(self.ensemble.clone(), n, q1, q2, self.delta, self.base_seed)
    }

    pub fn ensemble(&self) -> &ClassicalQuantumState {
        &self.ensemble
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q1(&self) -> f64 {
        self.bob.rate
    }

    pub fn q2(&self) -> f64 {
        self.charlie.rate
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn bob_spectral(&self) -> &SpectralData {
        &self.bob.spectral
    }

    pub fn charlie_spectral(&self) -> &SpectralData {
        &self.charlie.spectral
    }

    /// `p_X` and `p_Y`.
    pub fn marginals(&self) -> (&[f64], &[f64]) {
        (&self.bob.p, &self.charlie.p)
    }

    /// Averaged states `sigma_{AB}^{(x)}` (or `sigma_B^{(x)}` when `A` is absent).
    pub fn bob_states(&self) -> &[DensityOperator] {
        &self.bob.sigma
    }

    pub fn charlie_states(&self) -> &[DensityOperator] {
        &self.charlie.sigma
    }

    /// `T_delta^{Z^n|x^n}` as lexicographic indices.
    pub fn bob_typical_set(&self, x: &[usize]) -> &[usize] {
        &self.bob.typical[sequence_index(x, self.kx)]
    }

    pub fn charlie_typical_set(&self, y: &[usize]) -> &[usize] {
        &self.charlie.typical[sequence_index(y, self.ky)]
    }

    fn receiver(&self, side: Side) -> Result<&Receiver> {
        match side {
            Side::Bob => Ok(&self.bob),
            Side::Charlie => Ok(&self.charlie),
            Side::Joint => Err(Error::InvalidParameter("a decoder belongs to Bob or Charlie".into())),
        }
    }

    fn joint_error(&self, seed: u64) -> Result<Option<f64>> {
        let n = self.n;
        let (db, dc) = (self.bob.num_letters(), self.charlie.num_letters());
        let dim = ((self.a_dim * db * dc) as f64).powi(n as i32);
        let terms = ((self.kx * self.ky * db * dc) as f64).powi(n as i32);
        if dim > JOINT_DIM_LIMIT as f64 || terms > JOINT_TERM_LIMIT {
            return Ok(None);
        }
        let da = self.a_dim;
        let omega = DensityOperator::mixture(&self.p_xy.iter().copied().zip(&self.sigma_xy).collect::<Vec<_>>())?;
        let mut letter = vec![CMatrix::zeros(da, da); db * dc];
        for (z, slot) in letter.iter_mut().enumerate() {
            let (zb, zc) = (z / dc, z % dc);
            for (x, &px) in self.bob.p.iter().enumerate() {
                for (y, &py) in self.charlie.p.iter().enumerate() {
                    if px * py > 0.0 {
                        let v = kron(
                            &CMatrix::from_column_slice(db, 1, self.bob.spectral.vectors[x][zb].as_slice()),
                            &CMatrix::from_column_slice(dc, 1, self.charlie.spectral.vectors[y][zc].as_slice()),
                        );
                        let psi = CVector::from_column_slice(v.as_slice());
                        *slot += partial_inner(omega.matrix(), da, db * dc, &psi).scale(px * py);
                    }
                }
            }
        }
        let bins_b = self.bob.bins(n, seed)?;
        let bins_c = self.charlie.bins(n, seed)?;
        let mut blocks: BTreeMap<(u64, u64), CMatrix> = BTreeMap::new();
        for (zi, &m1) in bins_b.iter().enumerate() {
            let z = sequence_at(db, n, zi);
            for (wi, &m2) in bins_c.iter().enumerate() {
                let w = sequence_at(dc, n, wi);
                let op = z
                    .iter()
                    .zip(&w)
                    .fold(CMatrix::identity(1, 1), |acc, (&a, &b)| kron(&acc, &letter[a * dc + b]));
                match blocks.get_mut(&(m1, m2)) {
                    Some(acc) => *acc += op,
                    None => {
                        blocks.insert((m1, m2), op);
                    }
                }
            }
        }
        let groups: Vec<&str> = if self.has_a { vec!["A", "B", "C"] } else { vec!["B", "C"] };
        let labels = grouped_labels(&groups, n);
        let mut total = 0.0;
        for xi in 0..self.kx.pow(n as u32) {
            let x = sequence_at(self.kx, n, xi);
            for yi in 0..self.ky.pow(n as u32) {
                let y = sequence_at(self.ky, n, yi);
                let pxy: f64 = x.iter().zip(&y).map(|(&a, &b)| self.p_xy[a * self.ky + b]).product();
                if pxy == 0.0 {
                    continue;
                }
                let states: Vec<&DensityOperator> =
                    x.iter().zip(&y).map(|(&a, &b)| &self.sigma_xy[a * self.ky + b]).collect();
                let target = tensor_copies(&states)?.reorder(&labels)?;
                let dec_b = decoder_outputs(&self.bob, &x, &bins_b);
                let dec_c = decoder_outputs(&self.charlie, &y, &bins_c);
                let mut out = CMatrix::zeros(target.dim(), target.dim());
                for ((m1, m2), l) in &blocks {
                    out += kron(l, &kron(&dec_b[m1], &dec_c[m2]));
                }
                total += pxy * trace_norm_half(&(target.matrix() - out));
            }
        }
        Ok(Some(total.clamp(0.0, 1.0)))
    }
}

/// Decoder output `D_{x^n}(m)` on `S^n`, for every occupied bin `m`.
fn decoder_outputs(r: &Receiver, x: &[usize], bins: &[u64]) -> BTreeMap<u64, CMatrix> {
    let n = x.len();
    let kx = r.p.len();
    let idx = sequence_index(x, kx);
    let support = Support::new(&r.typical[idx], bins.len(), bins);
    let u = r.spectral.basis(x);
    let mut out = BTreeMap::new();
    let occupied: std::collections::BTreeSet<u64> = bins.iter().copied().collect();
    let dsn = r.num_letters().pow(n as u32);
    for m in occupied {
        let (seqs, w) = support.decode(m, bins);
        let mut d = CMatrix::zeros(dsn, dsn);
        for z in seqs {
            let col = u.column(z);
            d += (col * col.adjoint()).scale(w);
        }
        out.insert(m, d);
    }
    out
}

/// Alice's encoders `E1: Bbar^n -> M1` and `E2: Cbar^n -> M2` for the codebooks of `seed`,
/// each the `p_X`-mixture of measurements in the `psi_{x^n}` bases followed by binning.
pub fn build_alice_encoders(instance: &BroadcastProtocolInstance, seed: u64) -> Result<(QuantumChannel, QuantumChannel)> {
    Ok((
        alice_encoder(&instance.bob, instance.n, seed, "Bbar")?,
        alice_encoder(&instance.charlie, instance.n, seed, "Cbar")?,
    ))
}

fn kraus_guard(count: f64, rows: f64, cols: f64) -> Result<()> {
    let entries = count * rows * cols;
    if entries > KRAUS_ENTRY_LIMIT as f64 {
        return Err(Error::GuardExceeded {
            what: "Kraus storage (entries)".into(),
            value: entries,
            limit: KRAUS_ENTRY_LIMIT as f64,
        });
    }
    Ok(())
}

fn copies_layout(label: &str, dim: usize, n: usize) -> Result<SystemLayout> {
    SystemLayout::new(copy_labels(label, n).into_iter().map(|l| Subsystem::new(l, dim)).collect())
}

fn alice_encoder(r: &Receiver, n: usize, seed: u64, input: &str) -> Result<QuantumChannel> {
    let ds = r.num_letters();
    let kx = r.p.len();
    let bins = r.bins(n, seed)?;
    let nb = *bins.iter().max().unwrap_or(&1) as usize;
    let num_bins = crate::typicality::num_bins_for(n, r.rate)? as usize;
    let nb = nb.max(num_bins);
    let dsn = ds.pow(n as u32);
    let positive = r.x_weights.iter().filter(|&&w| w > 0.0).count();
    kraus_guard((positive * dsn) as f64, nb as f64, dsn as f64)?;
    let mut kraus = Vec::with_capacity(positive * dsn);
    for (i, &px) in r.x_weights.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let u = r.spectral.basis(&sequence_at(kx, n, i));
        for (z, &m) in bins.iter().enumerate() {
            let mut k = CMatrix::zeros(nb, dsn);
            k.row_mut((m - 1) as usize).copy_from(&u.column(z).adjoint().scale(px.sqrt()));
            kraus.push(k);
        }
    }
    let input = copies_layout(input, ds, n)?;
    let output = SystemLayout::from_pairs(&[(r.message, nb)])?;
    QuantumChannel::new(input, output, kraus)
}

/// Receiver decoder `M -> S^n` for the side information `sequence` and the codebook of
/// `seed`: message `m` becomes the uniform mixture of `|psi_{x^n, z^n}>` over
/// `T ∩ bin(m)`, or over all of `T` when that intersection is empty.
pub fn build_receiver_decoder(
    instance: &BroadcastProtocolInstance,
    side: Side,
    seed: u64,
    sequence: &[usize],
) -> Result<QuantumChannel> {
    let r = instance.receiver(side)?;
    let n = instance.n;
    if sequence.len() != n || sequence.iter().any(|&a| a >= r.p.len()) {
        return Err(Error::InvalidParameter(format!("side information {sequence:?} does not fit n = {n}")));
    }
    let ds = r.num_letters();
    let typical: Vec<usize> = (0..ds.pow(n as u32))
        .filter(|&j| is_conditionally_typical(sequence, &sequence_at(ds, n, j), r.spectral.table(), instance.delta))
        .collect();
    if typical.is_empty() {
        return Err(Error::EmptyTypicalSet { sequence: sequence.to_vec(), delta: instance.delta });
    }
    let bins = r.bins(n, seed)?;
    let nb = crate::typicality::num_bins_for(n, r.rate)? as usize;
    let dsn = ds.pow(n as u32);
    let support = Support::new(&typical, bins.len(), &bins);
    let per_bin: f64 = (1..=nb as u64).map(|m| support.decode(m, &bins).0.len() as f64).sum();
    kraus_guard(per_bin, dsn as f64, nb as f64)?;
    let u = r.spectral.basis(sequence);
    let mut kraus = Vec::new();
    for m in 1..=nb as u64 {
        let (seqs, w) = support.decode(m, &bins);
        for z in seqs {
            let mut k = CMatrix::zeros(dsn, nb);
            k.column_mut((m - 1) as usize).copy_from(&u.column(z).scale(w.sqrt()));
            kraus.push(k);
        }
    }
    let input = SystemLayout::from_pairs(&[(r.message, nb)])?;
    let output = copies_layout(r.system, ds, n)?;
    QuantumChannel::new(input, output, kraus)
}

/// Runs `num_seeds` codebooks starting at the instance's base seed.
pub fn simulate_broadcast(instance: &BroadcastProtocolInstance, num_seeds: usize) -> Result<SimulationReport> {
    let seeds: Vec<u64> = (0..num_seeds as u64).map(|k| instance.base_seed.wrapping_add(k)).collect();
    simulate_broadcast_seeds(instance, &seeds, SimulationMethod::Auto)
}

/// Exact per-seed errors `1/2 || omega_{XAB}^{(x)n} - simulated ||_1` (and Charlie's),
/// computed in parallel and reported in seed order.
pub fn simulate_broadcast_seeds(
    instance: &BroadcastProtocolInstance,
    seeds: &[u64],
    method: SimulationMethod,
) -> Result<SimulationReport> {
    simulate_seeds(instance, seeds, method, true)
}

fn simulate_seeds(
    instance: &BroadcastProtocolInstance,
    seeds: &[u64],
    method: SimulationMethod,
    exact_joint: bool,
) -> Result<SimulationReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    let start = Instant::now();
    let n = instance.n;
    let outcomes = seeds
        .par_iter()
        .map(|&seed| {
            let bob = receiver_error(&instance.bob, n, instance.a_dim, seed, method)?;
            let charlie = receiver_error(&instance.charlie, n, instance.a_dim, seed, method)?;
            Ok(SeedOutcome {
                seed,
                error_bob: Some(bob),
                error_charlie: Some(charlie),
                error_joint: bob + charlie,
                error_joint_exact: if exact_joint { instance.joint_error(seed)? } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&SeedOutcome) -> f64| outcomes.iter().map(f).collect::<Vec<_>>();
    let summary = vec![
        summarize(Side::Bob, &pick(|o| o.error_bob.unwrap_or(0.0))),
        summarize(Side::Charlie, &pick(|o| o.error_charlie.unwrap_or(0.0))),
        summarize(Side::Joint, &pick(|o| o.error_joint)),
    ];
    let dense = method == SimulationMethod::Dense || instance.a_dim > 1;
    Ok(SimulationReport {
        protocol: "broadcast".into(),
        method: if dense { "exact-dense" } else { "exact-diagonal" }.into(),
        n,
        q1: instance.q1(),
        q2: instance.q2(),
        delta: instance.delta,
        seeds: seeds.to_vec(),
        outcomes,
        summary,
        wall_time_secs: Some(start.elapsed().as_secs_f64()),
    })
}

/// Mean errors at one `(n, Q1, Q2)` grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    #[serde(rename = "Q1")]
    pub q1: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
    pub mean_bob: f64,
    pub mean_charlie: f64,
    pub mean_joint: f64,
    pub num_seeds: usize,
}

/// Whether the mean Bob error is non-increasing in `n` at one rate pair, up to
/// [`MONOTONE_TOLERANCE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    #[serde(rename = "Q1")]
    pub q1: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
    pub non_increasing: bool,
    /// Largest rise between consecutive blocklengths (negative when strictly falling).
    pub worst_rise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub monotonicity: Vec<MonotonicityCheck>,
    pub reports: Vec<SimulationReport>,
}

impl SweepTable {
    pub fn row(&self, n: usize, q1: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.n == n && r.q1 == q1)
    }

    /// Per-seed rows of every report, one CSV header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,Q1,Q2,seed,error_bob,error_charlie,error_joint\n");
        for r in &self.reports {
            out.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
        }
        out
    }
}

/// Mean errors over `seeds` for every rate pair and blocklength.
pub fn rate_sweep_broadcast(
    ensemble: &ClassicalQuantumState,
    delta: f64,
    rates: &[(f64, f64)],
    ns: &[usize],
    seeds: &[u64],
) -> Result<SweepTable> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut monotonicity = Vec::new();
    for &(q1, q2) in rates {
        let mut means = Vec::new();
        for &n in ns {
            let instance = BroadcastProtocolInstance::new(ensemble.clone(), n, q1, q2, delta, 0)?;
            // sweeps tabulate per-receiver means only, so the exact joint distance is skipped
            let mut report = simulate_seeds(&instance, seeds, SimulationMethod::Auto, false)?;
            report.wall_time_secs = None;
            let mean = |s| report.mean(s).unwrap_or(0.0);
            rows.push(SweepRow {
                n,
                q1,
                q2,
                mean_bob: mean(Side::Bob),
                mean_charlie: mean(Side::Charlie),
                mean_joint: mean(Side::Joint),
                num_seeds: seeds.len(),
            });
            means.push(mean(Side::Bob));
            reports.push(report);
        }
        let worst_rise = means.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let worst_rise = if worst_rise.is_finite() { worst_rise } else { 0.0 };
        monotonicity.push(MonotonicityCheck { q1, q2, non_increasing: worst_rise <= MONOTONE_TOLERANCE, worst_rise });
    }
    Ok(SweepTable { rows, monotonicity, reports })
}
