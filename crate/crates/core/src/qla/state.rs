use super::channel::{Isometry, QuantumChannel};
use super::layout::{copy_label, Subsystem, SystemLayout};
use super::linalg::{
    hermitian_eigen, hermitian_eigenvalues, hermitian_residual, permute_matrix, permute_vector,
    real, CMatrix, CVector, C64,
};
use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// Normalized state vector on a labeled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SystemLayout,
    amplitudes: CVector,
}

/// Unit-trace positive semidefinite operator on a labeled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: SystemLayout,
    matrix: CMatrix,
}

/// One term of a spectral decomposition.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: PureState,
}

fn check_dim(layout: &SystemLayout, len: usize) -> Result<()> {
    if layout.total_dim() != len {
        return Err(Error::DimensionMismatch(format!(
            "layout has dimension {} but data has dimension {len}",
            layout.total_dim()
        )));
    }
    Ok(())
}

/// Where systems produced from `on` land: at the earliest position among `on`,
/// counted within the untouched systems.
fn insertion_index(on: &[usize], rest: &[usize]) -> usize {
    let first = *on.iter().min().expect("non-empty selection");
    rest.iter().filter(|&&p| p < first).count()
}

fn split_rest(layout: &SystemLayout, on: &[usize]) -> Vec<usize> {
    (0..layout.len()).filter(|p| !on.contains(p)).collect()
}

/// Layout with the systems of `out` placed at `at` inside `rest`.
fn spliced_layout(rest: &SystemLayout, out: &SystemLayout, at: usize) -> Result<SystemLayout> {
    let mut subs: Vec<Subsystem> = rest.subsystems()[..at].to_vec();
    subs.extend(out.subsystems().iter().cloned());
    subs.extend(rest.subsystems()[at..].iter().cloned());
    SystemLayout::new(subs)
}

/// Order that moves the trailing `out` block (after `rest`) to index `at`.
fn splice_order(n_rest: usize, n_out: usize, at: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..at).collect();
    order.extend(n_rest..n_rest + n_out);
    order.extend(at..n_rest);
    order
}

impl PureState {
    pub fn new(layout: SystemLayout, amplitudes: CVector) -> Result<Self> {
        check_dim(&layout, amplitudes.len())?;
        let residual = (amplitudes.norm() - 1.0).abs();
        if residual > TOL.norm {
            return Err(Error::NotNormalized { residual });
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn from_amplitudes(layout: SystemLayout, amplitudes: Vec<C64>) -> Result<Self> {
        Self::new(layout, CVector::from_vec(amplitudes))
    }

    /// Normalizes `amplitudes` before validating; fails only on the zero vector.
    pub fn normalized(layout: SystemLayout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { residual: 1.0 });
        }
        Self::new(layout, amplitudes.unscale(norm))
    }

    /// Computational basis state `|index>`.
    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range {d}")));
        }
        let mut v = CVector::zeros(d);
        v[index] = real(1.0);
        Ok(Self { layout, amplitudes: v })
    }

    pub(crate) fn from_parts(layout: SystemLayout, amplitudes: CVector) -> Self {
        debug_assert_eq!(layout.total_dim(), amplitudes.len());
        Self { layout, amplitudes }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            layout: self.layout.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// `<self|other>`; layouts must match.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch("inner product of different layouts".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Euclidean norm of the difference of the two vectors.
    pub fn distance(&self, other: &PureState) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch("distance between different layouts".into()));
        }
        Ok((&self.amplitudes - &other.amplitudes).norm())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, amplitudes: self.amplitudes.kronecker(&other.amplitudes) })
    }

    /// `n` copies with labels `X_1..X_n`, copies outermost.
    pub fn tensor_power(&self, n: usize) -> Result<PureState> {
        let mut out = PureState::from_parts(SystemLayout::empty(), CVector::from_element(1, real(1.0)));
        for k in 0..n {
            out = out.tensor(&self.relabeled_copy(k)?)?;
        }
        Ok(out)
    }

    fn relabeled_copy(&self, k: usize) -> Result<PureState> {
        let subs = self
            .layout
            .subsystems()
            .iter()
            .map(|s| Subsystem::new(copy_label(&s.label, k), s.dim))
            .collect();
        Ok(Self { layout: SystemLayout::new(subs)?, amplitudes: self.amplitudes.clone() })
    }

    /// Same vector with subsystems reordered to `labels` (a permutation of all labels).
    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<PureState> {
        let order = full_order(&self.layout, labels)?;
        let map = self.layout.permutation_map(&order);
        Ok(Self {
            layout: self.layout.select(&order),
            amplitudes: permute_vector(&self.amplitudes, &map),
        })
    }

    pub fn relabel(&self, renames: &[(&str, &str)]) -> Result<PureState> {
        Ok(Self { layout: relabel_layout(&self.layout, renames)?, amplitudes: self.amplitudes.clone() })
    }

    /// Fuses contiguous systems `labels` (in layout order) into one system `new_label`.
    pub fn merge<S: AsRef<str>>(&self, labels: &[S], new_label: &str) -> Result<PureState> {
        Ok(Self { layout: merge_layout(&self.layout, labels, new_label)?, amplitudes: self.amplitudes.clone() })
    }

    /// Reduced state on `keep`, in layout order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let mut kept = self.layout.positions(keep)?;
        kept.sort_unstable();
        let traced = split_rest(&self.layout, &kept);
        let dk: usize = kept.iter().map(|&p| self.layout.subsystems()[p].dim).product();
        let dt: usize = traced.iter().map(|&p| self.layout.subsystems()[p].dim).product();
        let order: Vec<usize> = kept.iter().chain(&traced).copied().collect();
        let map = self.layout.permutation_map(&order);
        let m = CMatrix::from_fn(dk, dt, |i, t| self.amplitudes[map[i * dt + t]]);
        Ok(DensityOperator { layout: self.layout.select(&kept), matrix: &m * m.adjoint() })
    }

    /// `(1 (x) V)|psi>` with `V` acting on `on`; its output systems `out` take the
    /// place of the input systems.
    pub fn apply_isometry<S: AsRef<str>>(
        &self,
        v: &Isometry,
        on: &[S],
        out: &SystemLayout,
    ) -> Result<PureState> {
        let on_pos = self.layout.positions(on)?;
        let din: usize = on_pos.iter().map(|&p| self.layout.subsystems()[p].dim).product();
        if din != v.input_dim() || out.total_dim() != v.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "isometry is {}x{}, systems give {}x{}",
                v.output_dim(),
                v.input_dim(),
                out.total_dim(),
                din
            )));
        }
        let rest = split_rest(&self.layout, &on_pos);
        let order: Vec<usize> = rest.iter().chain(&on_pos).copied().collect();
        let map = self.layout.permutation_map(&order);
        let dr = self.dim() / din;
        let dout = v.output_dim();
        let psi = CMatrix::from_fn(dr, din, |r, i| self.amplitudes[map[r * din + i]]);
        let out_m = psi * v.matrix().transpose();
        let flat = CVector::from_fn(dr * dout, |k, _| out_m[(k / dout, k % dout)]);

        let rest_layout = self.layout.select(&rest);
        let at = insertion_index(&on_pos, &rest);
        let trailing = rest_layout.concat(out)?;
        let splice = splice_order(rest.len(), out.len(), at);
        let smap = trailing.permutation_map(&splice);
        Ok(Self {
            layout: spliced_layout(&rest_layout, out, at)?,
            amplitudes: permute_vector(&flat, &smap),
        })
    }
}

fn full_order<S: AsRef<str>>(layout: &SystemLayout, labels: &[S]) -> Result<Vec<usize>> {
    let order = layout.positions(labels)?;
    if order.len() != layout.len() {
        return Err(Error::Labeling(format!(
            "reorder needs all {} labels, got {}",
            layout.len(),
            order.len()
        )));
    }
    Ok(order)
}

fn relabel_layout(layout: &SystemLayout, renames: &[(&str, &str)]) -> Result<SystemLayout> {
    for (old, _) in renames {
        layout.dim_of(old)?;
    }
    let subs = layout
        .subsystems()
        .iter()
        .map(|s| {
            let label = renames
                .iter()
                .find(|(old, _)| *old == s.label)
                .map(|(_, new)| new.to_string())
                .unwrap_or_else(|| s.label.clone());
            Subsystem::new(label, s.dim)
        })
        .collect();
    SystemLayout::new(subs)
}

fn merge_layout<S: AsRef<str>>(layout: &SystemLayout, labels: &[S], new_label: &str) -> Result<SystemLayout> {
    let pos = layout.positions(labels)?;
    if pos.is_empty() {
        return Err(Error::Labeling("merge needs at least one label".into()));
    }
    if pos.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Labeling("merged systems must be contiguous and in layout order".into()));
    }
    let dim: usize = pos.iter().map(|&p| layout.subsystems()[p].dim).product();
    let mut subs: Vec<Subsystem> = layout.subsystems()[..pos[0]].to_vec();
    subs.push(Subsystem::new(new_label, dim));
    subs.extend(layout.subsystems()[pos[pos.len() - 1] + 1..].iter().cloned());
    SystemLayout::new(subs)
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity (down to `-TOL.psd`).
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        check_dim(&layout, matrix.nrows())?;
        let residual = hermitian_residual(&matrix);
        if residual > TOL.hermitian {
            return Err(Error::NotHermitian { residual });
        }
        let residual = (matrix.trace().re - 1.0).abs();
        if residual > TOL.trace {
            return Err(Error::BadTrace { residual });
        }
        let min = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(0.0);
        if min < -TOL.psd {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { layout, matrix })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.to_density()
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, matrix: CMatrix::identity(d, d).unscale(d as f64) }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(layout: SystemLayout, probs: &[f64]) -> Result<Self> {
        check_dim(&layout, probs.len())?;
        let m = CMatrix::from_diagonal(&CVector::from_iterator(probs.len(), probs.iter().map(|&p| real(p))));
        Self::new(layout, m)
    }

    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        Ok(PureState::basis(layout, index)?.to_density())
    }

    /// Convex combination of states on a common layout.
    pub fn mixture(terms: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?
            .1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (p, rho) in terms {
            if rho.layout != first.layout {
                return Err(Error::DimensionMismatch("mixture of states on different layouts".into()));
            }
            m += rho.matrix.scale(*p);
        }
        Self::new(first.layout.clone(), m)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues, descending, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect()
    }

    /// Number of eigenvalues above the rank cutoff.
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > TOL.rank_cutoff).count()
    }

    pub fn spectral_decomposition(&self) -> Result<Vec<Eigenpair>> {
        let pairs = hermitian_eigen(&self.matrix, &TOL)?;
        Ok(pairs
            .into_iter()
            .map(|(value, v)| Eigenpair {
                value: value.clamp(0.0, 1.0),
                vector: PureState::from_parts(self.layout.clone(), v),
            })
            .collect())
    }

    /// Minimal purification `sum_i sqrt(l_i)|v_i>|i>` with reference dimension equal
    /// to the rank.
    pub fn purify(&self, ref_label: &str) -> Result<PureState> {
        if self.layout.contains(ref_label) {
            return Err(Error::Labeling(format!("reference label `{ref_label}` already in use")));
        }
        let pairs: Vec<Eigenpair> = self
            .spectral_decomposition()?
            .into_iter()
            .filter(|e| e.value > TOL.rank_cutoff)
            .collect();
        let r = pairs.len().max(1);
        let d = self.dim();
        let mut v = CVector::zeros(d * r);
        for (i, e) in pairs.iter().enumerate() {
            let w = e.value.sqrt();
            for k in 0..d {
                v[k * r + i] = e.vector.amplitudes[k] * w;
            }
        }
        let layout = self.layout.concat(&SystemLayout::from_pairs(&[(ref_label, r)])?)?;
        PureState::normalized(layout, v)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// `n` copies with labels `X_1..X_n`, copies outermost.
    pub fn tensor_power(&self, n: usize) -> Result<DensityOperator> {
        let mut out = Self { layout: SystemLayout::empty(), matrix: CMatrix::identity(1, 1) };
        for k in 0..n {
            let subs = self
                .layout
                .subsystems()
                .iter()
                .map(|s| Subsystem::new(copy_label(&s.label, k), s.dim))
                .collect();
            let copy = Self { layout: SystemLayout::new(subs)?, matrix: self.matrix.clone() };
            out = out.tensor(&copy)?;
        }
        Ok(out)
    }

    /// Reduced state on `keep`, in layout order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let mut kept = self.layout.positions(keep)?;
        kept.sort_unstable();
        let traced = split_rest(&self.layout, &kept);
        let dk: usize = kept.iter().map(|&p| self.layout.subsystems()[p].dim).product();
        let dt: usize = traced.iter().map(|&p| self.layout.subsystems()[p].dim).product();
        let order: Vec<usize> = kept.iter().chain(&traced).copied().collect();
        let map = self.layout.permutation_map(&order);
        let m = CMatrix::from_fn(dk, dk, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += self.matrix[(map[i * dt + t], map[j * dt + t])];
            }
            acc
        });
        Ok(Self { layout: self.layout.select(&kept), matrix: m })
    }

    /// Traces out `labels`.
    pub fn trace_out<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityOperator> {
        let gone = self.layout.positions(labels)?;
        let keep: Vec<&str> = self
            .layout
            .labels()
            .into_iter()
            .enumerate()
            .filter(|(p, _)| !gone.contains(p))
            .map(|(_, l)| l)
            .collect();
        self.partial_trace(&keep)
    }

    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityOperator> {
        let order = full_order(&self.layout, labels)?;
        let map = self.layout.permutation_map(&order);
        Ok(Self { layout: self.layout.select(&order), matrix: permute_matrix(&self.matrix, &map) })
    }

    pub fn relabel(&self, renames: &[(&str, &str)]) -> Result<DensityOperator> {
        Ok(Self { layout: relabel_layout(&self.layout, renames)?, matrix: self.matrix.clone() })
    }

    /// Fuses contiguous systems `labels` (in layout order) into one system `new_label`.
    pub fn merge<S: AsRef<str>>(&self, labels: &[S], new_label: &str) -> Result<DensityOperator> {
        Ok(Self { layout: merge_layout(&self.layout, labels, new_label)?, matrix: self.matrix.clone() })
    }

    /// `1/2 ||self - other||_1`; the layouts must be identical.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(format!(
                "trace distance between layouts {:?} and {:?}",
                self.layout.labels(),
                other.layout.labels()
            )));
        }
        Ok(trace_norm_half(&(&self.matrix - &other.matrix)))
    }

    /// Applies `ch` to the systems `on` (matched in order against the channel's input
    /// layout); output systems take their place.
    pub fn apply_channel<S: AsRef<str>>(&self, ch: &QuantumChannel, on: &[S]) -> Result<DensityOperator> {
        let on_pos = self.layout.positions(on)?;
        let on_dims: Vec<usize> = on_pos.iter().map(|&p| self.layout.subsystems()[p].dim).collect();
        if on_dims != ch.input_layout().dims() {
            return Err(Error::DimensionMismatch(format!(
                "channel input dims {:?} do not match systems {:?} with dims {on_dims:?}",
                ch.input_layout().dims(),
                on.iter().map(|s| s.as_ref()).collect::<Vec<_>>()
            )));
        }
        let rest = split_rest(&self.layout, &on_pos);
        let order: Vec<usize> = rest.iter().chain(&on_pos).copied().collect();
        let map = self.layout.permutation_map(&order);
        let moved = permute_matrix(&self.matrix, &map);
        let din = ch.input_layout().total_dim();
        let dr = self.dim() / din;
        let out_m = apply_kraus_blocks(&moved, dr, din, ch.kraus_operators());

        let rest_layout = self.layout.select(&rest);
        let out = ch.output_layout();
        let at = insertion_index(&on_pos, &rest);
        let trailing = rest_layout.concat(out)?;
        let smap = trailing.permutation_map(&splice_order(rest.len(), out.len(), at));
        Ok(Self {
            layout: spliced_layout(&rest_layout, out, at)?,
            matrix: permute_matrix(&out_m, &smap),
        })
    }

    /// `(1 (x) V) rho (1 (x) V)^dag` on the systems `on`.
    pub fn apply_isometry<S: AsRef<str>>(
        &self,
        v: &Isometry,
        on: &[S],
        out: &SystemLayout,
    ) -> Result<DensityOperator> {
        let on_pos = self.layout.positions(on)?;
        let input = self.layout.select(&on_pos);
        let ch = v.as_channel(input, out.clone())?;
        self.apply_channel(&ch, on)
    }
}

/// `sum_K (1_r (x) K) rho (1_r (x) K)^dag` computed block by block.
pub(crate) fn apply_kraus_blocks(rho: &CMatrix, dr: usize, din: usize, kraus: &[CMatrix]) -> CMatrix {
    let dout = kraus.first().map(|k| k.nrows()).unwrap_or(din);
    let mut out = CMatrix::zeros(dr * dout, dr * dout);
    let adj: Vec<CMatrix> = kraus.iter().map(|k| k.adjoint()).collect();
    for r1 in 0..dr {
        for r2 in r1..dr {
            let block = rho.view((r1 * din, r2 * din), (din, din));
            let mut acc = CMatrix::zeros(dout, dout);
            for (k, kd) in kraus.iter().zip(&adj) {
                acc += k * block * kd;
            }
            if r1 != r2 {
                out.view_mut((r2 * dout, r1 * dout), (dout, dout)).copy_from(&acc.adjoint());
            }
            out.view_mut((r1 * dout, r2 * dout), (dout, dout)).copy_from(&acc);
        }
    }
    out
}

/// Half the trace norm of a Hermitian matrix.
pub fn trace_norm_half(m: &CMatrix) -> f64 {
    let s: f64 = hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum();
    (0.5 * s).clamp(0.0, 1.0)
}
