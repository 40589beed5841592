use super::layout::SystemLayout;
use super::linalg::{hermitian_eigen, isometry_residual, max_abs_diff, real, CMatrix};
use super::state::DensityOperator;
use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// CPTP map in operator-sum form. Kraus operators are `output_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    input_layout: SystemLayout,
    output_layout: SystemLayout,
    kraus: Vec<CMatrix>,
}

/// Matrix with `V^dag V = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
}

/// Max-entry residual of `sum_k K_k^dag K_k - 1`.
pub fn trace_preservation_residual(kraus: &[CMatrix], input_dim: usize) -> f64 {
    let mut sum = CMatrix::zeros(input_dim, input_dim);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    max_abs_diff(&sum, &CMatrix::identity(input_dim, input_dim))
}

impl QuantumChannel {
    pub fn new(input_layout: SystemLayout, output_layout: SystemLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("channel needs at least one Kraus operator".into()));
        }
        let (din, dout) = (input_layout.total_dim(), output_layout.total_dim());
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} is {}x{}, expected {dout}x{din}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let residual = trace_preservation_residual(&kraus, din);
        if residual > TOL.cptp {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { input_layout, output_layout, kraus })
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Self { input_layout: layout.clone(), output_layout: layout, kraus: vec![CMatrix::identity(d, d)] }
    }

    /// Discards the input and prepares `state`.
    pub fn replacement(input_layout: SystemLayout, state: &DensityOperator) -> Result<Self> {
        let din = input_layout.total_dim();
        let mut kraus = Vec::new();
        for e in state.spectral_decomposition()? {
            if e.value <= TOL.rank_cutoff {
                continue;
            }
            let col = e.vector.amplitudes().scale(e.value.sqrt());
            for j in 0..din {
                let mut k = CMatrix::zeros(state.dim(), din);
                k.set_column(j, &col);
                kraus.push(k);
            }
        }
        let norm: f64 = state.eigenvalues().iter().filter(|&&v| v > TOL.rank_cutoff).sum();
        for k in &mut kraus {
            *k = k.unscale(norm.sqrt());
        }
        Self::new(input_layout, state.layout().clone(), kraus)
    }

    pub fn input_layout(&self) -> &SystemLayout {
        &self.input_layout
    }

    pub fn output_layout(&self) -> &SystemLayout {
        &self.output_layout
    }

    pub fn kraus_operators(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn tp_residual(&self) -> f64 {
        trace_preservation_residual(&self.kraus, self.input_layout.total_dim())
    }

    /// Applies the channel to a state living exactly on its input layout.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        rho.apply_channel(self, &rho.layout().labels())
    }

    /// `other` after `self`: Kraus operators `L_j K_i`.
    pub fn then(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.output_layout.dims() != other.input_layout.dims() {
            return Err(Error::DimensionMismatch("composed channels do not line up".into()));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for l in &other.kraus {
            for k in &self.kraus {
                kraus.push(l * k);
            }
        }
        Ok(Self { input_layout: self.input_layout.clone(), output_layout: other.output_layout.clone(), kraus })
    }

    /// Same operators with new (dimension-compatible) layouts.
    pub fn with_layouts(&self, input_layout: SystemLayout, output_layout: SystemLayout) -> Result<Self> {
        if input_layout.total_dim() != self.input_layout.total_dim()
            || output_layout.total_dim() != self.output_layout.total_dim()
        {
            return Err(Error::DimensionMismatch("relabeled channel changes dimensions".into()));
        }
        Ok(Self { input_layout, output_layout, kraus: self.kraus.clone() })
    }
}

impl Isometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() < matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "isometry must have d_out >= d_in, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = isometry_residual(&matrix);
        if residual > TOL.isometry {
            return Err(Error::NotIsometry { residual });
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: CMatrix::identity(d, d) }
    }

    /// The first `d_in` columns of the `d_out`-dimensional identity.
    pub fn embedding(d_in: usize, d_out: usize) -> Result<Self> {
        Self::new(CMatrix::from_fn(d_out, d_in, |i, j| real(if i == j { 1.0 } else { 0.0 })))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn residual(&self) -> f64 {
        isometry_residual(&self.matrix)
    }

    /// The inverse on a square isometry.
    pub fn inverse(&self) -> Result<Isometry> {
        if !self.matrix.is_square() {
            return Err(Error::DimensionMismatch("only a square isometry has an isometric inverse".into()));
        }
        Ok(Self { matrix: self.matrix.adjoint() })
    }

    pub fn as_channel(&self, input: SystemLayout, output: SystemLayout) -> Result<QuantumChannel> {
        if input.total_dim() != self.input_dim() || output.total_dim() != self.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "isometry is {}x{}, layouts give {}x{}",
                self.output_dim(),
                self.input_dim(),
                output.total_dim(),
                input.total_dim()
            )));
        }
        Ok(QuantumChannel { input_layout: input, output_layout: output, kraus: vec![self.matrix.clone()] })
    }

    /// `rho -> V^dag rho V + sum_k <g_k|rho|g_k> |0><0|` with `{g_k}` the canonical basis of
    /// the complement of the range of `V`. Undoes `V` on its range and is CPTP everywhere.
    pub fn adjoint_channel(&self, input: SystemLayout, output: SystemLayout) -> Result<QuantumChannel> {
        if input.total_dim() != self.output_dim() || output.total_dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "adjoint of a {}x{} isometry, layouts give {}x{}",
                self.output_dim(),
                self.input_dim(),
                output.total_dim(),
                input.total_dim()
            )));
        }
        let (dout, din) = (self.output_dim(), self.input_dim());
        let mut kraus = vec![self.matrix.adjoint()];
        if dout > din {
            let complement = CMatrix::identity(dout, dout) - &self.matrix * self.matrix.adjoint();
            for (value, g) in hermitian_eigen(&complement, &TOL)? {
                if value > 0.5 {
                    let mut k = CMatrix::zeros(din, dout);
                    k.row_mut(0).copy_from(&g.adjoint());
                    kraus.push(k);
                }
            }
        }
        QuantumChannel::new(input, output, kraus)
    }
}
