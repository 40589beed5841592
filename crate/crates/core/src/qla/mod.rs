//! Dense multipartite states, channels and isometries.

mod channel;
pub mod io;
mod layout;
pub mod linalg;
pub mod random;
mod state;

pub use channel::{trace_preservation_residual, Isometry, QuantumChannel};
pub use layout::{copy_label, copy_labels, Subsystem, SystemLayout};
pub use linalg::{CMatrix, CVector, C64};
pub use state::{trace_norm_half, DensityOperator, Eigenpair, PureState};

use crate::error::Result;

pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    a.tensor(b)
}

pub fn partial_trace<S: AsRef<str>>(rho: &DensityOperator, keep: &[S]) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

pub fn spectral_decomposition(rho: &DensityOperator) -> Result<Vec<Eigenpair>> {
    rho.spectral_decomposition()
}

pub fn purify(rho: &DensityOperator, ref_label: &str) -> Result<PureState> {
    rho.purify(ref_label)
}

pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.trace_distance(sigma)
}

pub fn apply_channel<S: AsRef<str>>(ch: &QuantumChannel, rho: &DensityOperator, on: &[S]) -> Result<DensityOperator> {
    rho.apply_channel(ch, on)
}

pub fn apply_isometry<S: AsRef<str>>(v: &Isometry, psi: &PureState, on: &[S], out: &SystemLayout) -> Result<PureState> {
    psi.apply_isometry(v, on, out)
}
