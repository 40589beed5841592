//! Haar-random and Ginibre-random test objects.

use rand::Rng;
use rand_distr::StandardNormal;

use super::channel::{Isometry, QuantumChannel};
use super::layout::SystemLayout;
use super::linalg::{c, CMatrix, CVector};
use super::state::{DensityOperator, PureState};
use crate::error::{Error, Result};

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar unitary via QR of a Ginibre matrix with the phases of `R` removed.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_isometry<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Result<Isometry> {
    if d_out < d_in {
        return Err(Error::DimensionMismatch("isometry needs d_out >= d_in".into()));
    }
    let u = random_unitary(d_out, rng);
    Isometry::new(u.columns(0, d_in).into_owned())
}

pub fn random_pure_state<R: Rng + ?Sized>(layout: SystemLayout, rng: &mut R) -> PureState {
    let d = layout.total_dim();
    let g = ginibre(d, 1, rng);
    let v = CVector::from_column_slice(g.as_slice());
    PureState::normalized(layout, v).expect("Gaussian vector is almost surely non-zero")
}

/// Random state of rank at most `rank` (Ginibre ensemble).
pub fn random_density<R: Rng + ?Sized>(layout: SystemLayout, rank: usize, rng: &mut R) -> DensityOperator {
    let d = layout.total_dim();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    DensityOperator::new(layout, m.unscale(t)).expect("Ginibre state is valid")
}

/// Random channel with `num_kraus` operators from a Haar Stinespring isometry.
pub fn random_channel<R: Rng + ?Sized>(
    input: SystemLayout,
    output: SystemLayout,
    num_kraus: usize,
    rng: &mut R,
) -> Result<QuantumChannel> {
    let (din, dout) = (input.total_dim(), output.total_dim());
    let k = num_kraus.max(1).max(din.div_ceil(dout));
    let v = random_isometry(din, dout * k, rng)?;
    let kraus = (0..k).map(|i| v.matrix().rows(i * dout, dout).into_owned()).collect();
    QuantumChannel::new(input, output, kraus)
}
