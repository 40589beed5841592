#![allow(dead_code)]

use qcoord::qla::linalg::{c, real, CMatrix, CVector};
use qcoord::qla::{DensityOperator, PureState, SystemLayout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn layout(pairs: &[(&str, usize)]) -> SystemLayout {
    SystemLayout::from_pairs(pairs).unwrap()
}

pub fn pure(pairs: &[(&str, usize)], amps: &[f64]) -> PureState {
    PureState::normalized(layout(pairs), CVector::from_iterator(amps.len(), amps.iter().map(|&a| real(a)))).unwrap()
}

pub fn ghz() -> PureState {
    let mut a = vec![0.0; 8];
    a[0] = 1.0;
    a[7] = 1.0;
    pure(&[("A", 2), ("B", 2), ("C", 2)], &a)
}

pub fn bell(x: &str, y: &str) -> PureState {
    pure(&[(x, 2), (y, 2)], &[1.0, 0.0, 0.0, 1.0])
}

pub fn plus(label: &str) -> PureState {
    pure(&[(label, 2)], &[1.0, 1.0])
}

pub fn ket(label: &str, dim: usize, index: usize) -> PureState {
    PureState::basis(layout(&[(label, dim)]), index).unwrap()
}

pub fn diag(label: &str, probs: &[f64]) -> DensityOperator {
    DensityOperator::diagonal(layout(&[(label, probs.len())]), probs).unwrap()
}

pub fn mat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &entries.iter().map(|&(r, i)| c(r, i)).collect::<Vec<_>>())
}

/// Kronecker product by explicit index arithmetic.
pub fn kron_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Hadamard-rotated `diag(p, 1-p)`.
pub fn rotated(label: &str, p: f64) -> DensityOperator {
    let h = mat(2, 2, &[(H, 0.0), (H, 0.0), (H, 0.0), (-H, 0.0)]);
    let d = mat(2, 2, &[(p, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0 - p, 0.0)]);
    DensityOperator::new(layout(&[(label, 2)]), &h * d * &h).unwrap()
}

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}
