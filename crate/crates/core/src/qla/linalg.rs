//! Dense Hermitian helpers shared by the state types.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Max-entry norm of `m - m^dag`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Max-entry distance between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Residual of `m^dag m - I`.
pub fn isometry_residual(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    max_abs_diff(&g, &CMatrix::identity(g.nrows(), g.ncols()))
}

/// Multiplies `v` by a phase so that its largest-magnitude entry (first one on ties)
/// is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("non-empty vector");
    let phase = v[pivot] / v[pivot].norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
}

/// Deterministic orthonormal basis of the span of `block`'s columns: canonical basis
/// vectors are projected onto the span and orthonormalized greedily, taking at each
/// step the first canonical vector whose residual is (within rounding) the largest.
pub fn canonical_basis(block: &CMatrix) -> Vec<CVector> {
    let d = block.nrows();
    let k = block.ncols();
    let projector = block * block.adjoint();
    let mut accepted: Vec<CVector> = Vec::with_capacity(k);
    let mut used = vec![false; d];
    while accepted.len() < k {
        let mut candidates: Vec<(usize, CVector, f64)> = Vec::with_capacity(d);
        for i in 0..d {
            if used[i] {
                continue;
            }
            let mut v: CVector = projector.column(i).into_owned();
            for q in &accepted {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
            let norm = v.norm();
            candidates.push((i, v, norm));
        }
        let best = candidates.iter().map(|c| c.2).fold(0.0, f64::max);
        let (idx, v, norm) = candidates
            .into_iter()
            .find(|c| c.2 >= best * (1.0 - 1e-8))
            .expect("at least one candidate");
        used[idx] = true;
        let mut v = v.unscale(norm);
        fix_phase(&mut v);
        accepted.push(v);
    }
    accepted
}

/// Spectral decomposition of a Hermitian matrix: eigenvalues descending, eigenvectors
/// canonicalized inside degenerate blocks and phase-fixed.
pub fn hermitian_eigen(m: &CMatrix, tol: &Tolerances) -> Result<Vec<(f64, CVector)>> {
    let residual = hermitian_residual(m);
    if residual > tol.hermitian {
        return Err(Error::NotHermitian { residual });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (eig.eigenvalues[order[end - 1]] - eig.eigenvalues[order[end]]).abs()
                <= tol.degeneracy
        {
            end += 1;
        }
        let block_vals: Vec<f64> = order[start..end].iter().map(|&i| eig.eigenvalues[i]).collect();
        if end - start == 1 {
            let mut v: CVector = eig.eigenvectors.column(order[start]).into_owned();
            let norm = v.norm();
            v.unscale_mut(norm);
            fix_phase(&mut v);
            out.push((block_vals[0], v));
        } else {
            let cols: Vec<CVector> = order[start..end]
                .iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect();
            let block = CMatrix::from_columns(&cols);
            // re-orthonormalize the block before projecting
            let q = block.qr().q();
            let basis = canonical_basis(&q);
            let mean = block_vals.iter().sum::<f64>() / block_vals.len() as f64;
            for (v, _) in basis.into_iter().zip(&block_vals) {
                out.push((mean, v));
            }
        }
        start = end;
    }
    Ok(out)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Rows/cols reindexed: `out[(r, c)] = m[(map[r], map[c])]`.
pub fn permute_matrix(m: &CMatrix, map: &[usize]) -> CMatrix {
    let n = map.len();
    CMatrix::from_fn(n, n, |r, c| m[(map[r], map[c])])
}

pub fn permute_vector(v: &CVector, map: &[usize]) -> CVector {
    CVector::from_fn(map.len(), |r, _| v[map[r]])
}

/// Inverse of a permutation map.
pub fn invert_map(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (new, &old) in map.iter().enumerate() {
        inv[old] = new;
    }
    inv
}
