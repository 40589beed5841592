use super::report::{Network, RateBoundReport};
use crate::entropy::von_neumann_entropy;
use crate::error::{Error, Result};
use crate::qla::linalg::{canonical_basis, CMatrix, CVector};
use crate::qla::{Isometry, PureState, SystemLayout};
use crate::tolerance::TOL;

/// `(1 (x) V)|omega_ABC> = |phi_{A C1}> (x) |chi_{B C2}>`.
#[derive(Debug, Clone)]
pub struct IsometryDecomposition {
    pub v: Isometry,
    pub phi: PureState,
    pub chi: PureState,
    /// `|| (1 (x) V)|omega> - |phi>|chi> ||`.
    pub residual: f64,
    /// `T(omega_AB, omega_A (x) omega_B)` of the input.
    pub product_residual: f64,
}

impl IsometryDecomposition {
    /// Layout of `C1 C2`, the output of `V`.
    pub fn output_layout(&self) -> SystemLayout {
        let c1 = self.phi.layout().dim_of("C1").unwrap_or(1);
        let c2 = self.chi.layout().dim_of("C2").unwrap_or(1);
        SystemLayout::from_pairs(&[("C1", c1), ("C2", c2)]).expect("C1 C2 fit the guard")
    }
}

/// Threshold on `T(omega_AB, omega_A (x) omega_B)` below which a decomposition exists.
pub const PRODUCT_THRESHOLD: f64 = 1e-8;

/// Canonical purification `sum_i sqrt(l_i) |v_i>|i>` of a marginal, on `(sys, anc)`,
/// with ancilla dimension `anc_dim >= rank`.
fn canonical_purification(
    spectrum: &[(f64, CVector)],
    sys: &str,
    sys_dim: usize,
    anc: &str,
    anc_dim: usize,
) -> Result<PureState> {
    let mut v = CVector::zeros(sys_dim * anc_dim);
    for (i, (l, vec)) in spectrum.iter().enumerate() {
        let w = l.sqrt();
        for k in 0..sys_dim {
            v[k * anc_dim + i] = vec[k] * w;
        }
    }
    PureState::normalized(SystemLayout::from_pairs(&[(sys, sys_dim), (anc, anc_dim)])?, v)
}

/// Finds `V: C -> C1 C2` splitting a pure `omega_ABC` into `phi_{A C1} (x) chi_{B C2}`.
///
/// `C1` has dimension `rank(omega_A)`; `C2` has dimension `rank(omega_B)`, raised when
/// needed so that `C1 C2` can hold all of `C`. The vectors `(<a_i b_j| (x) 1)|omega>`
/// are aligned with `|i j>` through the polar part of their matrix; the complement of
/// their span is sent to the unused `C1 C2` basis vectors in order.
pub fn mac_decompose(omega: &PureState) -> Result<IsometryDecomposition> {
    let labels = omega.layout().labels();
    if labels.len() != 3 || !["A", "B", "C"].iter().all(|l| labels.contains(l)) {
        return Err(Error::Labeling(format!("MAC target must live on A, B, C; got {labels:?}")));
    }
    let omega = omega.reorder(&["A", "B", "C"])?;
    let dims = omega.layout().dims();
    let (da, db, dc) = (dims[0], dims[1], dims[2]);

    let rho_ab = omega.partial_trace(&["A", "B"])?;
    let rho_a = rho_ab.partial_trace(&["A"])?;
    let rho_b = rho_ab.partial_trace(&["B"])?;
    let product_residual = rho_ab.trace_distance(&rho_a.tensor(&rho_b)?)?;
    if product_residual > PRODUCT_THRESHOLD {
        return Err(Error::Infeasible {
            what: "omega_AB is correlated, so no isometry on C splits omega".into(),
            residual: product_residual,
        });
    }

    let support = |rho: &crate::qla::DensityOperator| -> Result<Vec<(f64, CVector)>> {
        Ok(rho
            .spectral_decomposition()?
            .into_iter()
            .filter(|e| e.value > TOL.rank_cutoff)
            .map(|e| (e.value, e.vector.amplitudes().clone()))
            .collect())
    };
    let alpha = support(&rho_a)?;
    let beta = support(&rho_b)?;
    let (ra, rb) = (alpha.len(), beta.len());
    let c1 = ra;
    let c2 = rb.max(dc.div_ceil(ra));

    let phi = canonical_purification(&alpha, "A", da, "C1", c1)?;
    let chi = canonical_purification(&beta, "B", db, "C2", c2)?;

    // columns (<a_i b_j| (x) 1)|omega> / sqrt(alpha_i beta_j), ordered as |i j>
    let amp = omega.amplitudes();
    let mut cols = CMatrix::zeros(dc, ra * rb);
    for (i, (la, va)) in alpha.iter().enumerate() {
        for (j, (lb, vb)) in beta.iter().enumerate() {
            let scale = (la * lb).sqrt();
            for k in 0..dc {
                let mut acc = crate::qla::C64::new(0.0, 0.0);
                for x in 0..da {
                    for y in 0..db {
                        acc += va[x].conj() * vb[y].conj() * amp[(x * db + y) * dc + k];
                    }
                }
                cols[(k, i * rb + j)] = acc / scale;
            }
        }
    }
    if ra * rb > dc {
        return Err(Error::Numerical(format!("support of omega_AB ({}) exceeds dim C ({dc})", ra * rb)));
    }
    let svd = cols.svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let polar = u * vt; // dc x (ra rb), orthonormal columns

    // V maps polar column (i, j) to |i j> and the complement to unused |i j'>, j' >= rb
    let mut v = CMatrix::zeros(c1 * c2, dc);
    for i in 0..ra {
        for j in 0..rb {
            let row = i * c2 + j;
            let w = polar.column(i * rb + j);
            for k in 0..dc {
                v[(row, k)] = w[k].conj();
            }
        }
    }
    let leftover = dc - ra * rb;
    if leftover > 0 {
        let proj = CMatrix::identity(dc, dc) - &polar * polar.adjoint();
        let eig = proj.clone().symmetric_eigen();
        let mut idx: Vec<usize> = (0..dc).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let block = CMatrix::from_columns(
            &idx[..leftover].iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>(),
        );
        let complement = canonical_basis(&block.qr().q());
        let free_rows = (0..c1 * c2).filter(|r| r % c2 >= rb);
        for (row, w) in free_rows.zip(&complement) {
            for k in 0..dc {
                v[(row, k)] = w[k].conj();
            }
        }
    }
    let v = Isometry::new(v)?;

    let out_layout = SystemLayout::from_pairs(&[("C1", c1), ("C2", c2)])?;
    let mapped = omega.apply_isometry(&v, &["C"], &out_layout)?;
    let target = phi.tensor(&chi)?.reorder(&["A", "B", "C1", "C2"])?;
    let residual = mapped.distance(&target)?;
    Ok(IsometryDecomposition { v, phi, chi, residual, product_residual })
}

/// Multiple-access region: `Q1 >= S(C1)`, `Q2 >= S(C2)` for the split of `omega`.
pub fn mac_bounds(omega: &PureState) -> Result<RateBoundReport> {
    let dec = mac_decompose(omega)?;
    let s_c1 = von_neumann_entropy(&dec.phi.partial_trace(&["C1"])?);
    let s_c2 = von_neumann_entropy(&dec.chi.partial_trace(&["C2"])?);
    let s_a = von_neumann_entropy(&omega.partial_trace(&["A"])?);
    let s_b = von_neumann_entropy(&omega.partial_trace(&["B"])?);
    let gap = (s_c1 - s_a).abs().max((s_c2 - s_b).abs());
    if gap > 1e-8 {
        return Err(Error::Numerical(format!("S(C1) = S(A), S(C2) = S(B) violated by {gap:e}")));
    }
    RateBoundReport::new(
        Network::Mac,
        vec![("Q1", "S(C1)", s_c1), ("Q2", "S(C2)", s_c2)],
        format!("decomposition residual {:e}", dec.residual),
    )
}
