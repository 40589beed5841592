use super::report::{Network, RateBoundReport};
use crate::entropy::{conditional_entropy, conditional_mutual_information, mutual_information, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::qla::{DensityOperator, PureState};
use crate::tolerance::TOL;

fn require_labels(rho_labels: &[&str], needed: &[&str]) -> Result<()> {
    for l in needed {
        if !rho_labels.contains(l) {
            return Err(Error::UnknownLabel(l.to_string()));
        }
    }
    Ok(())
}

/// Cascade region of a target `omega_ABC`: `Q1 >= I(BC;R)/2`, `Q1+E1 >= S(BC)`,
/// `Q2 >= I(C;RA)/2`, `Q2+E2 >= S(C)`, with `R` a minimal purifying reference.
pub fn cascade_bounds(omega: &DensityOperator) -> Result<RateBoundReport> {
    let labels = omega.layout().labels();
    if labels.len() != 3 {
        return Err(Error::Labeling(format!("cascade target must live on A, B, C; got {labels:?}")));
    }
    require_labels(&labels, &["A", "B", "C"])?;
    let omega = omega.reorder(&["A", "B", "C"])?;
    cascade_bounds_from_purification(&omega.purify("R")?)
}

/// Cascade bounds evaluated on a given purification `|omega>_{ABCR}`.
pub fn cascade_bounds_from_purification(psi: &PureState) -> Result<RateBoundReport> {
    let labels = psi.layout().labels();
    require_labels(&labels, &["A", "B", "C", "R"])?;
    let s = |keep: &[&str]| -> Result<f64> { Ok(von_neumann_entropy(&psi.partial_trace(keep)?)) };
    let s_bc = s(&["B", "C"])?;
    let s_c = s(&["C"])?;
    // on a pure state S(BCR) = S(A) and S(CRA) = S(B)
    let i_bc_r = s_bc + s(&["R"])? - s(&["A"])?;
    let i_c_ra = s_c + s(&["R", "A"])? - s(&["B"])?;
    RateBoundReport::new(
        Network::Cascade,
        vec![
            ("Q1", "I(BC;R)/2", 0.5 * i_bc_r),
            ("Q1+E1", "S(BC)", s_bc),
            ("Q2", "I(C;RA)/2", 0.5 * i_c_ra),
            ("Q2+E2", "S(C)", s_c),
        ],
        format!("reference R of dimension {}", psi.layout().dim_of("R")?),
    )
}

/// State redistribution rates for a pure `psi` on `A, G, B, R`: `Q >= I(B;R|G)/2` and
/// `Q+E >= S(B|G)`. A missing `G` is treated as trivial.
pub fn state_redistribution_bounds(psi: &DensityOperator) -> Result<RateBoundReport> {
    let residual = 1.0 - psi.purity();
    if residual.abs() > TOL.cptp {
        return Err(Error::NotPure { residual });
    }
    let labels = psi.layout().labels();
    require_labels(&labels, &["B", "R"])?;
    let g: Vec<&str> = if labels.contains(&"G") { vec!["G"] } else { Vec::new() };
    let q = if g.is_empty() {
        mutual_information(psi, &["B"], &["R"])?
    } else {
        conditional_mutual_information(psi, &["B"], &["R"], &g)?
    };
    let qe = conditional_entropy(psi, &["B"], &g)?;
    RateBoundReport::new(
        Network::StateRedistribution,
        vec![("Q", "I(B;R|G)/2", 0.5 * q), ("Q+E", "S(B|G)", qe)],
        if g.is_empty() { "G trivial" } else { "" },
    )
}
