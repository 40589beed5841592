use serde::{Deserialize, Serialize};

use super::cq::ClassicalQuantumState;
use super::report::{Network, RateBoundReport};
use crate::entropy::conditional_entropy;
use crate::error::{Error, Result};
use crate::qla::DensityOperator;

/// Outcome of the product test `omega_XYA = omega_XY (x) omega_A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub residual: f64,
}

/// Threshold on the product-test residual.
pub const FEASIBILITY_THRESHOLD: f64 = 1e-8;

fn check_labels(omega: &ClassicalQuantumState) -> Result<()> {
    for l in ["X", "Y"] {
        if !omega.classical_layout().contains(l) {
            return Err(Error::UnknownLabel(l.to_string()));
        }
    }
    for l in ["B", "C"] {
        if !omega.quantum_layout().contains(l) {
            return Err(Error::UnknownLabel(l.to_string()));
        }
    }
    Ok(())
}

/// Trace distance between `omega_XYA` and `omega_XY (x) omega_A`, computed blockwise as
/// `sum_t p(t) T(sigma_A^(t), omega_A)`. A missing `A` is trivial and always feasible.
pub fn broadcast_feasibility(omega: &ClassicalQuantumState) -> Result<Feasibility> {
    check_labels(omega)?;
    if !omega.quantum_layout().contains("A") {
        return Ok(Feasibility { feasible: true, residual: 0.0 });
    }
    let on_a = omega.quantum_marginal(&["A"])?;
    let terms: Vec<(f64, &DensityOperator)> = on_a.probs().iter().copied().zip(on_a.states()).collect();
    let avg = DensityOperator::mixture(&terms)?;
    let mut residual = 0.0;
    for (p, s) in &terms {
        if *p > 0.0 {
            residual += p * s.trace_distance(&avg)?;
        }
    }
    Ok(Feasibility { feasible: residual <= FEASIBILITY_THRESHOLD, residual })
}

/// Broadcast region: `Q1 >= S(B|X)`, `Q2 >= S(C|Y)` on the flattened cq state.
pub fn broadcast_bounds(omega: &ClassicalQuantumState) -> Result<RateBoundReport> {
    let f = broadcast_feasibility(omega)?;
    if !f.feasible {
        return Err(Error::Infeasible {
            what: "omega_XYA is not a product omega_XY (x) omega_A".into(),
            residual: f.residual,
        });
    }
    let reduced = omega.quantum_marginal(&["B", "C"])?;
    let flat = reduced.flatten()?;
    let q1 = conditional_entropy(&flat, &["B"], &["X"])?;
    let q2 = conditional_entropy(&flat, &["C"], &["Y"])?;
    RateBoundReport::new(
        Network::Broadcast,
        vec![("Q1", "S(B|X)", q1), ("Q2", "S(C|Y)", q2)],
        format!("feasibility residual {:e}", f.residual),
    )
}
