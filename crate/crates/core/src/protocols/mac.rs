use std::time::Instant;

use nalgebra::Matrix4;

use super::schumacher::{schumacher_encode, SchumacherCode};
use super::{summarize, tensor_copies, SeedOutcome, Side, SimulationReport};
use crate::error::{Error, Result};
use crate::qla::{copy_label, DensityOperator, PureState, SystemLayout};
use crate::regions::mac_decompose;

/// Largest `(dA dB dC1 dC2)^n` simulated with explicit matrices.
pub const MAC_DENSE_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacMethod {
    /// Structured formula when `V` is unitary, dense matrices otherwise.
    Auto,
    Structured,
    Dense,
}

/// Trace distance between `|v><v|` and one compression round trip of it, where `w` is
/// the codeword weight: `(sqrt((1-w)(1+3w)) + 1 - w) / 2`.
pub fn mac_distance_closed_form(w: f64) -> f64 {
    let w = w.clamp(0.0, 1.0);
    0.5 * (((1.0 - w) * (1.0 + 3.0 * w)).sqrt() + (1.0 - w))
}

/// Round trip of a purified source, restricted to `span(v, P v)`: `P v v^dag P` and `v v^dag`
/// in the basis `{P v / |P v|, its orthogonal complement}`.
fn span_blocks(w: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let s = (w * (1.0 - w)).max(0.0).sqrt();
    ([[w, 0.0], [0.0, 0.0]], [[w, s], [s, 1.0 - w]])
}

fn kron2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| a[i / 2][j / 2] * b[i % 2][j % 2])
}

/// Distance for two independent pipelines with codeword weights `w1`, `w2`. The junk
/// parts are orthogonal to both spans, so they add `1 - w1 w2` of positive trace.
fn structured_distance(w1: f64, w2: f64) -> f64 {
    let (p1, f1) = span_blocks(w1);
    let (p2, f2) = span_blocks(w2);
    let diff = kron2(&p1, &p2) - kron2(&f1, &f2);
    let norm: f64 = diff.symmetric_eigen().eigenvalues.iter().map(|l| l.abs()).sum();
    (0.5 * (norm + 1.0 - w1 * w2)).clamp(0.0, 1.0)
}

fn dense_distance(
    omega: &PureState,
    phi: &PureState,
    chi: &PureState,
    v: &crate::qla::Isometry,
    codes: (&SchumacherCode, &SchumacherCode),
    n: usize,
) -> Result<f64> {
    let dim = ((phi.dim() * chi.dim()) as f64).powi(n as i32);
    if dim > MAC_DENSE_LIMIT as f64 {
        return Err(Error::DimensionGuard { dim: dim as usize, limit: MAC_DENSE_LIMIT });
    }
    let phi_d = phi.to_density();
    let chi_d = chi.to_density();
    let mut state = tensor_copies(&vec![&phi_d; n])?.tensor(&tensor_copies(&vec![&chi_d; n])?)?;
    for (code, label, message) in [(codes.0, "C1", "M1"), (codes.1, "C2", "M2")] {
        let on: Vec<String> = (0..n).map(|i| copy_label(label, i)).collect();
        let pipeline = code.compressor(message)?.then(&code.decompressor(message)?)?;
        state = state.apply_channel(&pipeline, &on)?;
    }
    let dc = omega.layout().dim_of("C")?;
    let (d1, d2) = (phi.layout().dim_of("C1")?, chi.layout().dim_of("C2")?);
    for i in 0..n {
        let (c1, c2, c) = (copy_label("C1", i), copy_label("C2", i), copy_label("C", i));
        let undo = v.adjoint_channel(
            SystemLayout::from_pairs(&[(c1.as_str(), d1), (c2.as_str(), d2)])?,
            SystemLayout::from_pairs(&[(c.as_str(), dc)])?,
        )?;
        state = state.apply_channel(&undo, &[c1, c2])?;
    }
    let omega_abc = omega.reorder(&["A", "B", "C"])?.to_density();
    let target = tensor_copies(&vec![&omega_abc; n])?;
    let labels = target.layout().labels();
    state.reorder(&labels)?.trace_distance(&target)
}

/// Runs the MAC protocol once: `omega` is split as `phi_{A C1} (x) chi_{B C2}`, Alice and
/// Bob compress `C1^n` and `C2^n` at rates `Q1`, `Q2`, and Charlie applies `(V^dag)^{(x)n}`
/// to the decompressed systems. The reported error is the exact trace distance to
/// `omega^{(x)n}`; there are no codebook seeds, so one outcome (seed 0) is reported.
pub fn simulate_mac(omega: &PureState, n: usize, q1: f64, q2: f64, delta: f64) -> Result<SimulationReport> {
    simulate_mac_with(omega, n, q1, q2, delta, MacMethod::Auto)
}

pub fn simulate_mac_with(
    omega: &PureState,
    n: usize,
    q1: f64,
    q2: f64,
    delta: f64,
    method: MacMethod,
) -> Result<SimulationReport> {
    let start = Instant::now();
    let dec = mac_decompose(omega)?;
    let rho1: DensityOperator = dec.phi.partial_trace(&["C1"])?;
    let rho2: DensityOperator = dec.chi.partial_trace(&["C2"])?;
    let code1 = schumacher_encode(&rho1, n, q1, delta)?;
    let code2 = schumacher_encode(&rho2, n, q2, delta)?;
    let unitary = dec.v.input_dim() == dec.v.output_dim();
    let structured = match method {
        MacMethod::Auto => unitary,
        MacMethod::Structured if !unitary => {
            return Err(Error::InvalidParameter("structured MAC distance needs a unitary V".into()))
        }
        MacMethod::Structured => true,
        MacMethod::Dense => false,
    };
    let distance = if structured {
        structured_distance(code1.typical_weight(), code2.typical_weight())
    } else {
        dense_distance(omega, &dec.phi, &dec.chi, &dec.v, (&code1, &code2), n)?
    };
    let outcome = SeedOutcome {
        seed: 0,
        error_bob: None,
        error_charlie: None,
        error_joint: distance,
        error_joint_exact: Some(distance),
    };
    Ok(SimulationReport {
        protocol: "mac".into(),
        method: if structured { "structured" } else { "dense" }.into(),
        n,
        q1,
        q2,
        delta,
        seeds: vec![0],
        outcomes: vec![outcome],
        summary: vec![summarize(Side::Joint, &[distance])],
        wall_time_secs: Some(start.elapsed().as_secs_f64()),
    })
}
