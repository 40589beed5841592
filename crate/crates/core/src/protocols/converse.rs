use serde::{Deserialize, Serialize};

use super::tensor_copies;
use crate::entropy::{conditional_mutual_information, entropy_of, mutual_information};
use crate::error::{Error, Result};
use crate::qla::linalg::CMatrix;
use crate::qla::{copy_label, copy_labels, DensityOperator, PureState, QuantumChannel, SystemLayout};
use crate::regions::mac_decompose;

/// Most negative slack an audited inequality may show and still pass.
pub const AUDIT_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `I(X;Y) <= 2 log dim X`.
    DimensionBound,
    DataProcessing,
    /// An identity; the slack is `-|lhs - rhs|`.
    Equality,
    /// The asymptotic rate bound itself. Finite codes with nonzero error may miss it, so
    /// it is reported but does not affect `pass`.
    Target,
}

/// `lhs >= rhs` (or `lhs = rhs`), evaluated on a code's actual states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub kind: InequalityKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityCheck {
    fn new(name: &str, kind: InequalityKind, lhs: f64, rhs: f64) -> Self {
        let slack = match kind {
            InequalityKind::Equality => -(lhs - rhs).abs(),
            _ => lhs - rhs,
        };
        Self { name: name.into(), kind, lhs, rhs, slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseAuditReport {
    pub network: String,
    pub n: usize,
    pub checks: Vec<InequalityCheck>,
    /// `1/2 || rho_hat - omega^{(x)n} ||_1` of the audited code.
    pub simulation_error: f64,
    /// Every non-target slack is at least `-AUDIT_SLACK`.
    pub pass: bool,
}

impl ConverseAuditReport {
    fn new(network: &str, n: usize, checks: Vec<InequalityCheck>, simulation_error: f64) -> Self {
        let pass = checks
            .iter()
            .filter(|c| c.kind != InequalityKind::Target)
            .all(|c| c.slack >= -AUDIT_SLACK);
        Self { network: network.into(), n, checks, simulation_error, pass }
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// A cascade code at blocklength `n`.
///
/// * `alice`: `Abar_1..Abar_n, TA -> A_1..A_n, M1`, where `Abar` is Alice's local copy
///   of `ABC`;
/// * `bob`: `M1, TB1, TB2 -> B_1..B_n, M2`;
/// * `charlie`: `M2, TC -> C_1..C_n`;
/// * `psi` on `(TA, TB1)` and `theta` on `(TB2, TC)` are the shared entangled states.
///
/// Channels are matched to systems by position in their input layouts, in the order above.
#[derive(Debug, Clone)]
pub struct CascadeCode {
    pub n: usize,
    pub alice: QuantumChannel,
    pub bob: QuantumChannel,
    pub charlie: QuantumChannel,
    pub psi: PureState,
    pub theta: PureState,
}

/// A MAC code: `alice` is `A_1..A_n -> A_1..A_n, M1`, `bob` is `B_1..B_n -> B_1..B_n, M2`
/// and `charlie` is `M1, M2 -> C_1..C_n`.
#[derive(Debug, Clone)]
pub struct MacCode {
    pub n: usize,
    pub alice: QuantumChannel,
    pub bob: QuantumChannel,
    pub charlie: QuantumChannel,
}

fn labels_of(groups: &[&str], n: usize) -> Vec<String> {
    groups.iter().flat_map(|g| copy_labels(g, n)).collect()
}

fn log_dim(layout: &SystemLayout, label: &str) -> Result<f64> {
    Ok((layout.dim_of(label)? as f64).log2())
}

fn ensure_labels(ch: &QuantumChannel, role: &str, inputs: &[String], outputs: &[String]) -> Result<()> {
    let got_in: Vec<&str> = ch.input_layout().labels();
    let got_out: Vec<&str> = ch.output_layout().labels();
    if got_in != inputs.iter().map(String::as_str).collect::<Vec<_>>()
        || got_out != outputs.iter().map(String::as_str).collect::<Vec<_>>()
    {
        return Err(Error::DimensionMismatch(format!(
            "{role} must map {inputs:?} -> {outputs:?}, got {got_in:?} -> {got_out:?}"
        )));
    }
    Ok(())
}

/// Runs the code on `omega_{R Abar}^{(x)n} (x) Psi (x) Theta`, with `R` the minimal
/// purification of `omega_ABC`, and evaluates the dimension bounds and data-processing
/// steps of both rate chains on the intermediate states, plus the rate targets.
pub fn converse_audit_cascade(code: &CascadeCode, omega: &DensityOperator) -> Result<ConverseAuditReport> {
    use InequalityKind::*;
    let n = code.n;
    let omega = omega.reorder(&["A", "B", "C"])?;
    let pure = omega.purify("R")?.to_density();

    let abar_in = [copy_labels("Abar", n), vec!["TA".into()]].concat();
    let alice_out = [copy_labels("A", n), vec!["M1".into()]].concat();
    ensure_labels(&code.alice, "Alice's encoder", &abar_in, &alice_out)?;
    ensure_labels(
        &code.bob,
        "Bob's encoder",
        &["M1".into(), "TB1".into(), "TB2".into()],
        &[copy_labels("B", n), vec!["M2".into()]].concat(),
    )?;
    ensure_labels(&code.charlie, "Charlie's decoder", &["M2".into(), "TC".into()], &copy_labels("C", n))?;
    for (s, want) in [(&code.psi, ["TA", "TB1"]), (&code.theta, ["TB2", "TC"])] {
        if s.layout().labels() != want {
            return Err(Error::Labeling(format!("entangled state must live on {want:?}")));
        }
    }

    let r_abar = pure.merge(&["A", "B", "C"], "Abar")?.reorder(&["R", "Abar"])?;
    let source = tensor_copies(&vec![&r_abar; n])?.tensor(&code.psi.to_density())?;
    let rho1 = source.apply_channel(&code.alice, &abar_in)?;
    let rho2 = rho1
        .tensor(&code.theta.to_density())?
        .apply_channel(&code.bob, &["M1", "TB1", "TB2"])?;
    let rho_hat = rho2.apply_channel(&code.charlie, &["M2", "TC"])?;

    let ar = labels_of(&["A", "R"], n);
    let abr = labels_of(&["A", "B", "R"], n);
    let bc = labels_of(&["B", "C"], n);
    let c = copy_labels("C", n);
    let i1 = mutual_information(&rho1, &["M1", "TB1"], &ar)?;
    let i2 = mutual_information(&rho2, &["M2", "TC"], &abr)?;
    let i_hat_1 = mutual_information(&rho_hat, &bc, &ar)?;
    let i_hat_2 = mutual_information(&rho_hat, &c, &abr)?;

    let d_m1 = log_dim(code.alice.output_layout(), "M1")?;
    let d_tb1 = log_dim(code.psi.layout(), "TB1")?;
    let d_m2 = log_dim(code.bob.output_layout(), "M2")?;
    let d_tb2 = log_dim(code.theta.layout(), "TB2")?;
    let nf = n as f64;
    let (q1, e1, q2, e2) = (d_m1 / nf, d_tb1 / nf, d_m2 / nf, d_tb2 / nf);

    let s_bc = entropy_of(&pure, &["B", "C"])?;
    let s_c = entropy_of(&pure, &["C"])?;
    let i_bc_r = mutual_information(&pure, &["B", "C"], &["R"])?;
    let i_c_ra = mutual_information(&pure, &["C"], &["R", "A"])?;

    let checks = vec![
        InequalityCheck::new("2(log dim M1 + log dim TB') >= I(M1 TB'; A^n R^n)", DimensionBound, 2.0 * (d_m1 + d_tb1), i1),
        InequalityCheck::new("I(M1 TB'; A^n R^n) >= I(B^n C^n; A^n R^n)", DataProcessing, i1, i_hat_1),
        InequalityCheck::new("2(log dim M2 + log dim TB'') >= I(M2 TC; A^n B^n R^n)", DimensionBound, 2.0 * (d_m2 + d_tb2), i2),
        InequalityCheck::new("I(M2 TC; A^n B^n R^n) >= I(C^n; A^n B^n R^n)", DataProcessing, i2, i_hat_2),
        InequalityCheck::new("Q1 + E1 >= S(BC)", Target, q1 + e1, s_bc),
        InequalityCheck::new("Q2 + E2 >= S(C)", Target, q2 + e2, s_c),
        InequalityCheck::new("Q1 >= I(BC;R)/2", Target, q1, 0.5 * i_bc_r),
        InequalityCheck::new("Q2 >= I(C;RA)/2", Target, q2, 0.5 * i_c_ra),
    ];

    let target = tensor_copies(&vec![&pure.reorder(&["R", "A", "B", "C"])?; n])?;
    let simulation_error = rho_hat.reorder(&target.layout().labels())?.trace_distance(&target)?;
    Ok(ConverseAuditReport::new("cascade", n, checks, simulation_error))
}

/// Runs the MAC code on `omega_A^{(x)n}` and `omega_B^{(x)n}` and evaluates steps (a)-(d)
/// of each sender's chain, with `sigma_hat = V^{(x)n} rho_hat` from the decomposition of
/// `omega`, plus the rate targets.
pub fn converse_audit_mac(code: &MacCode, omega: &PureState) -> Result<ConverseAuditReport> {
    use InequalityKind::*;
    let n = code.n;
    let (a, b, c) = (copy_labels("A", n), copy_labels("B", n), copy_labels("C", n));
    ensure_labels(&code.alice, "Alice's encoder", &a, &[a.clone(), vec!["M1".into()]].concat())?;
    ensure_labels(&code.bob, "Bob's encoder", &b, &[b.clone(), vec!["M2".into()]].concat())?;
    ensure_labels(&code.charlie, "Charlie's decoder", &["M1".into(), "M2".into()], &c)?;

    let dec = mac_decompose(omega)?;
    let omega_a = omega.partial_trace(&["A"])?;
    let omega_b = omega.partial_trace(&["B"])?;
    let rho1 = tensor_copies(&vec![&omega_a; n])?.apply_channel(&code.alice, &a)?;
    let rho2 = tensor_copies(&vec![&omega_b; n])?.apply_channel(&code.bob, &b)?;
    let joint = rho1.tensor(&rho2)?;
    let rho_hat = joint.apply_channel(&code.charlie, &["M1", "M2"])?;

    let mut sigma_hat = rho_hat.clone();
    let out = dec.output_layout();
    let dc = omega.layout().dim_of("C")?;
    for i in 0..n {
        let ci = copy_label("C", i);
        let (c1, c2) = (copy_label("C1", i), copy_label("C2", i));
        let v = dec.v.as_channel(
            SystemLayout::from_pairs(&[(ci.as_str(), dc)])?,
            SystemLayout::from_pairs(&[(c1.as_str(), out.dim_of("C1")?), (c2.as_str(), out.dim_of("C2")?)])?,
        )?;
        sigma_hat = sigma_hat.apply_channel(&v, &[ci])?;
    }
    let c12 = labels_of(&["C1", "C2"], n);

    let rho_c1 = dec.phi.partial_trace(&["C1"])?;
    let rho_c2 = dec.chi.partial_trace(&["C2"])?;
    let nf = n as f64;
    let mut checks = Vec::new();
    for (me, other, sys, c_sys, name, own_c) in [
        ("M1", "M2", &a, "A", "Alice", &rho_c1),
        ("M2", "M1", &b, "B", "Bob", &rho_c2),
    ] {
        let log_m = (joint.layout().dim_of(me)? as f64).log2();
        let cmi = conditional_mutual_information(&joint, &[me], sys, &[other])?;
        let mi = mutual_information(&joint, &[me, other], sys)?;
        let mi_hat = mutual_information(&rho_hat, &c, sys)?;
        let mi_sigma = mutual_information(&sigma_hat, &c12, sys)?;
        let s_own = entropy_of(own_c, &own_c.layout().labels())?;
        let tag = |s: &str| format!("{name} ({s})");
        checks.push(InequalityCheck::new(&tag(&format!("(a) 2 log dim {me} >= I({me};{c_sys}^n|{other})")), DimensionBound, 2.0 * log_m, cmi));
        checks.push(InequalityCheck::new(&tag(&format!("(b) I({me};{c_sys}^n|{other}) = I(M1 M2;{c_sys}^n)")), Equality, cmi, mi));
        checks.push(InequalityCheck::new(&tag(&format!("(c) I(M1 M2;{c_sys}^n) >= I(C^n;{c_sys}^n)")), DataProcessing, mi, mi_hat));
        checks.push(InequalityCheck::new(&tag(&format!("(d) I(C^n;{c_sys}^n) = I(C1^n C2^n;{c_sys}^n)")), Equality, mi_hat, mi_sigma));
        let own = if me == "M1" { "C1" } else { "C2" };
        checks.push(InequalityCheck::new(&tag(&format!("(e) I(C1^n C2^n;{c_sys}^n) >= 2n S({own})")), Target, mi_sigma, 2.0 * nf * s_own));
        checks.push(InequalityCheck::new(&tag(&format!("Q >= S({own})")), Target, log_m / nf, s_own));
    }

    let omega_abc = omega.reorder(&["A", "B", "C"])?.to_density();
    let target = tensor_copies(&vec![&omega_abc; n])?;
    let simulation_error = rho_hat.reorder(&target.layout().labels())?.trace_distance(&target)?;
    Ok(ConverseAuditReport::new("mac", n, checks, simulation_error))
}

fn layout(pairs: &[(&str, usize)]) -> Result<SystemLayout> {
    SystemLayout::from_pairs(pairs)
}

/// `|Phi+>` on two qubits with the given labels.
fn bell(first: &str, second: &str) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = crate::qla::C64::new(0.0, 0.0);
    let a = crate::qla::C64::new(h, 0.0);
    PureState::from_amplitudes(layout(&[(first, 2), (second, 2)])?, vec![a, z, z, a])
}

fn trivial(first: &str, second: &str) -> Result<PureState> {
    PureState::from_amplitudes(layout(&[(first, 1), (second, 1)])?, vec![crate::qla::C64::new(1.0, 0.0)])
}

/// Target `|0>_A (x) Phi+_BC` and an `n = 1` cascade code that simulates it exactly with
/// no entanglement: Alice outputs `|0>` and sends nothing, Bob prepares `Phi+` on `B M2`
/// and forwards `M2`, Charlie keeps `M2` as `C`. Here `Q2 + E2 = 1 = S(C)`.
pub fn bell_forwarding_code() -> Result<(DensityOperator, CascadeCode)> {
    let zero = PureState::basis(layout(&[("A", 2)])?, 0)?;
    let omega = zero.tensor(&bell("B", "C")?)?.to_density();
    let abar_dim = omega.dim();

    let alice_out = PureState::basis(layout(&[("A_1", 2), ("M1", 1)])?, 0)?.to_density();
    let alice = QuantumChannel::replacement(layout(&[("Abar_1", abar_dim), ("TA", 1)])?, &alice_out)?;
    let bob = QuantumChannel::replacement(
        layout(&[("M1", 1), ("TB1", 1), ("TB2", 1)])?,
        &bell("B_1", "M2")?.to_density(),
    )?;
    let charlie =
        QuantumChannel::new(layout(&[("M2", 2), ("TC", 1)])?, layout(&[("C_1", 2)])?, vec![CMatrix::identity(2, 2)])?;
    let code = CascadeCode { n: 1, alice, bob, charlie, psi: trivial("TA", "TB1")?, theta: trivial("TB2", "TC")? };
    Ok((omega, code))
}
