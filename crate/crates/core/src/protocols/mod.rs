//! Finite-blocklength runs of the coordination protocols and numeric audits of the
//! converse inequalities.
//!
//! All randomness lives in the binning codebooks. Quantum states are evolved exactly for
//! every codebook seed.

mod broadcast;
mod converse;
mod mac;
mod schumacher;

pub use broadcast::{
    build_alice_encoders, build_receiver_decoder, rate_sweep_broadcast, simulate_broadcast, simulate_broadcast_seeds,
    BroadcastProtocolInstance, MonotonicityCheck, SimulationMethod, SpectralData, SweepRow, SweepTable, KRAUS_ENTRY_LIMIT,
    MONOTONE_TOLERANCE,
};
pub use converse::{
    bell_forwarding_code, converse_audit_cascade, converse_audit_mac, CascadeCode, ConverseAuditReport, InequalityCheck,
    InequalityKind, MacCode, AUDIT_SLACK,
};
pub use mac::{mac_distance_closed_form, simulate_mac, simulate_mac_with, MacMethod, MAC_DENSE_LIMIT};
pub use schumacher::{schumacher_encode, SchumacherCode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::{copy_label, DensityOperator};

/// Which receiver an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bob,
    Charlie,
    Joint,
}

/// Errors for one codebook seed. `error_joint` is the sum of the marginal errors for
/// broadcast runs and the exact distance for MAC runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_charlie: Option<f64>,
    pub error_joint: f64,
    /// Exact joint distance, when the joint state was small enough to build.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_joint_exact: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub side: Side,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub protocol: String,
    pub method: String,
    pub n: usize,
    #[serde(rename = "Q1")]
    pub q1: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
    pub delta: f64,
    pub seeds: Vec<u64>,
    pub outcomes: Vec<SeedOutcome>,
    pub summary: Vec<SideSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl SimulationReport {
    pub fn summary_for(&self, side: Side) -> Option<&SideSummary> {
        self.summary.iter().find(|s| s.side == side)
    }

    pub fn mean(&self, side: Side) -> Option<f64> {
        self.summary_for(side).map(|s| s.mean)
    }

    /// CSV with columns `n,Q1,Q2,seed,error_bob,error_charlie,error_joint`; missing
    /// marginal errors are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,Q1,Q2,seed,error_bob,error_charlie,error_joint\n");
        for o in &self.outcomes {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.n,
                self.q1,
                self.q2,
                o.seed,
                opt(o.error_bob),
                opt(o.error_charlie),
                o.error_joint
            ));
        }
        out
    }
}

fn summarize(side: Side, values: &[f64]) -> SideSummary {
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SideSummary { side, mean, min, max }
}

/// Tensor product of per-copy states, copy `i` relabeled `X_{i+1}`, copies outermost.
pub(crate) fn tensor_copies(states: &[&DensityOperator]) -> Result<DensityOperator> {
    let mut out: Option<DensityOperator> = None;
    for (i, s) in states.iter().enumerate() {
        let names: Vec<String> = s.layout().labels().iter().map(|l| copy_label(l, i)).collect();
        let renames: Vec<(&str, &str)> = s.layout().labels().into_iter().zip(names.iter().map(String::as_str)).collect();
        let copy = s.relabel(&renames)?;
        out = Some(match out {
            None => copy,
            Some(acc) => acc.tensor(&copy)?,
        });
    }
    out.ok_or_else(|| Error::InvalidParameter("need at least one copy".into()))
}

/// Labels `X_1..X_n` for each `X` in `groups`, grouped by system.
pub(crate) fn grouped_labels(groups: &[&str], n: usize) -> Vec<String> {
    groups.iter().flat_map(|g| (0..n).map(move |i| copy_label(g, i))).collect()
}
