use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    Cascade,
    Broadcast,
    Mac,
    StateRedistribution,
}

/// One lower bound `name >= value`, where `name` is a `+`-separated sum of rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub name: String,
    pub expression: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBoundReport {
    pub network: Network,
    pub bounds: Vec<RateBound>,
    pub feasible: bool,
    pub notes: String,
}

impl RateBoundReport {
    pub(crate) fn new(network: Network, bounds: Vec<(&str, &str, f64)>, notes: impl Into<String>) -> Result<Self> {
        let mut out = Vec::with_capacity(bounds.len());
        for (name, expression, value) in bounds {
            if !value.is_finite() || value < -1e-8 {
                return Err(Error::Numerical(format!("bound {name} = {value} is negative")));
            }
            if out.iter().any(|b: &RateBound| b.name == name) {
                return Err(Error::Labeling(format!("bound `{name}` listed twice")));
            }
            // report tiny negative round-off as zero
            out.push(RateBound { name: name.into(), expression: expression.into(), value: value.max(0.0) });
        }
        Ok(Self { network, bounds: out, feasible: true, notes: notes.into() })
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.bounds.iter().find(|b| b.name == name).map(|b| b.value)
    }

    /// Bound values in report order.
    pub fn values(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| b.value).collect()
    }

    /// Non-strict membership with slack: every bound `R1+R2+... >= v` must hold for
    /// `rates`. Rates not supplied count as zero.
    pub fn contains(&self, rates: &BTreeMap<String, f64>) -> bool {
        self.bounds.iter().all(|b| {
            let total: f64 = b.name.split('+').map(|r| rates.get(r.trim()).copied().unwrap_or(0.0)).sum();
            total >= b.value - TOL.membership_slack
        })
    }
}
