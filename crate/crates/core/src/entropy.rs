//! Base-2 entropic quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::DensityOperator;
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    S,
    SCond,
    I,
    ICond,
    HClassical,
    HCondClassical,
}

/// A computed entropic quantity together with the systems it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub quantity: Quantity,
    pub systems: Vec<Vec<String>>,
    pub value: f64,
}

impl EntropyReport {
    /// Evaluates `quantity` on `rho`. `systems` holds one label list per argument:
    /// `S: [A]`, `SCond: [A, B]` for `S(A|B)`, `I: [A, B]`, `ICond: [A, B, C]`.
    pub fn compute(rho: &DensityOperator, quantity: Quantity, systems: Vec<Vec<String>>) -> Result<Self> {
        let arity = match quantity {
            Quantity::S => 1,
            Quantity::SCond | Quantity::I => 2,
            Quantity::ICond => 3,
            Quantity::HClassical | Quantity::HCondClassical => {
                return Err(Error::InvalidParameter("classical quantities take a distribution, not a state".into()))
            }
        };
        if systems.len() != arity {
            return Err(Error::InvalidParameter(format!(
                "{quantity:?} needs {arity} label groups, got {}",
                systems.len()
            )));
        }
        let value = match quantity {
            Quantity::S => entropy_of(rho, &systems[0])?,
            Quantity::SCond => conditional_entropy(rho, &systems[0], &systems[1])?,
            Quantity::I => mutual_information(rho, &systems[0], &systems[1])?,
            _ => conditional_mutual_information(rho, &systems[0], &systems[1], &systems[2])?,
        };
        Ok(Self { quantity, systems, value })
    }
}

fn shannon_of_spectrum(values: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = values
        .into_iter()
        .filter(|&v| v > TOL.entropy_cutoff)
        .map(|v| -v * v.log2())
        .sum();
    s.max(0.0)
}

/// `-tr(rho log2 rho)`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_of_spectrum(rho.eigenvalues())
}

/// Entropy of the marginal on `labels`; the empty set has entropy zero.
pub fn entropy_of<S: AsRef<str>>(rho: &DensityOperator, labels: &[S]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    if labels.len() == rho.layout().len() {
        rho.layout().positions(labels)?;
        return Ok(von_neumann_entropy(rho));
    }
    Ok(von_neumann_entropy(&rho.partial_trace(labels)?))
}

fn disjoint(groups: &[&[String]]) -> Result<()> {
    for (i, g) in groups.iter().enumerate() {
        for h in &groups[i + 1..] {
            if let Some(l) = g.iter().find(|l| h.contains(l)) {
                return Err(Error::Labeling(format!("label `{l}` appears in two argument groups")));
            }
        }
    }
    Ok(())
}

fn owned<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels.iter().map(|s| s.as_ref().to_string()).collect()
}

fn union(a: &[String], b: &[String]) -> Vec<String> {
    a.iter().chain(b).cloned().collect()
}

/// `S(A|B) = S(AB) - S(B)`.
pub fn conditional_entropy<S: AsRef<str>, T: AsRef<str>>(rho: &DensityOperator, sys: &[S], given: &[T]) -> Result<f64> {
    let (a, b) = (owned(sys), owned(given));
    disjoint(&[&a, &b])?;
    Ok(entropy_of(rho, &union(&a, &b))? - entropy_of(rho, &b)?)
}

/// `I(A;B) = S(A) + S(B) - S(AB)`.
pub fn mutual_information<S: AsRef<str>, T: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[T]) -> Result<f64> {
    let (a, b) = (owned(a), owned(b));
    disjoint(&[&a, &b])?;
    Ok(entropy_of(rho, &a)? + entropy_of(rho, &b)? - entropy_of(rho, &union(&a, &b))?)
}

/// `I(A;B|C) = S(AC) + S(BC) - S(ABC) - S(C)`.
pub fn conditional_mutual_information<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
    rho: &DensityOperator,
    a: &[S],
    b: &[T],
    c: &[U],
) -> Result<f64> {
    let (a, b, c) = (owned(a), owned(b), owned(c));
    disjoint(&[&a, &b, &c])?;
    let ac = union(&a, &c);
    let bc = union(&b, &c);
    let abc = union(&ac, &b);
    Ok(entropy_of(rho, &ac)? + entropy_of(rho, &bc)? - entropy_of(rho, &abc)? - entropy_of(rho, &c)?)
}

/// Checks that `p` is a probability vector.
pub fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {v} is not a probability")));
    }
    let residual = (p.iter().sum::<f64>() - 1.0).abs();
    if residual > TOL.distribution {
        return Err(Error::InvalidDistribution(format!("entries sum to 1 {residual:+e}")));
    }
    Ok(())
}

/// Shannon entropy in bits.
pub fn classical_entropy(p: &[f64]) -> Result<f64> {
    validate_distribution(p)?;
    Ok(shannon_of_spectrum(p.iter().copied()))
}

/// `H(Z|X)` from a joint table `p_xz[x][z]`.
pub fn classical_conditional_entropy(p_xz: &[Vec<f64>]) -> Result<f64> {
    let flat: Vec<f64> = p_xz.iter().flatten().copied().collect();
    validate_distribution(&flat)?;
    let mut h = 0.0;
    for row in p_xz {
        let px: f64 = row.iter().sum();
        if px > 0.0 {
            h += px * shannon_of_spectrum(row.iter().map(|v| v / px));
        }
    }
    Ok(h)
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_of_spectrum([p, 1.0 - p])
}
