use serde::{Deserialize, Serialize};

use crate::entropy::validate_distribution;
use crate::error::{Error, Result};
use crate::qla::io::{matrix_from_json, matrix_to_json, JsonMatrix};
use crate::qla::linalg::{c, CMatrix, CVector};
use crate::qla::{DensityOperator, PureState, Subsystem, SystemLayout};

/// Ensemble `{p(x, y, ...), sigma^(x, y, ...)}` over classical registers, all conditional
/// states on one quantum layout. Tuples are indexed lexicographically, first register
/// most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalQuantumState {
    classical_layout: SystemLayout,
    probs: Vec<f64>,
    states: Vec<DensityOperator>,
}

/// File form: `{"classical_layout": [...], "layout": [...], "entries": [{"index": [x, y],
/// "p": 0.25, "matrix": ...}]}`. Entries may give `"amplitudes"` instead of `"matrix"`;
/// tuples without an entry get probability zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqFile {
    pub classical_layout: Vec<Subsystem>,
    pub layout: Vec<Subsystem>,
    pub entries: Vec<CqEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqEntry {
    pub index: Vec<usize>,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

impl ClassicalQuantumState {
    pub fn new(classical_layout: SystemLayout, probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        let k = classical_layout.total_dim();
        if probs.len() != k || states.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{k} classical tuples but {} probabilities and {} states",
                probs.len(),
                states.len()
            )));
        }
        validate_distribution(&probs)?;
        if let Some(s) = states.iter().find(|s| s.layout() != states[0].layout()) {
            return Err(Error::DimensionMismatch(format!(
                "conditional states on different layouts: {:?} vs {:?}",
                s.layout().labels(),
                states[0].layout().labels()
            )));
        }
        if let Some(l) = states[0].layout().labels().into_iter().find(|l| classical_layout.contains(l)) {
            return Err(Error::Labeling(format!("label `{l}` is both classical and quantum")));
        }
        Ok(Self { classical_layout, probs, states })
    }

    /// A single classical register `label` with ensemble `{p_i, sigma_i}`.
    pub fn single(label: &str, probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        Self::new(SystemLayout::from_pairs(&[(label, probs.len())])?, probs, states)
    }

    pub fn classical_layout(&self) -> &SystemLayout {
        &self.classical_layout
    }

    pub fn quantum_layout(&self) -> &SystemLayout {
        self.states[0].layout()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn state_at(&self, tuple: &[usize]) -> &DensityOperator {
        &self.states[self.classical_layout.index(tuple)]
    }

    pub fn prob_at(&self, tuple: &[usize]) -> f64 {
        self.probs[self.classical_layout.index(tuple)]
    }

    /// Block-diagonal `sum p |t><t| (x) sigma^(t)`, classical registers first.
    pub fn flatten(&self) -> Result<DensityOperator> {
        let layout = self.classical_layout.concat(self.quantum_layout())?;
        let dq = self.quantum_layout().total_dim();
        let mut m = CMatrix::zeros(layout.total_dim(), layout.total_dim());
        for (t, (p, s)) in self.probs.iter().zip(&self.states).enumerate() {
            m.view_mut((t * dq, t * dq), (dq, dq)).copy_from(&s.matrix().scale(*p));
        }
        DensityOperator::new(layout, m)
    }

    /// Marginal distribution of the classical registers `labels`, indexed lexicographically.
    pub fn classical_marginal<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<f64>> {
        Ok(self.conditional_average(labels)?.into_iter().map(|(p, _)| p).collect())
    }

    /// For each value `g` of the registers `given`: `(p(g), sum_t p(t|g) sigma^(t))`.
    /// Zero-probability values carry the uniform average of their conditional states.
    pub fn conditional_average<S: AsRef<str>>(&self, given: &[S]) -> Result<Vec<(f64, DensityOperator)>> {
        let pos = self.classical_layout.positions(given)?;
        let sub = self.classical_layout.select(&pos);
        let dq = self.quantum_layout().total_dim();
        let mut acc = vec![(0.0, CMatrix::zeros(dq, dq), CMatrix::zeros(dq, dq), 0usize); sub.total_dim()];
        for (t, (p, s)) in self.probs.iter().zip(&self.states).enumerate() {
            let digits = self.classical_layout.digits(t);
            let g: Vec<usize> = pos.iter().map(|&q| digits[q]).collect();
            let slot = &mut acc[sub.index(&g)];
            slot.0 += p;
            slot.1 += s.matrix().scale(*p);
            slot.2 += s.matrix();
            slot.3 += 1;
        }
        acc.into_iter()
            .map(|(p, weighted, plain, count)| {
                let m = if p > 0.0 { weighted.unscale(p) } else { plain.unscale(count as f64) };
                let m = m.unscale(m.trace().re);
                Ok((p, DensityOperator::new(self.quantum_layout().clone(), m)?))
            })
            .collect()
    }

    /// Same ensemble with every conditional state reduced to `keep`.
    pub fn quantum_marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<ClassicalQuantumState> {
        let states = self.states.iter().map(|s| s.partial_trace(keep)).collect::<Result<Vec<_>>>()?;
        Ok(Self { classical_layout: self.classical_layout.clone(), probs: self.probs.clone(), states })
    }

    pub fn from_file(file: CqFile) -> Result<Self> {
        let classical = SystemLayout::new(file.classical_layout)?;
        let quantum = SystemLayout::new(file.layout)?;
        let k = classical.total_dim();
        let mut probs = vec![0.0; k];
        let mut states: Vec<Option<DensityOperator>> = vec![None; k];
        for e in file.entries {
            if e.index.len() != classical.len() || e.index.iter().zip(classical.dims()).any(|(&i, d)| i >= d) {
                return Err(Error::Parse(format!("entry index {:?} outside the classical alphabets", e.index)));
            }
            let t = classical.index(&e.index);
            if states[t].is_some() {
                return Err(Error::Parse(format!("entry {:?} given twice", e.index)));
            }
            let rho = match (&e.matrix, &e.amplitudes) {
                (Some(m), None) => DensityOperator::new(quantum.clone(), matrix_from_json(m)?)?,
                (None, Some(a)) => {
                    let v = CVector::from_iterator(a.len(), a.iter().map(|z| c(z[0], z[1])));
                    PureState::new(quantum.clone(), v)?.to_density()
                }
                _ => return Err(Error::Parse("entry needs exactly one of `matrix` or `amplitudes`".into())),
            };
            probs[t] = e.p;
            states[t] = Some(rho);
        }
        let states = states
            .into_iter()
            .map(|s| s.unwrap_or_else(|| DensityOperator::maximally_mixed(quantum.clone())))
            .collect();
        Self::new(classical, probs, states)
    }

    pub fn to_file(&self) -> CqFile {
        CqFile {
            classical_layout: self.classical_layout.subsystems().to_vec(),
            layout: self.quantum_layout().subsystems().to_vec(),
            entries: self
                .probs
                .iter()
                .zip(&self.states)
                .enumerate()
                .map(|(t, (p, s))| CqEntry {
                    index: self.classical_layout.digits(t),
                    p: *p,
                    matrix: Some(matrix_to_json(s.matrix())),
                    amplitudes: None,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::conditional_entropy;

    #[test]
    fn flattening_gives_block_diagonal_state() {
        let q = SystemLayout::from_pairs(&[("B", 2)]).unwrap();
        let zero = DensityOperator::basis(q.clone(), 0).unwrap();
        let plus = DensityOperator::maximally_mixed(q.clone());
        let cq = ClassicalQuantumState::single("X", vec![0.5, 0.5], vec![zero, plus]).unwrap();
        let flat = cq.flatten().unwrap();
        assert_eq!(flat.layout().labels(), vec!["X", "B"]);
        assert!((flat.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((flat.matrix()[(2, 2)].re - 0.25).abs() < 1e-15);
        // S(B|X) = 0.5 * 0 + 0.5 * 1
        assert!((conditional_entropy(&flat, &["B"], &["X"]).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn file_round_trip() {
        let q = SystemLayout::from_pairs(&[("B", 2)]).unwrap();
        let s = DensityOperator::diagonal(q, &[0.75, 0.25]).unwrap();
        let cq = ClassicalQuantumState::single("X", vec![1.0], vec![s]).unwrap();
        let text = serde_json::to_string(&cq.to_file()).unwrap();
        let back = ClassicalQuantumState::from_file(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, cq);
    }
}
