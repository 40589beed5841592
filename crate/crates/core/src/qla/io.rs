//! JSON state and channel files.
//!
//! A state file is `{"layout": [{"label": "A", "dim": 2}, ...], "matrix": [[[re, im], ...], ...]}`
//! with row-major entries, or carries `"amplitudes": [[re, im], ...]` for a pure state.
//! A channel file is `{"input_layout": [...], "output_layout": [...], "kraus": [matrix, ...]}`.

use serde::{Deserialize, Serialize};

use super::channel::QuantumChannel;
use super::layout::{Subsystem, SystemLayout};
use super::linalg::{c, CMatrix, CVector};
use super::state::{DensityOperator, PureState};
use crate::error::{Error, Result};
use crate::tolerance::TOL;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub layout: Vec<Subsystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub input_layout: Vec<Subsystem>,
    pub output_layout: Vec<Subsystem>,
    pub kraus: Vec<JsonMatrix>,
}

/// A state read from disk, pure or mixed as written.
#[derive(Debug, Clone)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl LoadedState {
    pub fn to_density(&self) -> DensityOperator {
        match self {
            LoadedState::Pure(p) => p.to_density(),
            LoadedState::Mixed(d) => d.clone(),
        }
    }

    /// The state vector; a mixed input is accepted when it has purity one.
    pub fn into_pure(self) -> Result<PureState> {
        match self {
            LoadedState::Pure(p) => Ok(p),
            LoadedState::Mixed(d) => {
                let residual = 1.0 - d.purity();
                if residual.abs() > TOL.cptp {
                    return Err(Error::NotPure { residual });
                }
                let top = d.spectral_decomposition()?.swap_remove(0);
                Ok(top.vector)
            }
        }
    }
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn parse_state(text: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let layout = SystemLayout::new(file.layout)?;
    match (file.matrix, file.amplitudes) {
        (Some(m), None) => Ok(LoadedState::Mixed(DensityOperator::new(layout, matrix_from_json(&m)?)?)),
        (None, Some(a)) => {
            let v = CVector::from_iterator(a.len(), a.iter().map(|z| c(z[0], z[1])));
            Ok(LoadedState::Pure(PureState::new(layout, v)?))
        }
        _ => Err(Error::Parse("state file needs exactly one of `matrix` or `amplitudes`".into())),
    }
}

pub fn density_to_file(rho: &DensityOperator) -> StateFile {
    StateFile {
        layout: rho.layout().subsystems().to_vec(),
        matrix: Some(matrix_to_json(rho.matrix())),
        amplitudes: None,
    }
}

pub fn pure_to_file(psi: &PureState) -> StateFile {
    StateFile {
        layout: psi.layout().subsystems().to_vec(),
        matrix: None,
        amplitudes: Some(psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
    }
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    channel_from_file(file)
}

pub fn channel_from_file(file: ChannelFile) -> Result<QuantumChannel> {
    let kraus = file.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(SystemLayout::new(file.input_layout)?, SystemLayout::new(file.output_layout)?, kraus)
}

pub fn channel_to_file(ch: &QuantumChannel) -> ChannelFile {
    ChannelFile {
        input_layout: ch.input_layout().subsystems().to_vec(),
        output_layout: ch.output_layout().subsystems().to_vec(),
        kraus: ch.kraus_operators().iter().map(matrix_to_json).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let pure = r#"{"layout":[{"label":"A","dim":2}],"amplitudes":[[0.6,0],[0,0.8]]}"#;
        let p = parse_state(pure).unwrap().into_pure().unwrap();
        assert!((p.amplitudes()[1].im - 0.8).abs() < 1e-15);
        let mixed = r#"{"layout":[{"label":"A","dim":2}],"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        let loaded = parse_state(mixed).unwrap();
        assert!((loaded.to_density().purity() - 0.5).abs() < 1e-15);
        assert!(matches!(loaded.into_pure(), Err(Error::NotPure { .. })));
    }

    #[test]
    fn round_trips_through_json() {
        let rho = DensityOperator::diagonal(SystemLayout::from_pairs(&[("A", 2)]).unwrap(), &[0.25, 0.75]).unwrap();
        let text = serde_json::to_string(&density_to_file(&rho)).unwrap();
        let back = parse_state(&text).unwrap().to_density();
        assert_eq!(back, rho);
    }
}
