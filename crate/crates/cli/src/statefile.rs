//! Versioned JSON state files.

use std::collections::BTreeMap;
use std::path::Path;

use nongauss::linalg::CMatrix;
use nongauss::{Error, FockState, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub version: u32,
    pub modes: usize,
    pub cutoffs: Vec<usize>,
    /// Row-major density matrix; each entry is `[re, im]`.
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl StateFile {
    pub fn from_state(state: &FockState, metadata: Option<Metadata>) -> Self {
        let m = state.matrix();
        let matrix = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        StateFile { version: VERSION, modes: state.modes(), cutoffs: state.cutoffs().to_vec(), matrix, metadata }
    }

    /// Shape, Hermiticity, trace and positivity checks.
    pub fn to_state(&self) -> nongauss::Result<FockState> {
        if self.version != VERSION {
            return Err(Error::InvalidState(format!("unsupported state file version {}", self.version)));
        }
        if self.modes != self.cutoffs.len() {
            return Err(Error::ShapeMismatch(format!("modes = {} but {} cutoffs", self.modes, self.cutoffs.len())));
        }
        let side = self.cutoffs.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        let side = side.ok_or_else(|| Error::InvalidDimension("product of cutoffs overflows".into()))?;
        if self.matrix.len() != side {
            return Err(Error::ShapeMismatch(format!("matrix has {} rows; cutoffs {:?} need {side}", self.matrix.len(), self.cutoffs)));
        }
        if let Some(i) = self.matrix.iter().position(|row| row.len() != side) {
            return Err(Error::ShapeMismatch(format!("matrix row {i} has {} entries; expected {side}", self.matrix[i].len())));
        }
        if self.matrix.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let m = CMatrix::from_fn(side, side, |i, j| C64::new(self.matrix[i][j][0], self.matrix[i][j][1]));
        let state = FockState::from_matrix(&self.cutoffs, m)?;
        state.validate()?;
        Ok(state)
    }

    pub fn load(path: &Path) -> CliResult<(StateFile, FockState)> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: StateFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let state = file.to_state()?;
        Ok((file, state))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state files serialize");
        s.push('\n');
        s
    }
}
