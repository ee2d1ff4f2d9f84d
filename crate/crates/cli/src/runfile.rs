//! Versioned JSON run files written by `detect` and read by `phase` and `number`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use hatcat::detection::SectorDescriptor;
use hatcat::{DetectionEvent, DetectionRun, FockBasis, QuantumState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const RUN_FORMAT: &str = "hatcat-run";
pub const RUN_VERSION: u32 = 1;
/// Basis order of the stored amplitudes.
pub const ORDERING: &str = "descending-lexicographic";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sites: usize,
    pub atoms_per_site: u32,
    pub detections: u32,
    pub eta_dist: String,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub n_modes: usize,
    pub total_atoms: u32,
    pub ordering: String,
    pub dim: usize,
    /// `[re, im]` per basis state.
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateRecord {
    pub fn from_state(state: &QuantumState) -> Self {
        Self {
            n_modes: state.n_modes(),
            total_atoms: state.total_atoms(),
            ordering: ORDERING.into(),
            dim: state.basis().dim(),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<QuantumState, CliError> {
        if self.ordering != ORDERING {
            return Err(CliError::Input(format!(
                "unsupported basis ordering '{}'",
                self.ordering
            )));
        }
        let basis = FockBasis::new(self.n_modes, self.total_atoms)?;
        if basis.dim() != self.dim || self.amplitudes.len() != self.dim {
            return Err(CliError::Input(format!(
                "sector ({} modes, {} atoms) has dimension {}, file lists {} amplitudes",
                self.n_modes,
                self.total_atoms,
                basis.dim(),
                self.amplitudes.len()
            )));
        }
        let amps = self.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(QuantumState::new(Arc::new(basis), amps)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub seed: u64,
    pub initial: SectorDescriptor,
    pub events: Vec<DetectionEvent>,
    pub final_state: StateRecord,
}

impl RunFile {
    pub fn new(config: RunConfig, run: &DetectionRun) -> Self {
        Self {
            format: RUN_FORMAT.into(),
            version: RUN_VERSION,
            config,
            seed: run.seed,
            initial: run.initial.clone(),
            events: run.events.clone(),
            final_state: StateRecord::from_state(&run.final_state),
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::Input(format!("run file: {e}")))?;
        if file.format != RUN_FORMAT {
            return Err(CliError::Input(format!("not a run file (format '{}')", file.format)));
        }
        if file.version != RUN_VERSION {
            return Err(CliError::Input(format!(
                "run file version {} is not supported (expected {RUN_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        crate::write_text(path, &self.to_json()?)
    }

    pub fn final_state(&self) -> Result<QuantumState, CliError> {
        self.final_state.to_state()
    }
}
