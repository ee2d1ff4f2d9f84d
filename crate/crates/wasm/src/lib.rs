//! WebAssembly bindings behind the browser demo in `www/`.
//!
//! Three operations: the hat distribution, a Bose-Hubbard ground-state
//! profile, and an incremental detection run with its phase distribution.
//! Grids cross the boundary as flat row-major `Float64Array`s.

use hatcat::detection::{rng_from_seed, sample_detection, DetectionRng, DEFAULT_GRID_POINTS};
use hatcat::eigen::EigenOptions;
use hatcat::hubbard::solve;
use hatcat::{
    find_cat_peaks, hat_distribution, phase_distribution, quasimomentum_profile, Boundary, EtaDistribution,
    HamiltonianParams, QuantumState, QuasiMomentumParams,
};
use wasm_bindgen::prelude::*;

/// Upper bound on atoms per site so a single call stays interactive.
pub const MAX_ATOMS_PER_SITE: u32 = 60;

fn check_atoms(atoms_per_site: u32) -> Result<(), String> {
    if atoms_per_site > MAX_ATOMS_PER_SITE {
        return Err(format!("at most {MAX_ATOMS_PER_SITE} atoms per site in the demo"));
    }
    Ok(())
}

/// `(T+1)²` row-major values of `P(N_α, N_β)`.
pub fn hat_values(atoms_per_site: u32, xi: f64) -> Result<Vec<f64>, String> {
    check_atoms(atoms_per_site)?;
    Ok(hat_distribution(atoms_per_site, xi)
        .map_err(|e| e.to_string())?
        .values()
        .to_vec())
}

#[wasm_bindgen(js_name = hatDistribution)]
pub fn hat_distribution_js(atoms_per_site: u32, xi: f64) -> Result<Vec<f64>, JsError> {
    hat_values(atoms_per_site, xi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct GroundProfile {
    values: Vec<f64>,
    energy: f64,
    residual: f64,
    total: u32,
}

impl GroundProfile {
    pub fn compute(atoms: u32, u_over_j: f64, periodic: bool) -> Result<Self, String> {
        check_atoms(atoms.div_ceil(3))?;
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let params = HamiltonianParams::from_ratio(3, atoms, u_over_j, boundary).map_err(|e| e.to_string())?;
        let g = solve(&params, &EigenOptions::default()).map_err(|e| e.to_string())?;
        let grid = quasimomentum_profile(&g.state, QuasiMomentumParams::new(3, 0.0)).map_err(|e| e.to_string())?;
        Ok(Self {
            values: grid.values().to_vec(),
            energy: g.energy,
            residual: g.residual,
            total: atoms,
        })
    }
}

#[wasm_bindgen]
impl GroundProfile {
    #[wasm_bindgen(constructor)]
    pub fn new(atoms: u32, u_over_j: f64, periodic: bool) -> Result<GroundProfile, JsError> {
        Self::compute(atoms, u_over_j, periodic).map_err(|e| JsError::new(&e))
    }

    /// `(T+1)²` row-major values of `P(N_α, N_β)`.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// In units where `max(J, U) = 1`.
    #[wasm_bindgen(getter)]
    pub fn energy(&self) -> f64 {
        self.energy
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }

    #[wasm_bindgen(getter)]
    pub fn total(&self) -> u32 {
        self.total
    }
}

/// A detection run that advances on demand.
#[wasm_bindgen]
pub struct CatExperiment {
    state: QuantumState,
    rng: DetectionRng,
    eta: EtaDistribution,
    us: Vec<f64>,
}

impl CatExperiment {
    pub fn start(atoms_per_site: u32, seed: u64) -> Result<Self, String> {
        check_atoms(atoms_per_site)?;
        Ok(Self {
            state: QuantumState::uniform_fock(3, atoms_per_site).map_err(|e| e.to_string())?,
            rng: rng_from_seed(seed),
            eta: EtaDistribution::default(),
            us: Vec::new(),
        })
    }

    /// Up to `count` more detections, fewer if the atoms run out.
    pub fn advance(&mut self, count: u32) -> Result<usize, String> {
        let count = count.min(self.state.total_atoms());
        for _ in 0..count {
            let (event, next) = sample_detection(
                &self.state,
                &self.eta,
                DEFAULT_GRID_POINTS,
                self.us.len() + 1,
                &mut self.rng,
            )
            .map_err(|e| e.to_string())?;
            self.us.push(event.u);
            self.state = next;
        }
        Ok(self.us.len())
    }

    pub fn phase_values(&self, m: usize) -> Result<Vec<f64>, String> {
        Ok(phase_distribution(&self.state, m)
            .map_err(|e| e.to_string())?
            .values()
            .to_vec())
    }

    /// `[Φ₁, Φ₂, height]`, or empty without cat structure.
    pub fn peak_values(&self, m: usize) -> Result<Vec<f64>, String> {
        let grid = phase_distribution(&self.state, m).map_err(|e| e.to_string())?;
        Ok(match find_cat_peaks(&grid) {
            Ok(p) => vec![p.phi1, p.phi2, p.peak_height],
            Err(hatcat::Error::NoCatStructure { .. }) => Vec::new(),
            Err(e) => return Err(e.to_string()),
        })
    }
}

#[wasm_bindgen]
impl CatExperiment {
    #[wasm_bindgen(constructor)]
    pub fn new(atoms_per_site: u32, seed: u32) -> Result<CatExperiment, JsError> {
        Self::start(atoms_per_site, seed as u64).map_err(|e| JsError::new(&e))
    }

    /// Returns the total number of detections so far.
    pub fn detect(&mut self, count: u32) -> Result<u32, JsError> {
        self.advance(count).map(|n| n as u32).map_err(|e| JsError::new(&e))
    }

    /// `m²` row-major values over `(φ_ba, φ_cb)`, mean 1.
    #[wasm_bindgen(js_name = phaseGrid)]
    pub fn phase_grid(&self, m: usize) -> Result<Vec<f64>, JsError> {
        self.phase_values(m).map_err(|e| JsError::new(&e))
    }

    pub fn peaks(&self, m: usize) -> Result<Vec<f64>, JsError> {
        self.peak_values(m).map_err(|e| JsError::new(&e))
    }

    /// Detected phases `u` in order.
    #[wasm_bindgen(getter)]
    pub fn detections(&self) -> Vec<f64> {
        self.us.clone()
    }

    #[wasm_bindgen(getter, js_name = remainingAtoms)]
    pub fn remaining_atoms(&self) -> u32 {
        self.state.total_atoms()
    }
}
