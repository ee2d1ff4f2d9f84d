//! Bose-Hubbard lattice: `H = −J Σ_<ij> a_i† a_j + (U/2) Σ_i a_i† a_i† a_i a_i`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpair, EigenOptions};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::grid::SimplexGrid;
use crate::par::map_indices;
use crate::sparse::SparseOperator;
use crate::transform::{fock_basis_change, occupation_distribution, quasimomentum_matrix, QuasiMomentumParams};

/// Relative gap below which the ground state is flagged as nearly degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Ring: site `n−1` also neighbours site 0.
    #[default]
    Periodic,
    Open,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" | "ring" => Ok(Self::Periodic),
            "open" | "line" => Ok(Self::Open),
            other => Err(Error::InvalidArgument(format!("unknown boundary '{other}'"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Open => "open",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub n_sites: usize,
    pub total_atoms: u32,
    /// Tunnelling `J`.
    pub hopping: f64,
    /// On-site interaction `U`.
    pub interaction: f64,
    pub boundary: Boundary,
}

impl HamiltonianParams {
    pub fn new(n_sites: usize, total_atoms: u32, hopping: f64, interaction: f64, boundary: Boundary) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidArgument("need at least 2 sites".into()));
        }
        if !(hopping >= 0.0 && hopping.is_finite()) || !(interaction >= 0.0 && interaction.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "J = {hopping} and U = {interaction} must be finite and non-negative"
            )));
        }
        Ok(Self {
            n_sites,
            total_atoms,
            hopping,
            interaction,
            boundary,
        })
    }

    /// Parameters for a given `U/J`, in energy units where `max(J, U) = 1`.
    pub fn from_ratio(n_sites: usize, total_atoms: u32, u_over_j: f64, boundary: Boundary) -> Result<Self> {
        if !(u_over_j >= 0.0) || u_over_j.is_nan() {
            return Err(Error::InvalidArgument(format!("U/J = {u_over_j} must be non-negative")));
        }
        let (j, u) = if u_over_j <= 1.0 {
            (1.0, u_over_j)
        } else {
            (1.0 / u_over_j, 1.0)
        };
        Self::new(n_sites, total_atoms, j, u, boundary)
    }

    /// Nearest-neighbour bonds, each listed once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

/// Sparse Hamiltonian over `basis`. Each bond contributes hopping in both directions.
pub fn build_hamiltonian(params: &HamiltonianParams, basis: &FockBasis) -> Result<SparseOperator> {
    if basis.n_modes() != params.n_sites || basis.total_atoms() != params.total_atoms {
        return Err(Error::BasisMismatch(format!(
            "basis ({} modes, {} atoms) vs parameters ({} sites, {} atoms)",
            basis.n_modes(),
            basis.total_atoms(),
            params.n_sites,
            params.total_atoms
        )));
    }
    let mut hops = Vec::new();
    for (i, j) in params.bonds() {
        hops.push((i, j));
        hops.push((j, i));
    }
    let (jh, uh) = (params.hopping, params.interaction);
    let rows = map_indices(basis.dim(), |r| {
        let occ = basis.occupations(r);
        let mut row = Vec::with_capacity(hops.len() + 1);
        let diag: f64 = occ.iter().map(|&k| 0.5 * uh * k as f64 * (k as f64 - 1.0)).sum();
        row.push((r, Complex64::new(diag, 0.0)));
        if jh != 0.0 {
            // ⟨r| a_i† a_j |c⟩ with c = r − e_i + e_j
            let mut col = occ.to_vec();
            for &(i, j) in &hops {
                if occ[i] == 0 {
                    continue;
                }
                col.copy_from_slice(occ);
                col[i] -= 1;
                col[j] += 1;
                let c = basis.index_of(&col).expect("hopping conserves the sector");
                let amp = (occ[i] as f64).sqrt() * (col[j] as f64).sqrt();
                row.push((c, Complex64::new(-jh * amp, 0.0)));
            }
        }
        row
    });
    SparseOperator::from_rows(basis.dim(), rows, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub state: QuantumState,
    pub residual: f64,
    /// Distance to the next level, when estimated.
    pub gap: Option<f64>,
    pub near_degenerate: bool,
    pub iterations: usize,
}

/// Lowest eigenpair of `h`, returned as a unit state over `basis` with its
/// largest amplitude made real and positive.
pub fn ground_state(h: &SparseOperator, basis: Arc<FockBasis>, opts: &EigenOptions) -> Result<GroundState> {
    if h.dim() != basis.dim() {
        return Err(Error::BasisMismatch("operator and basis dimensions differ".into()));
    }
    let pair = lowest_eigenpair(h, opts)?;
    let mut state = QuantumState::new(basis, pair.vector)?.normalize()?.0;
    state.fix_global_phase();
    let gap = pair.next_energy.map(|e| e - pair.energy);
    let near_degenerate = gap.is_some_and(|g| g < DEGENERACY_THRESHOLD * h.norm_bound());
    Ok(GroundState {
        energy: pair.energy,
        state,
        residual: pair.residual,
        gap,
        near_degenerate,
        iterations: pair.iterations,
    })
}

/// Build and solve in one step.
pub fn solve(params: &HamiltonianParams, opts: &EigenOptions) -> Result<GroundState> {
    let basis = Arc::new(FockBasis::new(params.n_sites, params.total_atoms)?);
    let h = build_hamiltonian(params, &basis)?;
    ground_state(&h, basis, opts)
}

/// Quasi-momentum occupation distribution of a three-site state.
pub fn quasimomentum_profile(state: &QuantumState, params: QuasiMomentumParams) -> Result<SimplexGrid> {
    if state.n_modes() != params.n_modes {
        return Err(Error::BasisMismatch(
            "state and quasi-momentum basis differ in size".into(),
        ));
    }
    let u = quasimomentum_matrix(params)?;
    occupation_distribution(&fock_basis_change(&u, state)?)
}
