//! Exact desk-scale simulation of macroscopic relative-phase superpositions
//! created from arrays of Bose-Einstein condensates.
//!
//! The pipeline runs from a uniform number state `|N, N, N⟩` through
//!
//! * [`transform`]: its quasi-momentum occupation distribution (the "hat" state),
//! * [`hubbard`]: Bose-Hubbard ground states as a function of `U/J`,
//! * [`detection`]: sequential far-field atom detections with back-action,
//! * [`phase`]: the joint relative-phase distribution and its two cat peaks,
//! * [`number`]: number-space fringes and the analytic coherent-state pattern.

// negated float comparisons are used to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod eigen;
pub mod error;
pub mod fock;
pub mod grid;
pub mod hubbard;
pub mod number;
mod par;
pub mod phase;
pub mod sparse;
pub mod transform;

pub use detection::{
    detection_density, detection_operator_coeffs, run_sequence, sample_detection, DetectionEvent, DetectionRun,
    EtaDistribution, RunOptions,
};
pub use error::{Error, Result};
pub use fock::{
    apply_annihilation, apply_creation, log_factorial, normalize, FockBasis, OccupationVector, QuantumState,
};
pub use grid::SimplexGrid;
pub use hubbard::{build_hamiltonian, ground_state, quasimomentum_profile, Boundary, GroundState, HamiltonianParams};
pub use number::{
    coherent_pattern, fringe_analysis, number_distribution, pattern_swap_check, symmetric_swap, FringeReport,
    NumberDistribution,
};
pub use phase::{find_cat_peaks, phase_distribution, phase_overlap, swap_asymmetry, CatPeaks, PhaseGrid};
pub use sparse::SparseOperator;
pub use transform::{
    fock_basis_change, hat_distribution, occupation_distribution, product_fock_in_new_basis, quasimomentum_matrix,
    ModeMatrix, MonomialPoly, QuasiMomentumParams,
};
