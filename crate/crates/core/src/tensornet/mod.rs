//! Matrix product states and operators, and the DMRG solver.
//!
//! All operators are diagonal in the computational basis, so an MPO site is
//! stored as a sparse list of `(w_left, w_right, diag)` transitions.

mod automaton;
mod dmrg;
mod eigen;
mod hamiltonian;
mod mpo;
mod mps;

pub use automaton::{AutomatonTerm, Channel};
pub use dmrg::{dmrg_run, dmrg_solve, DmrgConfig, DmrgOutcome, DmrgRun, SweepDirection, TrialSummary, DENSE_LIMIT};
pub use eigen::{lowest_dense, lowest_lanczos, LanczosOptions};
pub use hamiltonian::{hamiltonian_mpo, mpo_bias, mpo_distance_squared, mpo_penalties};
pub use mpo::{mpo_sum, MatrixProductOperator, MpoEntry, MpoSite};
pub use mps::{collapse_to_basis, MatrixProductState, SiteTensor};
