//! Shot-based statevector simulation of the filtering variational quantum
//! eigensolver.
//!
//! Amplitudes are real: every gate used here (y-rotations, CNOTs, partial
//! swaps) is a real orthogonal matrix.

mod circuits;
mod encoding;
mod filter;
mod optimizer;
mod sampling;
mod statevector;

pub use circuits::{
    brick_pairs, hwe_apply, permutation_circuit_apply, Ansatz, CircuitKind, CircuitSpec, Gate, HardwareEfficient,
    PermutationCircuit, ShiftRule, MAX_SUBSPACE,
};
pub use encoding::PlyEncoding;
pub use filter::{filter_value, FilterKind, FILTER_CLAMP};
pub use optimizer::{
    fvqe_run, fvqe_run_observed, fvqe_step, AnsatzChoice, FvqeConfig, FvqeIteration, FvqeOutcome, FvqeProblem,
    FvqeRound, FvqeSolver, PenaltyEscalation, SampleStats, Snapshot, StepDiagnostics,
};
pub use sampling::{distribution, sample, Distribution};
pub use statevector::{Statevector, MAX_FULL_PLIES};
