//! Classical reference solvers and the exhaustive oracles used in testing.

mod beam;
mod brute;
mod ga;
mod repair;

pub use beam::{beam_search, BeamConfig};
pub use brute::{brute_force_min, brute_force_permutations, PermutationEntry, BRUTE_FORCE_LIMIT};
pub use ga::{genetic_search, genetic_search_from, GaConfig, GaOutcome};
pub use repair::repair;
pub(crate) use brute::next_permutation;
