//! Stacking-sequence retrieval for symmetric composite laminates.
//!
//! The crate covers laminate mechanics, the penalised retrieval objective,
//! a diagonal-MPO DMRG solver, a shot-based F-VQE simulator, classical
//! baselines and the experiment harness.

pub mod baselines;
pub mod error;
pub mod fvqe;
pub mod harness;
pub mod laminate;
pub mod objective;
pub mod seeding;
pub mod tensornet;

pub use error::{Result, SsrError};
pub use laminate::{LaminationParameters, MaterialProperties, PlateLoadCase, PlyAngleSet, StackingSequence};
pub use objective::{ConstraintWeights, DistanceMetric, ObjectiveSpec};
