//! Laminate mechanics for symmetric laminates.
//!
//! Plies are indexed from the midplane outward over one half of the laminate:
//! index 0 is the midplane ply and index `N - 1` the outermost ply. Angles are
//! stored in degrees everywhere and only converted to radians inside
//! [`angle_functions`].

mod angles;
mod material;
mod params;
mod plate;

pub use angles::{angle_functions, folded_difference, PlyAngleSet, StackingSequence};
pub use material::{
    abd_from_lp, gamma_matrices, q_matrix, tsai_pagano, GammaMatrices, MaterialProperties,
    ReducedStiffness, StiffnessMatrices, TsaiPagano,
};
pub(crate) use params::lamination_parameters_weighted as params_weighted;
pub use params::{lamination_parameters, ply_weights, ComponentMask, LaminationParameters, PlyWeights};
pub use plate::{
    buckling_factor, fundamental_frequency_sq, transverse_shear_stiffness, PlateLoadCase,
    DEFAULT_SHEAR_CORRECTION,
};
