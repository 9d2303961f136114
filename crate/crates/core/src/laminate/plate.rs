use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::angles::{PlyAngleSet, StackingSequence};
use super::material::{abd_from_lp, GammaMatrices, MaterialProperties};
use super::params::lamination_parameters;
use crate::error::{Result, SsrError};

/// First-order shear correction factor used when the caller has no better value.
pub const DEFAULT_SHEAR_CORRECTION: f64 = 5.0 / 6.0;

/// Simply supported rectangular plate under bi-axial in-plane loading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateLoadCase {
    pub a: f64,
    pub b: f64,
    pub nx: f64,
    pub ny: f64,
    pub m: u32,
    pub n: u32,
}

impl PlateLoadCase {
    pub fn new(a: f64, b: f64, nx: f64, ny: f64, m: u32, n: u32) -> Result<Self> {
        let p = Self { a, b, nx, ny, m, n };
        p.validate()?;
        Ok(p)
    }

    /// Unit square plate, `NX = 2`, `NY = 1`, one half-wave in each direction.
    pub fn unit_biaxial() -> Self {
        Self::new(1.0, 1.0, 2.0, 1.0, 1, 1).expect("valid load case")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(SsrError::InvalidLoadCase("plate dimensions must be positive".into()));
        }
        if self.m == 0 || self.n == 0 {
            return Err(SsrError::InvalidLoadCase("half-wave numbers must be positive".into()));
        }
        if self.load_denominator() == 0.0 {
            return Err(SsrError::InvalidLoadCase("load denominator is zero".into()));
        }
        Ok(())
    }

    fn wave_ratios(&self) -> (f64, f64) {
        (self.m as f64 / self.a, self.n as f64 / self.b)
    }

    fn load_denominator(&self) -> f64 {
        let (p, q) = self.wave_ratios();
        p * p * self.nx + q * q * self.ny
    }
}

/// Closed-form bi-axial buckling load factor. `d` uses 1-based `(1,2,3) = (xx, yy, ss)`
/// indexing, so the twist term is `d[(2, 2)]`.
pub fn buckling_factor(d: &Matrix3<f64>, plate: &PlateLoadCase) -> Result<f64> {
    let denom = plate.load_denominator();
    if !(denom > 0.0) {
        return Err(SsrError::InvalidLoadCase(format!(
            "load denominator {denom} must be positive"
        )));
    }
    let (p, q) = plate.wave_ratios();
    let (p2, q2) = (p * p, q * q);
    let num = d[(0, 0)] * p2 * p2 + 2.0 * (d[(0, 1)] + 2.0 * d[(2, 2)]) * p2 * q2 + d[(1, 1)] * q2 * q2;
    Ok(PI * PI * num / denom)
}

/// `(A44, A55)` from per-ply rotated transverse shear moduli, `A_ij = (h/N) Σ Q̄_ij`.
pub fn transverse_shear_stiffness(
    stack: &StackingSequence,
    set: &PlyAngleSet,
    mat: &MaterialProperties,
    h: f64,
) -> Result<(f64, f64)> {
    let (g13, g23) = match (mat.g13, mat.g23) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(SsrError::InvalidMaterial(
                "fundamental frequency needs G13 and G23".into(),
            ))
        }
    };
    let mut a44 = 0.0;
    let mut a55 = 0.0;
    for &s in stack.indices() {
        let t = set.angle(s).to_radians();
        let (c2, s2) = (t.cos().powi(2), t.sin().powi(2));
        a44 += g23 * c2 + g13 * s2;
        a55 += g13 * c2 + g23 * s2;
    }
    let scale = h / stack.len() as f64;
    Ok((a44 * scale, a55 * scale))
}

/// Squared fundamental frequency of a shear-deformable simply supported plate:
/// the Schur complement of the rotational block of the first-order shear
/// deformation stiffness matrix, divided by `ρh`.
pub fn fundamental_frequency_sq(
    stack: &StackingSequence,
    set: &PlyAngleSet,
    mat: &MaterialProperties,
    plate: &PlateLoadCase,
    k_sh: f64,
    rho: f64,
    h: f64,
) -> Result<f64> {
    let (a44, a55) = transverse_shear_stiffness(stack, set, mat, h)?;
    let gammas = GammaMatrices::for_material(mat)?;
    let d = abd_from_lp(&lamination_parameters(stack, set), h, &gammas).d;
    let (d11, d12, d22, d66) = (d[(0, 0)], d[(0, 1)], d[(1, 1)], d[(2, 2)]);
    let am = plate.m as f64 * PI / plate.a;
    let bn = plate.n as f64 * PI / plate.b;

    let l11 = d11 * am * am + d66 * bn * bn + k_sh * a55;
    let l12 = (d12 + d66) * am * bn;
    let l13 = k_sh * a55 * am;
    let l22 = d66 * am * am + d22 * bn * bn + k_sh * a44;
    let l23 = k_sh * a44 * bn;
    let l33 = k_sh * a55 * am * am + k_sh * a44 * bn * bn;

    let det = l11 * l22 - l12 * l12;
    if det.abs() < 1e-300 || !det.is_finite() {
        return Err(SsrError::Singular("L11 L22 - L12² vanishes".into()));
    }
    let ka = (l12 * l23 - l13 * l22) / det;
    let kb = (l12 * l13 - l11 * l23) / det;
    Ok((l13 * ka + l23 * kb + l33) / (rho * h))
}
