use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::params::LaminationParameters;
use crate::error::{Result, SsrError};

/// Orthotropic ply properties. Moduli in GPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialProperties {
    pub e1: f64,
    pub e2: f64,
    pub g12: f64,
    pub nu12: f64,
    /// Transverse shear moduli, only needed for the fundamental frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g13: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g23: Option<f64>,
}

impl MaterialProperties {
    pub fn new(e1: f64, e2: f64, g12: f64, nu12: f64) -> Result<Self> {
        let m = Self {
            e1,
            e2,
            g12,
            nu12,
            g13: None,
            g23: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_transverse_shear(mut self, g13: f64, g23: f64) -> Result<Self> {
        if !(g13 > 0.0 && g23 > 0.0) {
            return Err(SsrError::InvalidMaterial(
                "transverse shear moduli must be positive".into(),
            ));
        }
        self.g13 = Some(g13);
        self.g23 = Some(g23);
        Ok(self)
    }

    /// Carbon/epoxy reference ply: E1 = 177, E2 = 10.8, G12 = 7.6 GPa, ν12 = 0.27.
    pub fn reference_cfrp() -> Self {
        Self::new(177.0, 10.8, 7.6, 0.27).expect("reference material is valid")
    }

    pub fn nu21(&self) -> f64 {
        self.nu12 * self.e2 / self.e1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e1 > 0.0 && self.e2 > 0.0 && self.g12 > 0.0) {
            return Err(SsrError::InvalidMaterial("moduli must be positive".into()));
        }
        if !(self.nu12 > 0.0 && self.nu12 < 0.5) {
            return Err(SsrError::InvalidMaterial(format!(
                "nu12 = {} outside (0, 0.5)",
                self.nu12
            )));
        }
        if self.nu12 * self.nu21() >= 1.0 {
            return Err(SsrError::InvalidMaterial("nu12 * nu21 >= 1".into()));
        }
        Ok(())
    }
}

/// Plane-stress reduced stiffness entries of a unidirectional ply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedStiffness {
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
    pub q66: f64,
}

impl ReducedStiffness {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.q11, self.q12, 0.0, //
            self.q12, self.q22, 0.0, //
            0.0, 0.0, self.q66,
        )
    }
}

/// Reduced stiffness with `Q12 = ν21 E1 / (1 - ν12 ν21)`.
pub fn q_matrix(mat: &MaterialProperties) -> Result<ReducedStiffness> {
    let nu21 = mat.nu21();
    let denom = 1.0 - mat.nu12 * nu21;
    if denom <= 0.0 {
        return Err(SsrError::InvalidMaterial("1 - nu12 * nu21 <= 0".into()));
    }
    Ok(ReducedStiffness {
        q11: mat.e1 / denom,
        q12: nu21 * mat.e1 / denom,
        q22: mat.e2 / denom,
        q66: mat.g12,
    })
}

/// Tsai-Pagano material invariants.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TsaiPagano {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
    pub u5: f64,
}

pub fn tsai_pagano(q: &ReducedStiffness) -> TsaiPagano {
    let ReducedStiffness { q11, q12, q22, q66 } = *q;
    TsaiPagano {
        u1: (3.0 * q11 + 3.0 * q22 + 2.0 * q12 + 4.0 * q66) / 8.0,
        u2: (q11 - q22) / 2.0,
        u3: (q11 + q22 - 2.0 * q12 - 4.0 * q66) / 8.0,
        u4: (q11 + q22 + 6.0 * q12 - 4.0 * q66) / 8.0,
        u5: (q11 + q22 - 2.0 * q12 + 4.0 * q66) / 8.0,
    }
}

/// The five matrices `Γ0..Γ4` mapping lamination parameters to stiffness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMatrices(pub [Matrix3<f64>; 5]);

pub fn gamma_matrices(u: &TsaiPagano) -> GammaMatrices {
    let TsaiPagano { u1, u2, u3, u4, u5 } = *u;
    let h2 = u2 / 2.0;
    GammaMatrices([
        Matrix3::new(u1, u4, 0.0, u4, u1, 0.0, 0.0, 0.0, u5),
        Matrix3::new(u2, 0.0, 0.0, 0.0, -u2, 0.0, 0.0, 0.0, 0.0),
        Matrix3::new(0.0, 0.0, h2, 0.0, 0.0, h2, h2, h2, 0.0),
        Matrix3::new(u3, -u3, 0.0, -u3, u3, 0.0, 0.0, 0.0, -u3),
        Matrix3::new(0.0, 0.0, u3, 0.0, 0.0, -u3, u3, -u3, 0.0),
    ])
}

impl GammaMatrices {
    pub fn for_material(mat: &MaterialProperties) -> Result<Self> {
        Ok(gamma_matrices(&tsai_pagano(&q_matrix(mat)?)))
    }

    fn combine(&self, v: &[f64; 4]) -> Matrix3<f64> {
        let g = &self.0;
        g[0] + g[1] * v[0] + g[2] * v[1] + g[3] * v[2] + g[4] * v[3]
    }
}

/// In-plane and bending stiffness of a symmetric laminate (`B` vanishes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessMatrices {
    pub a: Matrix3<f64>,
    pub d: Matrix3<f64>,
    pub h: f64,
}

pub fn abd_from_lp(lp: &LaminationParameters, h: f64, gammas: &GammaMatrices) -> StiffnessMatrices {
    StiffnessMatrices {
        a: gammas.combine(&lp.a) * h,
        d: gammas.combine(&lp.d) * (h * h * h / 12.0),
        h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::{lamination_parameters, PlyAngleSet, StackingSequence};
    use approx::assert_relative_eq;

    #[test]
    fn reference_material_q() {
        let q = q_matrix(&MaterialProperties::reference_cfrp()).unwrap();
        // Frozen from nu21 = 0.27 * 10.8 / 177 and 1 - nu12 nu21 = 0.995551...
        assert_relative_eq!(q.q11, 177.791, epsilon = 1e-3);
        assert_relative_eq!(q.q22, 10.848, epsilon = 1e-3);
        assert_relative_eq!(q.q12, 2.929, epsilon = 1e-3);
        assert_eq!(q.q66, 7.6);
        let u = tsai_pagano(&q);
        assert_relative_eq!(u.u2, 83.47, epsilon = 1e-2);
    }

    #[test]
    fn isotropic_limit() {
        let e = 70.0;
        let nu = 0.3;
        let m = MaterialProperties::new(e, e, e / (2.0 * (1.0 + nu)), nu).unwrap();
        let q = q_matrix(&m).unwrap();
        assert_relative_eq!(q.q11, q.q22);
        assert_eq!(tsai_pagano(&q).u2, 0.0);
        // Isotropic: U3 = 0, so the anisotropic Γ3, Γ4 vanish.
        let g = gamma_matrices(&tsai_pagano(&q));
        assert!(g.0[3].norm() < 1e-12 && g.0[4].norm() < 1e-12);
    }

    #[test]
    fn invariants_by_substitution() {
        let q = ReducedStiffness {
            q11: 1.0,
            q12: 0.0,
            q22: 1.0,
            q66: 0.0,
        };
        let u = tsai_pagano(&q);
        assert_eq!(
            [u.u1, u.u2, u.u3, u.u4, u.u5],
            [6.0 / 8.0, 0.0, 2.0 / 8.0, 2.0 / 8.0, 2.0 / 8.0]
        );
    }

    #[test]
    fn gamma_shapes() {
        let g = gamma_matrices(&TsaiPagano {
            u2: 1.0,
            ..Default::default()
        });
        assert_eq!(g.0[1], Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -1.0, 0.0)));
        let g = gamma_matrices(&TsaiPagano {
            u1: 1.3,
            u2: 0.2,
            u3: 0.0,
            u4: 0.7,
            u5: 0.4,
        });
        assert_eq!(g.0[3], Matrix3::zeros());
        assert_eq!(g.0[4], Matrix3::zeros());
        assert_eq!(g.0[0], g.0[0].transpose());
    }

    #[test]
    fn stiffness_at_quasi_isotropic_point_and_zero_thickness() {
        let g = GammaMatrices::for_material(&MaterialProperties::reference_cfrp()).unwrap();
        let s = abd_from_lp(&LaminationParameters::default(), 0.3, &g);
        assert_relative_eq!(s.a, g.0[0] * 0.3, epsilon = 1e-12);
        assert_relative_eq!(s.d, g.0[0] * (0.027 / 12.0), epsilon = 1e-12);
        let z = abd_from_lp(&LaminationParameters::default(), 0.0, &g);
        assert_eq!(z.a, Matrix3::zeros());
        assert_eq!(z.d, Matrix3::zeros());
    }

    #[test]
    fn all_zero_degree_stack() {
        let set = PlyAngleSet::conventional();
        let g = GammaMatrices::for_material(&MaterialProperties::reference_cfrp()).unwrap();
        let lp = lamination_parameters(&StackingSequence::new(vec![0; 7], &set).unwrap(), &set);
        let s = abd_from_lp(&lp, 1.0, &g);
        assert_relative_eq!(s.a, g.0[0] + g.0[1] + g.0[3], epsilon = 1e-12);
        // A single-angle laminate along the fibre recovers the ply stiffness.
        let q = q_matrix(&MaterialProperties::reference_cfrp()).unwrap().matrix();
        assert_relative_eq!(s.a, q, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_material() {
        assert!(MaterialProperties::new(-1.0, 1.0, 1.0, 0.3).is_err());
        assert!(MaterialProperties::new(1.0, 1.0, 1.0, 0.5).is_err());
    }
}
