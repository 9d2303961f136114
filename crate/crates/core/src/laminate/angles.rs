use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};

const SNAP: f64 = 1e-15;
const ANGLE_TOL: f64 = 1e-9;

fn snap(x: f64) -> f64 {
    if x.abs() < SNAP {
        0.0
    } else if (x - 1.0).abs() < SNAP {
        1.0
    } else if (x + 1.0).abs() < SNAP {
        -1.0
    } else {
        x
    }
}

/// Trigonometric moments `(cos 2θ, sin 2θ, cos 4θ, sin 4θ)` of a ply angle in degrees.
///
/// Multiples of the angle are reduced modulo 360° before the conversion to
/// radians and results within 1e-15 of 0 or ±1 are snapped, so multiples of
/// 45° give exact values.
pub fn angle_functions(theta_deg: f64) -> [f64; 4] {
    let two = (2.0 * theta_deg).rem_euclid(360.0).to_radians();
    let four = (4.0 * theta_deg).rem_euclid(360.0).to_radians();
    [
        snap(two.cos()),
        snap(two.sin()),
        snap(four.cos()),
        snap(four.sin()),
    ]
}

/// Angular distance between two ply orientations, folded onto [0°, 90°].
pub fn folded_difference(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).abs().rem_euclid(180.0);
    d.min(180.0 - d)
}

/// The indexed set of allowed ply angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PlyAngleSet {
    angles: Vec<f64>,
    functions: Vec<[f64; 4]>,
}

impl PlyAngleSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() < 2 {
            return Err(SsrError::InvalidAngleSet(format!(
                "need at least 2 angles, got {}",
                angles.len()
            )));
        }
        for (i, &a) in angles.iter().enumerate() {
            if !a.is_finite() || a <= -90.0 || a > 90.0 {
                return Err(SsrError::InvalidAngleSet(format!(
                    "angle {a} outside (-90, 90]"
                )));
            }
            if angles[..i].iter().any(|&b| (a - b).abs() < ANGLE_TOL) {
                return Err(SsrError::InvalidAngleSet(format!("duplicate angle {a}")));
            }
        }
        let functions = angles.iter().map(|&a| angle_functions(a)).collect();
        Ok(Self { angles, functions })
    }

    /// The conventional set in the order 0°, +45°, 90°, -45°.
    ///
    /// Consecutive indices differ by 45°, which matches the Gray-code two-qubit
    /// ply encoding used by the variational solver.
    pub fn conventional() -> Self {
        Self::new(vec![0.0, 45.0, 90.0, -45.0]).expect("conventional set is valid")
    }

    /// All orientations on a 15° grid: 0°, 15°, ..., 90°, -75°, ..., -15° (12 angles).
    pub fn fifteen_degree() -> Self {
        let mut angles: Vec<f64> = (0..=6).map(|k| 15.0 * k as f64).collect();
        angles.extend((1..=5).rev().map(|k| -15.0 * k as f64));
        Self::new(angles).expect("15-degree set is valid")
    }

    /// Evenly spaced orientations with the given step in degrees, starting at 0°.
    pub fn evenly_spaced(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) || (180.0 / step_deg).fract().abs() > 1e-9 {
            return Err(SsrError::InvalidAngleSet(format!(
                "step {step_deg} must divide 180"
            )));
        }
        let count = (180.0 / step_deg).round() as usize;
        let angles = (0..count)
            .map(|k| {
                let a = k as f64 * step_deg;
                if a > 90.0 {
                    a - 180.0
                } else {
                    a
                }
            })
            .collect();
        Self::new(angles)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, index: usize) -> f64 {
        self.angles[index]
    }

    pub fn functions(&self, index: usize) -> &[f64; 4] {
        &self.functions[index]
    }

    pub fn index_of(&self, angle_deg: f64) -> Option<usize> {
        self.angles
            .iter()
            .position(|&a| (a - angle_deg).abs() < ANGLE_TOL)
    }

    /// Trigonometric components that are not identically zero over the set,
    /// ordered `[f1, f2, f3, f4]`.
    pub fn nonzero_functions(&self) -> [bool; 4] {
        let mut out = [false; 4];
        for f in &self.functions {
            for (o, v) in out.iter_mut().zip(f) {
                *o |= *v != 0.0;
            }
        }
        out
    }
}

impl TryFrom<Vec<f64>> for PlyAngleSet {
    type Error = SsrError;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PlyAngleSet> for Vec<f64> {
    fn from(value: PlyAngleSet) -> Self {
        value.angles
    }
}

/// Ply-angle indices of the half laminate, midplane first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StackingSequence {
    indices: Vec<usize>,
}

impl StackingSequence {
    pub fn new(indices: Vec<usize>, set: &PlyAngleSet) -> Result<Self> {
        if indices.is_empty() {
            return Err(SsrError::InvalidStack("empty stack".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= set.len()) {
            return Err(SsrError::InvalidStack(format!(
                "index {bad} out of range for {} angles",
                set.len()
            )));
        }
        Ok(Self { indices })
    }

    pub(crate) fn from_indices_unchecked(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn from_angles(angles: &[f64], set: &PlyAngleSet) -> Result<Self> {
        let indices = angles
            .iter()
            .map(|&a| {
                set.index_of(a)
                    .ok_or_else(|| SsrError::InvalidStack(format!("angle {a} not in the set")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices, set)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn angles(&self, set: &PlyAngleSet) -> Vec<f64> {
        self.indices.iter().map(|&i| set.angle(i)).collect()
    }

    /// Number of plies per angle index.
    pub fn counts(&self, d: usize) -> Vec<usize> {
        let mut counts = vec![0; d];
        for &i in &self.indices {
            counts[i] += 1;
        }
        counts
    }

    pub fn reversed(&self) -> Self {
        let mut indices = self.indices.clone();
        indices.reverse();
        Self { indices }
    }

    /// Number of adjacent plies sharing the same angle index.
    pub fn adjacent_equal_pairs(&self) -> usize {
        self.indices.windows(2).filter(|w| w[0] == w[1]).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_moments_at_quarter_turns() {
        assert_eq!(angle_functions(0.0), [1.0, 0.0, 1.0, 0.0]);
        assert_eq!(angle_functions(45.0), [0.0, 1.0, -1.0, 0.0]);
        assert_eq!(angle_functions(90.0), [-1.0, 0.0, 1.0, 0.0]);
        assert_eq!(angle_functions(-45.0), [0.0, -1.0, -1.0, 0.0]);
    }

    #[test]
    fn folding() {
        assert_eq!(folded_difference(-45.0, 90.0), 45.0);
        assert_eq!(folded_difference(0.0, 90.0), 90.0);
        assert_eq!(folded_difference(75.0, -75.0), 30.0);
    }

    #[test]
    fn angle_set_validation() {
        assert!(PlyAngleSet::new(vec![0.0]).is_err());
        assert!(PlyAngleSet::new(vec![0.0, 0.0]).is_err());
        assert!(PlyAngleSet::new(vec![0.0, -90.0]).is_err());
        assert!(PlyAngleSet::new(vec![0.0, 91.0]).is_err());
        assert!(PlyAngleSet::new(vec![0.0, 90.0]).is_ok());
    }

    #[test]
    fn fifteen_degree_set() {
        let set = PlyAngleSet::fifteen_degree();
        assert_eq!(set.len(), 12);
        assert_eq!(set.nonzero_functions(), [true; 4]);
        assert_eq!(PlyAngleSet::evenly_spaced(15.0).unwrap().len(), 12);
        assert_eq!(
            PlyAngleSet::conventional().nonzero_functions(),
            [true, true, true, false]
        );
    }

    #[test]
    fn stack_rejects_bad_indices() {
        let set = PlyAngleSet::conventional();
        assert!(StackingSequence::new(vec![], &set).is_err());
        assert!(StackingSequence::new(vec![0, 4], &set).is_err());
        let s = StackingSequence::from_angles(&[0.0, -45.0], &set).unwrap();
        assert_eq!(s.indices(), &[0, 3]);
    }
}
