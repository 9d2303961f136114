use serde::{Deserialize, Serialize};

use super::angles::{PlyAngleSet, StackingSequence};

/// In-plane (`a`) and bending (`d`) lamination parameters of a symmetric laminate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LaminationParameters {
    pub a: [f64; 4],
    pub d: [f64; 4],
}

impl LaminationParameters {
    pub fn new(a: [f64; 4], d: [f64; 4]) -> Self {
        Self { a, d }
    }

    /// Components ordered `[vA1, vA2, vA3, vA4, vD1, vD2, vD3, vD4]`.
    pub fn to_array(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(&self.a);
        out[4..].copy_from_slice(&self.d);
        out
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        let mut a = [0.0; 4];
        let mut d = [0.0; 4];
        a.copy_from_slice(&v[..4]);
        d.copy_from_slice(&v[4..]);
        Self { a, d }
    }

    /// Convex combination `t * self + (1 - t) * other`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let x = self.to_array();
        let y = other.to_array();
        let mut out = [0.0; 8];
        for i in 0..8 {
            out[i] = t * x[i] + (1.0 - t) * y[i];
        }
        Self::from_array(out)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Which of the eight lamination parameters take part in distance computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMask(pub [bool; 8]);

impl ComponentMask {
    pub const ALL: Self = Self([true; 8]);

    /// Components whose trigonometric moment is not identically zero over the set:
    /// six for the conventional angles, eight for finer grids.
    pub fn for_angle_set(set: &PlyAngleSet) -> Self {
        let f = set.nonzero_functions();
        let mut m = [false; 8];
        for l in 0..4 {
            m[l] = f[l];
            m[4 + l] = f[l];
        }
        Self(m)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Positions of the active components in `[A1..A4, D1..D4]` order.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..8).filter(move |&i| self.0[i])
    }
}

/// Per-ply weights of the in-plane and bending lamination parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlyWeights {
    pub a: Vec<f64>,
    pub d: Vec<f64>,
}

/// Ply weights for a half laminate of `plies` plies with `z_n = n`:
/// `alphaA_n = 1/N`, `alphaD_n = (n³ - (n-1)³) / N³`.
pub fn ply_weights(plies: usize) -> PlyWeights {
    assert!(plies >= 1, "ply count must be positive");
    let n = plies as f64;
    let n3 = n * n * n;
    let a = vec![1.0 / n; plies];
    let d = (1..=plies)
        .map(|k| {
            let k = k as f64;
            (k * k * k - (k - 1.0) * (k - 1.0) * (k - 1.0)) / n3
        })
        .collect();
    PlyWeights { a, d }
}

pub fn lamination_parameters(stack: &StackingSequence, set: &PlyAngleSet) -> LaminationParameters {
    lamination_parameters_weighted(stack.indices(), set, &ply_weights(stack.len()))
}

pub(crate) fn lamination_parameters_weighted(
    indices: &[usize],
    set: &PlyAngleSet,
    weights: &PlyWeights,
) -> LaminationParameters {
    let mut lp = LaminationParameters::default();
    for (n, &s) in indices.iter().enumerate() {
        let f = set.functions(s);
        for l in 0..4 {
            lp.a[l] += weights.a[n] * f[l];
            lp.d[l] += weights.d[n] * f[l];
        }
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weights_small_cases() {
        let w = ply_weights(1);
        assert_eq!(w.a, vec![1.0]);
        assert_eq!(w.d, vec![1.0]);
        let w = ply_weights(2);
        assert_eq!(w.a, vec![0.5, 0.5]);
        assert_eq!(w.d, vec![0.125, 0.875]);
    }

    #[test]
    fn hand_values() {
        let set = PlyAngleSet::conventional();
        let s = StackingSequence::from_angles(&[0.0], &set).unwrap();
        let lp = lamination_parameters(&s, &set);
        assert_eq!(lp.a, [1.0, 0.0, 1.0, 0.0]);
        assert_eq!(lp.d, [1.0, 0.0, 1.0, 0.0]);

        let s = StackingSequence::from_angles(&[0.0, 90.0], &set).unwrap();
        let lp = lamination_parameters(&s, &set);
        for (got, want) in lp.a.iter().zip([0.0, 0.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in lp.d.iter().zip([-0.75, 0.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_stack_reproduces_angle_functions() {
        let set = PlyAngleSet::conventional();
        for n in 1..12 {
            let s = StackingSequence::new(vec![1; n], &set).unwrap();
            let lp = lamination_parameters(&s, &set);
            for l in 0..4 {
                assert!((lp.a[l] - [0.0, 1.0, -1.0, 0.0][l]).abs() < 1e-12);
                assert!((lp.d[l] - [0.0, 1.0, -1.0, 0.0][l]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn masks() {
        assert_eq!(ComponentMask::for_angle_set(&PlyAngleSet::conventional()).count(), 6);
        assert_eq!(ComponentMask::for_angle_set(&PlyAngleSet::fifteen_degree()).count(), 8);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(n in 1usize..400) {
            let w = ply_weights(n);
            prop_assert!((w.a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((w.d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn reversal_keeps_in_plane_parameters(idx in proptest::collection::vec(0usize..12, 1..40)) {
            let set = PlyAngleSet::fifteen_degree();
            let s = StackingSequence::new(idx, &set).unwrap();
            let a = lamination_parameters(&s, &set);
            let b = lamination_parameters(&s.reversed(), &set);
            for l in 0..4 {
                prop_assert!((a.a[l] - b.a[l]).abs() < 1e-12);
            }
        }
    }
}
