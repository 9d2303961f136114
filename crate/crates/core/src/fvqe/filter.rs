//! Filter functions `f(E; τ)`.

use serde::{Deserialize, Serialize};

/// Clamp applied by [`filter_value`].
pub const FILTER_CLAMP: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterKind {
    /// `(E + ε)^−τ`
    Inverse { epsilon: f64 },
    /// `exp(−τE)`
    Exponential,
}

impl FilterKind {
    pub const fn inverse() -> Self {
        FilterKind::Inverse { epsilon: 0.001 }
    }

    /// Energy transform `x(E)` with `ln f = −τ·x`.
    pub fn log_argument(&self, energy: f64) -> f64 {
        match *self {
            FilterKind::Inverse { epsilon } => (energy + epsilon).ln(),
            FilterKind::Exponential => energy,
        }
    }

    pub fn ln_value(&self, energy: f64, tau: f64) -> f64 {
        if tau == 0.0 {
            return 0.0;
        }
        -tau * self.log_argument(energy)
    }
}

/// Filter value clamped below [`FILTER_CLAMP`].
pub fn filter_value(energy: f64, tau: f64, kind: FilterKind) -> f64 {
    let ln = kind.ln_value(energy, tau);
    if ln >= FILTER_CLAMP.ln() {
        FILTER_CLAMP
    } else {
        ln.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        for e in [0.0, 0.5, 3.0] {
            assert_eq!(filter_value(e, 0.0, FilterKind::inverse()), 1.0);
            assert_eq!(filter_value(e, 0.0, FilterKind::Exponential), 1.0);
        }
        assert_eq!(filter_value(0.0, 1.0, FilterKind::Exponential), 1.0);
        assert!((filter_value(0.999, 1.0, FilterKind::inverse()) - 1.0).abs() < 1e-12);
        assert_eq!(filter_value(0.0, 200.0, FilterKind::inverse()), FILTER_CLAMP);
    }

    #[test]
    fn strictly_decreasing() {
        for kind in [FilterKind::inverse(), FilterKind::Exponential] {
            for tau in [0.1, 1.0, 20.0] {
                let v: Vec<f64> = (0..50).map(|k| filter_value(k as f64 * 0.07, tau, kind)).collect();
                assert!(v.windows(2).all(|w| w[1] < w[0]), "{kind:?} τ={tau}");
            }
        }
    }
}
