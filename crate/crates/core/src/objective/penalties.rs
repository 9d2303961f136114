//! Manufacturing-constraint penalties.
//!
//! Local constraints (disorientation, contiguity) are window counts; global
//! constraints (balance, 10% rule) use squared imbalances and squared deficits.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::laminate::{folded_difference, PlyAngleSet, StackingSequence};

const ANGLE_EPS: f64 = 1e-9;

fn default_contiguity_limit() -> usize {
    5
}

fn default_disorientation_limit() -> f64 {
    45.0
}

/// Penalty scales `γ_c` and limits of the local constraints. A constraint with
/// `γ = 0` is inactive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintWeights {
    #[serde(default)]
    pub disorientation: f64,
    #[serde(default)]
    pub contiguity: f64,
    #[serde(default)]
    pub balanced: f64,
    #[serde(default)]
    pub ten_percent: f64,
    #[serde(default = "default_contiguity_limit")]
    pub contiguity_limit: usize,
    #[serde(default = "default_disorientation_limit")]
    pub disorientation_limit: f64,
}

impl Default for ConstraintWeights {
    fn default() -> Self {
        Self::none()
    }
}

impl ConstraintWeights {
    pub fn none() -> Self {
        Self::uniform(0.0)
    }

    /// The same scale for all four constraints.
    pub fn uniform(gamma: f64) -> Self {
        Self {
            disorientation: gamma,
            contiguity: gamma,
            balanced: gamma,
            ten_percent: gamma,
            contiguity_limit: default_contiguity_limit(),
            disorientation_limit: default_disorientation_limit(),
        }
    }

    /// DMRG defaults: `(1.0, 0.5, 0.2, 0.2) / N` for disorientation, contiguity,
    /// balance and the 10% rule.
    pub fn dmrg_defaults(plies: usize) -> Self {
        let n = plies as f64;
        Self {
            disorientation: 1.0 / n,
            contiguity: 0.5 / n,
            balanced: 0.2 / n,
            ten_percent: 0.2 / n,
            ..Self::none()
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            disorientation: self.disorientation * c,
            contiguity: self.contiguity * c,
            balanced: self.balanced * c,
            ten_percent: self.ten_percent * c,
            ..*self
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.disorientation == 0.0
            && self.contiguity == 0.0
            && self.balanced == 0.0
            && self.ten_percent == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let gammas = [self.disorientation, self.contiguity, self.balanced, self.ten_percent];
        if gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(SsrError::InvalidObjective(
                "penalty weights must be finite and non-negative".into(),
            ));
        }
        if self.contiguity_limit == 0 {
            return Err(SsrError::InvalidObjective("contiguity limit must be >= 1".into()));
        }
        if !(self.disorientation_limit >= 0.0) {
            return Err(SsrError::InvalidObjective(
                "disorientation limit must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// `true` if plies at angle indices `s` and `t` may not be neighbours.
pub fn disorientation_violated(set: &PlyAngleSet, s: usize, t: usize, limit_deg: f64) -> bool {
    folded_difference(set.angle(s), set.angle(t)) > limit_deg + ANGLE_EPS
}

pub fn penalty_disorientation(stack: &StackingSequence, set: &PlyAngleSet, limit_deg: f64) -> usize {
    stack
        .indices()
        .windows(2)
        .filter(|w| disorientation_violated(set, w[0], w[1], limit_deg))
        .count()
}

/// Number of windows of `limit + 1` consecutive identical plies.
pub fn penalty_contiguity(stack: &StackingSequence, limit: usize) -> usize {
    contiguity_violations(stack.indices(), limit)
}

pub(crate) fn contiguity_violations(indices: &[usize], limit: usize) -> usize {
    let mut total = 0;
    let mut run = 0;
    let mut prev = usize::MAX;
    for &s in indices {
        run = if s == prev { run + 1 } else { 1 };
        prev = s;
        if run > limit {
            total += 1;
        }
    }
    total
}

/// A `+φ / -φ` pair of the balance condition. A side is `None` when that
/// orientation is not in the angle set (its count is then zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalancePair {
    pub plus: Option<usize>,
    pub minus: Option<usize>,
}

/// Off-axis `±φ` pairs of the set (all angles except 0° and 90°).
pub fn balance_pairs(set: &PlyAngleSet) -> Vec<BalancePair> {
    let mut pairs = Vec::new();
    for (i, &a) in set.angles().iter().enumerate() {
        if a.abs() < ANGLE_EPS || (a - 90.0).abs() < ANGLE_EPS {
            continue;
        }
        let partner = set.index_of(-a);
        if a > 0.0 {
            pairs.push(BalancePair {
                plus: Some(i),
                minus: partner,
            });
        } else if partner.is_none() {
            pairs.push(BalancePair {
                plus: None,
                minus: Some(i),
            });
        }
    }
    pairs
}

pub(crate) fn balanced_from_counts(counts: &[usize], pairs: &[BalancePair]) -> u64 {
    pairs
        .iter()
        .map(|p| {
            let plus = p.plus.map_or(0, |i| counts[i]) as i64;
            let minus = p.minus.map_or(0, |i| counts[i]) as i64;
            ((plus - minus) * (plus - minus)) as u64
        })
        .sum()
}

/// `Σ_{±φ} (count(+φ) − count(−φ))²`.
pub fn penalty_balanced(stack: &StackingSequence, set: &PlyAngleSet) -> u64 {
    balanced_from_counts(&stack.counts(set.len()), &balance_pairs(set))
}

/// Indices of 0°, 90°, +45° and -45°, required by the 10% rule.
pub fn ten_percent_angles(set: &PlyAngleSet) -> Result<[usize; 4]> {
    let mut out = [0; 4];
    for (slot, angle) in out.iter_mut().zip([0.0, 90.0, 45.0, -45.0]) {
        *slot = set.index_of(angle).ok_or_else(|| {
            SsrError::InvalidObjective(format!("10% rule needs {angle}° in the angle set"))
        })?;
    }
    Ok(out)
}

/// Minimum ply count per required angle: `⌈0.1 N⌉`.
pub fn ten_percent_minimum(plies: usize) -> usize {
    plies.div_ceil(10)
}

pub(crate) fn ten_percent_from_counts(counts: &[usize], required: &[usize; 4], plies: usize) -> u64 {
    let m = ten_percent_minimum(plies);
    required
        .iter()
        .map(|&i| {
            let deficit = m.saturating_sub(counts[i]) as u64;
            deficit * deficit
        })
        .sum()
}

/// `Σ_θ max(0, ⌈0.1 N⌉ − count(θ))²` over θ ∈ {0°, 90°, +45°, −45°}.
pub fn penalty_ten_percent(stack: &StackingSequence, set: &PlyAngleSet) -> Result<u64> {
    let required = ten_percent_angles(set)?;
    Ok(ten_percent_from_counts(&stack.counts(set.len()), &required, stack.len()))
}

/// `α` times the number of adjacent equal plies.
pub fn clustering_bias(stack: &StackingSequence, alpha: f64) -> f64 {
    alpha * stack.adjacent_equal_pairs() as f64
}

/// Raw violation counts of all four constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub disorientation: usize,
    pub contiguity: usize,
    pub balanced: u64,
    /// `None` if the angle set lacks one of the angles the rule refers to.
    pub ten_percent: Option<u64>,
}

impl ViolationReport {
    pub fn evaluate(stack: &StackingSequence, set: &PlyAngleSet, weights: &ConstraintWeights) -> Self {
        Self {
            disorientation: penalty_disorientation(stack, set, weights.disorientation_limit),
            contiguity: penalty_contiguity(stack, weights.contiguity_limit),
            balanced: penalty_balanced(stack, set),
            ten_percent: penalty_ten_percent(stack, set).ok(),
        }
    }

    /// Whether every constraint with a positive weight holds.
    pub fn satisfies(&self, weights: &ConstraintWeights) -> bool {
        (weights.disorientation == 0.0 || self.disorientation == 0)
            && (weights.contiguity == 0.0 || self.contiguity == 0)
            && (weights.balanced == 0.0 || self.balanced == 0)
            && (weights.ten_percent == 0.0 || self.ten_percent == Some(0))
    }

    pub fn all_satisfied(&self) -> bool {
        self.disorientation == 0
            && self.contiguity == 0
            && self.balanced == 0
            && self.ten_percent == Some(0)
    }

    /// `Σ γ_c · penalty_c`; an unevaluable 10% rule counts as zero here.
    pub fn weighted(&self, weights: &ConstraintWeights) -> f64 {
        weights.disorientation * self.disorientation as f64
            + weights.contiguity * self.contiguity as f64
            + weights.balanced * self.balanced as f64
            + weights.ten_percent * self.ten_percent.unwrap_or(0) as f64
    }

    pub fn total_violations(&self) -> u64 {
        self.disorientation as u64
            + self.contiguity as u64
            + self.balanced
            + self.ten_percent.unwrap_or(0)
    }
}

/// `true` iff every constraint with `γ > 0` is satisfied.
pub fn is_valid(stack: &StackingSequence, set: &PlyAngleSet, weights: &ConstraintWeights) -> bool {
    ViolationReport::evaluate(stack, set, weights).satisfies(weights)
}
