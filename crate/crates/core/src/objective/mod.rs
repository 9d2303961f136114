//! The stacking-sequence loss landscape.
//!
//! [`ObjectiveSpec::evaluate`] is the direct-evaluation oracle `H_total(s)`
//! every solver is scored against.

mod penalties;

use serde::{Deserialize, Serialize};

pub use penalties::{
    balance_pairs, clustering_bias, disorientation_violated, is_valid, penalty_balanced,
    penalty_contiguity, penalty_disorientation, penalty_ten_percent, ten_percent_angles,
    ten_percent_minimum, BalancePair, ConstraintWeights, ViolationReport,
};
pub(crate) use penalties::{balanced_from_counts, contiguity_violations, ten_percent_from_counts};

use crate::error::{Result, SsrError};
use crate::laminate::{
    abd_from_lp, buckling_factor, ply_weights, ComponentMask, GammaMatrices, LaminationParameters,
    MaterialProperties, PlateLoadCase, PlyAngleSet, PlyWeights, StackingSequence,
};

/// Euclidean distance over the active components.
pub fn distance(lp: &LaminationParameters, target: &LaminationParameters, mask: ComponentMask) -> f64 {
    distance_squared(lp, target, mask).sqrt()
}

/// Squared Euclidean distance over the active components.
pub fn distance_squared(lp: &LaminationParameters, target: &LaminationParameters, mask: ComponentMask) -> f64 {
    let x = lp.to_array();
    let y = target.to_array();
    mask.active().map(|i| (x[i] - y[i]) * (x[i] - y[i])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    Euclidean,
    Squared,
}

/// Plate, material and thickness for the buckling objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucklingSetup {
    pub material: MaterialProperties,
    pub plate: PlateLoadCase,
    pub thickness: f64,
    /// Offset keeping `λ_max − λ_B` positive; derived from the angle set when absent.
    #[serde(default)]
    pub lambda_max: Option<f64>,
}

impl Default for BucklingSetup {
    fn default() -> Self {
        Self {
            material: MaterialProperties::reference_cfrp(),
            plate: PlateLoadCase::unit_biaxial(),
            thickness: 0.1,
            lambda_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind {
    LpDistance {
        target: LaminationParameters,
        metric: DistanceMetric,
    },
    Buckling(BucklingSetup),
}

#[derive(Debug, Clone)]
struct BucklingCache {
    gammas: GammaMatrices,
    lambda_max: f64,
}

/// Loss function of one retrieval problem: objective term, weighted
/// constraint penalties and the nearest-neighbour clustering bias.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    angle_set: PlyAngleSet,
    plies: usize,
    kind: ObjectiveKind,
    weights: ConstraintWeights,
    bias_alpha: f64,
    mask: ComponentMask,
    ply_weights: PlyWeights,
    pairs: Vec<BalancePair>,
    ten_percent: Option<[usize; 4]>,
    forbidden: Vec<bool>,
    buckling: Option<BucklingCache>,
}

impl ObjectiveSpec {
    pub fn lp_distance(
        angle_set: PlyAngleSet,
        plies: usize,
        target: LaminationParameters,
        metric: DistanceMetric,
        weights: ConstraintWeights,
    ) -> Result<Self> {
        if !target.is_finite() {
            return Err(SsrError::InvalidObjective("target must be finite".into()));
        }
        Self::build(angle_set, plies, ObjectiveKind::LpDistance { target, metric }, weights)
    }

    pub fn buckling(
        angle_set: PlyAngleSet,
        plies: usize,
        setup: BucklingSetup,
        weights: ConstraintWeights,
    ) -> Result<Self> {
        Self::build(angle_set, plies, ObjectiveKind::Buckling(setup), weights)
    }

    fn build(angle_set: PlyAngleSet, plies: usize, kind: ObjectiveKind, weights: ConstraintWeights) -> Result<Self> {
        if plies == 0 {
            return Err(SsrError::InvalidObjective("ply count must be positive".into()));
        }
        weights.validate()?;
        let ten_percent = ten_percent_angles(&angle_set).ok();
        if weights.ten_percent > 0.0 && ten_percent.is_none() {
            return Err(SsrError::InvalidObjective(
                "10% rule is active but the angle set lacks 0°, 90° or ±45°".into(),
            ));
        }
        let d = angle_set.len();
        let mut forbidden = vec![false; d * d];
        for s in 0..d {
            for t in 0..d {
                forbidden[s * d + t] = disorientation_violated(&angle_set, s, t, weights.disorientation_limit);
            }
        }
        let mut spec = Self {
            mask: ComponentMask::for_angle_set(&angle_set),
            ply_weights: ply_weights(plies),
            pairs: balance_pairs(&angle_set),
            ten_percent,
            forbidden,
            angle_set,
            plies,
            kind,
            weights,
            bias_alpha: 0.0,
            buckling: None,
        };
        if let ObjectiveKind::Buckling(setup) = &spec.kind {
            setup.material.validate()?;
            setup.plate.validate()?;
            if !(setup.thickness > 0.0) {
                return Err(SsrError::InvalidObjective("thickness must be positive".into()));
            }
            let gammas = GammaMatrices::for_material(&setup.material)?;
            let upper = spec.buckling_upper_bound(&gammas, setup)?;
            let lambda_max = match setup.lambda_max {
                Some(l) if l < upper => {
                    return Err(SsrError::InvalidObjective(format!(
                        "lambda_max {l} below the largest achievable buckling factor {upper}"
                    )))
                }
                Some(l) => l,
                None => 1.5 * upper,
            };
            spec.buckling = Some(BucklingCache { gammas, lambda_max });
        }
        Ok(spec)
    }

    /// λ_B is affine in vD and vD is a convex combination of the per-angle
    /// moments, so its maximum is attained by a single-angle stack.
    fn buckling_upper_bound(&self, gammas: &GammaMatrices, setup: &BucklingSetup) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for s in 0..self.angle_set.len() {
            let f = *self.angle_set.functions(s);
            let lp = LaminationParameters::new(f, f);
            let d = abd_from_lp(&lp, setup.thickness, gammas).d;
            best = best.max(buckling_factor(&d, &setup.plate)?);
        }
        Ok(best)
    }

    pub fn with_bias(mut self, alpha: f64) -> Self {
        self.bias_alpha = alpha;
        self
    }

    pub fn with_weights(&self, weights: ConstraintWeights) -> Result<Self> {
        let mut kind = self.kind.clone();
        if let (ObjectiveKind::Buckling(setup), Some(cache)) = (&mut kind, &self.buckling) {
            setup.lambda_max = Some(cache.lambda_max);
        }
        Ok(Self::build(self.angle_set.clone(), self.plies, kind, weights)?.with_bias(self.bias_alpha))
    }

    pub fn angle_set(&self) -> &PlyAngleSet {
        &self.angle_set
    }

    pub fn plies(&self) -> usize {
        self.plies
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn weights(&self) -> &ConstraintWeights {
        &self.weights
    }

    pub fn bias_alpha(&self) -> f64 {
        self.bias_alpha
    }

    pub fn mask(&self) -> ComponentMask {
        self.mask
    }

    pub fn ply_weights(&self) -> &PlyWeights {
        &self.ply_weights
    }

    pub fn target(&self) -> Option<&LaminationParameters> {
        match &self.kind {
            ObjectiveKind::LpDistance { target, .. } => Some(target),
            ObjectiveKind::Buckling(_) => None,
        }
    }

    pub fn lambda_max(&self) -> Option<f64> {
        self.buckling.as_ref().map(|b| b.lambda_max)
    }

    pub fn buckling_setup(&self) -> Option<&BucklingSetup> {
        match &self.kind {
            ObjectiveKind::Buckling(s) => Some(s),
            _ => None,
        }
    }

    pub fn lamination_parameters(&self, indices: &[usize]) -> LaminationParameters {
        crate::laminate::params_weighted(indices, &self.angle_set, &self.ply_weights)
    }

    /// Validates length and index range, then evaluates.
    pub fn total_loss(&self, stack: &StackingSequence) -> Result<f64> {
        self.check(stack)?;
        Ok(self.evaluate(stack.indices()))
    }

    fn check(&self, stack: &StackingSequence) -> Result<()> {
        if stack.len() != self.plies {
            return Err(SsrError::DimensionMismatch(format!(
                "stack has {} plies, objective expects {}",
                stack.len(),
                self.plies
            )));
        }
        if stack.indices().iter().any(|&s| s >= self.angle_set.len()) {
            return Err(SsrError::InvalidStack("index outside the angle set".into()));
        }
        Ok(())
    }

    /// `H_total` for a raw index vector of the right length.
    ///
    /// # Panics
    /// If an index is outside the angle set.
    pub fn evaluate(&self, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.plies);
        let objective = match &self.kind {
            ObjectiveKind::LpDistance { target, metric } => {
                let lp = self.lamination_parameters(indices);
                match metric {
                    DistanceMetric::Euclidean => distance(&lp, target, self.mask),
                    DistanceMetric::Squared => distance_squared(&lp, target, self.mask),
                }
            }
            ObjectiveKind::Buckling(_) => {
                let cache = self.buckling.as_ref().expect("buckling cache");
                cache.lambda_max - self.buckling_factor_of(indices)
            }
        };
        objective + self.penalty(indices) + self.bias(indices)
    }

    /// Distance (never squared) to the target, `None` for the buckling objective.
    pub fn distance_of(&self, indices: &[usize]) -> Option<f64> {
        self.target()
            .map(|t| distance(&self.lamination_parameters(indices), t, self.mask))
    }

    pub fn buckling_factor_of(&self, indices: &[usize]) -> f64 {
        let (setup, cache) = match (&self.kind, &self.buckling) {
            (ObjectiveKind::Buckling(s), Some(c)) => (s, c),
            _ => {
                let setup = BucklingSetup::default();
                let gammas = GammaMatrices::for_material(&setup.material).expect("reference material");
                let d = abd_from_lp(&self.lamination_parameters(indices), setup.thickness, &gammas).d;
                return buckling_factor(&d, &setup.plate).expect("validated plate");
            }
        };
        let d = abd_from_lp(&self.lamination_parameters(indices), setup.thickness, &cache.gammas).d;
        buckling_factor(&d, &setup.plate).expect("plate validated at construction")
    }

    /// `Σ γ_c · penalty_c` for the active constraints.
    pub fn penalty(&self, indices: &[usize]) -> f64 {
        let w = &self.weights;
        let d = self.angle_set.len();
        let mut total = 0.0;
        if w.disorientation > 0.0 {
            let count = indices
                .windows(2)
                .filter(|p| self.forbidden[p[0] * d + p[1]])
                .count();
            total += w.disorientation * count as f64;
        }
        if w.contiguity > 0.0 {
            total += w.contiguity * contiguity_violations(indices, w.contiguity_limit) as f64;
        }
        if w.balanced > 0.0 || w.ten_percent > 0.0 {
            let mut counts = vec![0usize; d];
            for &s in indices {
                counts[s] += 1;
            }
            if w.balanced > 0.0 {
                total += w.balanced * balanced_from_counts(&counts, &self.pairs) as f64;
            }
            if w.ten_percent > 0.0 {
                let req = self.ten_percent.as_ref().expect("checked at construction");
                total += w.ten_percent * ten_percent_from_counts(&counts, req, indices.len()) as f64;
            }
        }
        total
    }

    pub fn bias(&self, indices: &[usize]) -> f64 {
        if self.bias_alpha == 0.0 {
            return 0.0;
        }
        self.bias_alpha * indices.windows(2).filter(|p| p[0] == p[1]).count() as f64
    }

    pub fn violations(&self, stack: &StackingSequence) -> ViolationReport {
        ViolationReport::evaluate(stack, &self.angle_set, &self.weights)
    }

    /// Satisfies every constraint whose weight is positive.
    pub fn is_valid(&self, indices: &[usize]) -> bool {
        let stack = StackingSequence::from_indices_unchecked(indices.to_vec());
        self.violations(&stack).satisfies(&self.weights)
    }
}
