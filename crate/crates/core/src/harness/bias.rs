//! Clustering-bias sweeps over DMRG runs.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::laminate::{lamination_parameters, ComponentMask, StackingSequence};
use crate::objective::{distance, ConstraintWeights, DistanceMetric, ObjectiveSpec};
use crate::tensornet::{dmrg_solve, hamiltonian_mpo, DmrgConfig};

use super::stats::spearman;
use super::targets::TargetInstance;

/// DMRG table penalties without the contiguity term, which would cap the
/// block lengths the bias rewards.
pub fn bias_sweep_weights(plies: usize) -> ConstraintWeights {
    ConstraintWeights { contiguity: 0.0, ..ConstraintWeights::dmrg_defaults(plies) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub alpha: f64,
    pub stack: Vec<usize>,
    pub distance: f64,
    pub adjacent_equal_pairs: usize,
    /// Loss including the bias term.
    pub loss: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSweep {
    pub instance_id: String,
    pub points: Vec<BiasPoint>,
    /// Spearman correlation of α against the adjacent-equal-pair count.
    pub spearman: Option<f64>,
}

/// Best-of-trials DMRG per α with the bias fused into the Hamiltonian.
pub fn bias_sweep(target: &TargetInstance, alphas: &[f64], dmrg: &DmrgConfig, weights: ConstraintWeights) -> Result<BiasSweep> {
    let base = ObjectiveSpec::lp_distance(target.angle_set.clone(), target.plies, target.target, DistanceMetric::Squared, weights)?;
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let spec = base.clone().with_bias(alpha);
        let out = dmrg_solve(&hamiltonian_mpo(&spec)?, dmrg)?;
        let st = StackingSequence::new(out.best.clone(), &target.angle_set)?;
        points.push(BiasPoint {
            alpha,
            distance: distance(&lamination_parameters(&st, &target.angle_set), &target.target, ComponentMask::ALL),
            adjacent_equal_pairs: st.adjacent_equal_pairs(),
            loss: spec.evaluate(&out.best),
            valid: spec.is_valid(&out.best),
            stack: out.best,
        });
    }
    let a: Vec<f64> = points.iter().map(|p| p.alpha).collect();
    let c: Vec<f64> = points.iter().map(|p| p.adjacent_equal_pairs as f64).collect();
    Ok(BiasSweep { instance_id: target.id.clone(), spearman: spearman(&a, &c), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate_targets;
    use crate::laminate::PlyAngleSet;
    use crate::tensornet::dmrg_solve;

    #[test]
    fn zero_alpha_is_plain_dmrg_and_negative_alpha_clusters() {
        let set = PlyAngleSet::conventional();
        let t = &generate_targets(12, 1, &set, true, 8).unwrap()[0];
        let cfg = DmrgConfig { max_bond: 8, sweeps: 6, trials: 3, ..DmrgConfig::default() };
        let w = bias_sweep_weights(12);
        let sweep = bias_sweep(t, &[-1.0, 0.0], &cfg, w).unwrap();
        let spec = ObjectiveSpec::lp_distance(set, 12, t.target, DistanceMetric::Squared, w).unwrap();
        let plain = dmrg_solve(&hamiltonian_mpo(&spec).unwrap(), &cfg).unwrap();
        assert_eq!(sweep.points[1].stack, plain.best);
        assert!(sweep.points[0].adjacent_equal_pairs >= 9, "{:?}", sweep.points[0]);
        assert_eq!(bias_sweep_weights(10).contiguity, 0.0);
    }
}
