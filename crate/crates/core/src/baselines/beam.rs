use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::laminate::StackingSequence;
use crate::objective::{contiguity_violations, disorientation_violated, ObjectiveKind, ObjectiveSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamConfig {
    pub beam_width: usize,
    /// Greedy repair of the balance and 10% constraints after the search.
    pub repair: bool,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self { beam_width: 64, repair: true }
    }
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(SsrError::InvalidConfig("beam_width must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Partial {
    /// Plies from the outermost inward: `plies[0]` is ply `N - 1`.
    plies: Vec<usize>,
    lp: [f64; 8],
    alpha_d: f64,
    score: f64,
}

fn local_ok(spec: &ObjectiveSpec, plies: &[usize]) -> bool {
    let w = spec.weights();
    let k = plies.len();
    if k < 2 {
        return true;
    }
    if w.disorientation > 0.0
        && disorientation_violated(spec.angle_set(), plies[k - 2], plies[k - 1], w.disorientation_limit)
    {
        return false;
    }
    if w.contiguity > 0.0 && k > w.contiguity_limit {
        let tail = &plies[k - w.contiguity_limit - 1..];
        if contiguity_violations(tail, w.contiguity_limit) > 0 {
            return false;
        }
    }
    true
}

fn local_penalty(spec: &ObjectiveSpec, plies: &[usize]) -> f64 {
    let w = spec.weights();
    let dis = plies
        .windows(2)
        .filter(|p| disorientation_violated(spec.angle_set(), p[0], p[1], w.disorientation_limit))
        .count();
    w.disorientation * dis as f64 + w.contiguity * contiguity_violations(plies, w.contiguity_limit) as f64
}

/// Partial-LP distance: the in-plane target scales with the share of plies
/// placed, the bending target with the accumulated bending weight.
fn partial_score(spec: &ObjectiveSpec, p: &Partial) -> f64 {
    let n = spec.plies() as f64;
    let placed = p.plies.len() as f64;
    let target = match spec.kind() {
        ObjectiveKind::LpDistance { target, .. } => target.to_array(),
        ObjectiveKind::Buckling(_) => return -spec.buckling_factor_of(&expanded(spec, &p.plies)),
    };
    spec.mask()
        .active()
        .map(|c| {
            let scale = if c < 4 { placed / n } else { p.alpha_d };
            let diff = p.lp[c] - target[c] * scale;
            diff * diff
        })
        .sum()
}

/// Partial stack padded with copies of its innermost ply; only used to score
/// the buckling objective, which has no partial target.
fn expanded(spec: &ObjectiveSpec, outer_first: &[usize]) -> Vec<usize> {
    let n = spec.plies();
    let mut v = vec![*outer_first.last().unwrap(); n];
    for (i, &s) in outer_first.iter().enumerate() {
        v[n - 1 - i] = s;
    }
    v
}

fn to_midplane_first(outer_first: &[usize]) -> Vec<usize> {
    outer_first.iter().rev().copied().collect()
}

/// Beam search from the outermost ply to the midplane.
pub fn beam_search(spec: &ObjectiveSpec, config: &BeamConfig) -> Result<StackingSequence> {
    config.validate()?;
    let n = spec.plies();
    let set = spec.angle_set();
    let d = set.len();
    let w = spec.ply_weights();
    let mut beam = vec![Partial {
        plies: Vec::new(),
        lp: [0.0; 8],
        alpha_d: 0.0,
        score: 0.0,
    }];
    for step in 0..n {
        let pos = n - 1 - step;
        let mut children = Vec::with_capacity(beam.len() * d);
        let mut pruned = Vec::new();
        for parent in &beam {
            for s in 0..d {
                let mut plies = parent.plies.clone();
                plies.push(s);
                let f = set.functions(s);
                let mut lp = parent.lp;
                for l in 0..4 {
                    lp[l] += w.a[pos] * f[l];
                    lp[4 + l] += w.d[pos] * f[l];
                }
                let mut child = Partial {
                    plies,
                    lp,
                    alpha_d: parent.alpha_d + w.d[pos],
                    score: 0.0,
                };
                child.score = partial_score(spec, &child);
                if local_ok(spec, &child.plies) {
                    children.push(child);
                } else {
                    pruned.push(child);
                }
            }
        }
        if children.is_empty() {
            // Every child breaks a local constraint: keep them, charged with their penalties.
            for c in &mut pruned {
                c.score += local_penalty(spec, &c.plies);
            }
            children = pruned;
        }
        children.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.plies.cmp(&b.plies)));
        children.truncate(config.beam_width);
        beam = children;
    }
    let finals: Vec<Vec<usize>> = beam.iter().map(|p| to_midplane_first(&p.plies)).collect();
    let mut best = finals
        .iter()
        .min_by(|a, b| spec.evaluate(a).total_cmp(&spec.evaluate(b)).then_with(|| a.cmp(b)))
        .cloned()
        .expect("beam is never empty");
    if config.repair && !spec.is_valid(&best) {
        best = super::repair::repair(spec, &best);
    }
    StackingSequence::new(best, set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::brute_force_min;
    use crate::laminate::{lamination_parameters, PlyAngleSet};
    use crate::objective::{ConstraintWeights, DistanceMetric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, seed: u64, w: ConstraintWeights) -> ObjectiveSpec {
        let set = PlyAngleSet::conventional();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let s = StackingSequence::new(idx, &set).unwrap();
        let t = lamination_parameters(&s, &set);
        ObjectiveSpec::lp_distance(set, n, t, DistanceMetric::Euclidean, w).unwrap()
    }

    #[test]
    fn exhaustive_width_matches_brute_force() {
        let sp = spec(5, 4, ConstraintWeights::none());
        let out = beam_search(&sp, &BeamConfig { beam_width: 4usize.pow(5), repair: false }).unwrap();
        let (best, _) = brute_force_min(&sp).unwrap();
        assert_eq!(out.indices(), &best[..]);
    }

    #[test]
    fn close_to_optimum_on_random_targets() {
        let mut good = 0;
        for seed in 0..20 {
            let sp = spec(6, 100 + seed, ConstraintWeights::none());
            let out = beam_search(&sp, &BeamConfig::default()).unwrap();
            let (_, opt) = brute_force_min(&sp).unwrap();
            if sp.evaluate(out.indices()) <= opt + 0.3 {
                good += 1;
            }
        }
        assert!(good >= 16, "{good}/20");
    }

    #[test]
    fn repaired_result_is_valid_and_locally_feasible() {
        for seed in 0..10 {
            let sp = spec(12, seed, ConstraintWeights::uniform(0.1));
            let out = beam_search(&sp, &BeamConfig::default()).unwrap();
            assert!(sp.is_valid(out.indices()), "{:?}", out.indices());
        }
        let sp = spec(10, 1, ConstraintWeights { balanced: 0.0, ten_percent: 0.0, ..ConstraintWeights::uniform(1.0) });
        let out = beam_search(&sp, &BeamConfig { beam_width: 8, repair: false }).unwrap();
        let r = sp.violations(&out);
        assert_eq!((r.disorientation, r.contiguity), (0, 0));
    }
}
