use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::laminate::{lamination_parameters, LaminationParameters, PlyAngleSet, StackingSequence};
use crate::objective::{ConstraintWeights, ViolationReport};
use crate::seeding::derive_seed;

pub const TARGETS_FORMAT: &str = "ssr-targets/1";
pub const DEFAULT_TARGET_COUNT: usize = 40;

/// A retrieval instance with a known zero-loss solution.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetInstance {
    pub id: String,
    pub plies: usize,
    pub angle_set: PlyAngleSet,
    pub target: LaminationParameters,
    pub generator_stack: StackingSequence,
    pub constrained: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    id: String,
    plies: usize,
    constrained: bool,
    seed: u64,
    angle_set: Vec<f64>,
    /// Ply angles in degrees, midplane first.
    generator_stack: Vec<f64>,
    target: LaminationParameters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TargetsFile {
    format: String,
    instances: Vec<InstanceFile>,
}

/// Violation count under every constraint at unit weight.
fn violations(indices: &[usize], set: &PlyAngleSet) -> u64 {
    let s = StackingSequence::from_indices_unchecked(indices.to_vec());
    ViolationReport::evaluate(&s, set, &ConstraintWeights::uniform(1.0)).total_violations()
}

/// Random walk that respects disorientation and contiguity where it can.
fn random_walk(plies: usize, set: &PlyAngleSet, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let w = ConstraintWeights::uniform(1.0);
    let d = set.len();
    let mut out: Vec<usize> = Vec::with_capacity(plies);
    for k in 0..plies {
        let run_full = k >= w.contiguity_limit && out[k - w.contiguity_limit..].iter().all(|&s| s == out[k - 1]);
        let options: Vec<usize> = (0..d)
            .filter(|&s| {
                k == 0
                    || (!crate::objective::disorientation_violated(set, out[k - 1], s, w.disorientation_limit)
                        && !(run_full && s == out[k - 1]))
            })
            .collect();
        let pick = options.choose(rng).copied().unwrap_or_else(|| rng.random_range(0..d));
        out.push(pick);
    }
    out
}

/// Steepest-descent repair over single-ply changes and pair swaps, with
/// random tie-breaking. Returns `true` once the stack is valid.
pub(crate) fn local_repair(stack: &mut [usize], set: &PlyAngleSet, rng: &mut ChaCha8Rng, max_steps: usize) -> bool {
    let d = set.len();
    let n = stack.len();
    let mut current = violations(stack, set);
    for _ in 0..max_steps {
        if current == 0 {
            return true;
        }
        let mut best = current;
        let mut moves: Vec<(usize, usize, bool)> = Vec::new();
        for i in 0..n {
            let old = stack[i];
            for s in 0..d {
                if s == old {
                    continue;
                }
                stack[i] = s;
                let v = violations(stack, set);
                if v < best {
                    best = v;
                    moves.clear();
                }
                if v == best && v < current {
                    moves.push((i, s, false));
                }
            }
            stack[i] = old;
        }
        if moves.is_empty() {
            for i in 0..n {
                for j in i + 1..n {
                    if stack[i] == stack[j] {
                        continue;
                    }
                    stack.swap(i, j);
                    let v = violations(stack, set);
                    stack.swap(i, j);
                    if v < best {
                        best = v;
                        moves.clear();
                    }
                    if v == best && v < current {
                        moves.push((i, j, true));
                    }
                }
            }
        }
        match moves.choose(rng) {
            Some(&(i, x, swap)) => {
                if swap {
                    stack.swap(i, x);
                } else {
                    stack[i] = x;
                }
                current = best;
            }
            None => {
                // Stuck: kick a random ply.
                let i = rng.random_range(0..n);
                stack[i] = rng.random_range(0..d);
                current = violations(stack, set);
            }
        }
    }
    current == 0
}

/// Uniform random stack, or a repaired random walk that satisfies all four
/// constraints at their default limits.
pub fn random_stack(plies: usize, set: &PlyAngleSet, constrained: bool, rng: &mut ChaCha8Rng) -> Result<StackingSequence> {
    if plies == 0 {
        return Err(SsrError::TargetGeneration("ply count must be positive".into()));
    }
    if !constrained {
        let idx = (0..plies).map(|_| rng.random_range(0..set.len())).collect();
        return StackingSequence::new(idx, set);
    }
    crate::objective::ten_percent_angles(set)
        .map_err(|e| SsrError::TargetGeneration(format!("constrained targets need the 10% angles: {e}")))?;
    const ATTEMPTS: usize = 50;
    for _ in 0..ATTEMPTS {
        let mut idx = random_walk(plies, set, rng);
        if local_repair(&mut idx, set, rng, 4 * plies + 50) {
            return StackingSequence::new(idx, set);
        }
    }
    Err(SsrError::TargetGeneration(format!(
        "no valid stack of {plies} plies after {ATTEMPTS} repaired attempts"
    )))
}

pub fn generate_targets(
    plies: usize,
    count: usize,
    angle_set: &PlyAngleSet,
    constrained: bool,
    seed: u64,
) -> Result<Vec<TargetInstance>> {
    if count == 0 {
        return Err(SsrError::TargetGeneration("count must be at least 1".into()));
    }
    (0..count)
        .map(|i| {
            let inst_seed = derive_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(inst_seed);
            let stack = random_stack(plies, angle_set, constrained, &mut rng)?;
            Ok(TargetInstance {
                id: format!("n{plies}-d{}-{i:03}", angle_set.len()),
                plies,
                angle_set: angle_set.clone(),
                target: lamination_parameters(&stack, angle_set),
                generator_stack: stack,
                constrained,
                seed: inst_seed,
            })
        })
        .collect()
}

pub fn targets_to_toml(targets: &[TargetInstance]) -> Result<String> {
    let file = TargetsFile {
        format: TARGETS_FORMAT.into(),
        instances: targets
            .iter()
            .map(|t| InstanceFile {
                id: t.id.clone(),
                plies: t.plies,
                constrained: t.constrained,
                seed: t.seed,
                angle_set: t.angle_set.angles().to_vec(),
                generator_stack: t.generator_stack.angles(&t.angle_set),
                target: t.target,
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| SsrError::Parse(e.to_string()))
}

pub fn targets_from_toml(text: &str) -> Result<Vec<TargetInstance>> {
    let file: TargetsFile = toml::from_str(text).map_err(|e| SsrError::Parse(e.to_string()))?;
    if file.format != TARGETS_FORMAT {
        return Err(SsrError::Parse(format!("unsupported targets format {:?}", file.format)));
    }
    file.instances
        .into_iter()
        .map(|r| {
            let set = PlyAngleSet::new(r.angle_set)?;
            let stack = StackingSequence::from_angles(&r.generator_stack, &set)?;
            if stack.len() != r.plies {
                return Err(SsrError::Parse(format!("instance {}: stack length differs from plies", r.id)));
            }
            Ok(TargetInstance {
                id: r.id,
                plies: r.plies,
                angle_set: set,
                target: r.target,
                generator_stack: stack,
                constrained: r.constrained,
                seed: r.seed,
            })
        })
        .collect()
}

pub fn write_targets(path: &Path, targets: &[TargetInstance]) -> Result<()> {
    std::fs::write(path, targets_to_toml(targets)?)?;
    Ok(())
}

pub fn read_targets(path: &Path) -> Result<Vec<TargetInstance>> {
    targets_from_toml(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{distance, is_valid};
    use crate::laminate::ComponentMask;

    #[test]
    fn constrained_targets_are_valid_and_exact() {
        let set = PlyAngleSet::conventional();
        for n in [6, 15, 30] {
            let ts = generate_targets(n, 10, &set, true, 5).unwrap();
            for t in &ts {
                assert!(is_valid(&t.generator_stack, &set, &ConstraintWeights::uniform(1.0)), "{:?}", t.generator_stack);
                let lp = lamination_parameters(&t.generator_stack, &set);
                assert_eq!(distance(&lp, &t.target, ComponentMask::ALL), 0.0);
            }
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let set = PlyAngleSet::conventional();
        let a = generate_targets(12, 4, &set, true, 77).unwrap();
        assert_eq!(a, generate_targets(12, 4, &set, true, 77).unwrap());
        let text = targets_to_toml(&a).unwrap();
        let back = targets_from_toml(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(targets_to_toml(&back).unwrap(), text);
    }

    #[test]
    fn fifteen_degree_unconstrained() {
        let set = PlyAngleSet::fifteen_degree();
        let ts = generate_targets(30, 3, &set, false, 1).unwrap();
        assert!(ts.iter().all(|t| t.generator_stack.len() == 30));
        assert!(targets_from_toml("format = \"other\"\ninstances = []").is_err());
        assert!(generate_targets(5, 0, &set, false, 1).is_err());
    }

    #[test]
    fn large_constrained_stack() {
        let set = PlyAngleSet::conventional();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_stack(200, &set, true, &mut rng).unwrap();
        assert!(is_valid(&s, &set, &ConstraintWeights::uniform(1.0)));
    }
}
