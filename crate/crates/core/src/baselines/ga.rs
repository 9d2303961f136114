use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::objective::ObjectiveSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub tournament: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            elitism: 2,
            tournament: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(SsrError::InvalidConfig("population must be ≥ 2".into()));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(SsrError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.elitism > self.population || self.tournament == 0 {
            return Err(SsrError::InvalidConfig("elitism ≤ population and tournament ≥ 1 required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: Vec<usize>,
    pub best_loss: f64,
    /// Best loss in the population after each generation.
    pub trace: Vec<f64>,
}

pub fn genetic_search(spec: &ObjectiveSpec, config: &GaConfig) -> Result<GaOutcome> {
    genetic_search_from(spec, config, Vec::new())
}

/// GA seeded with `initial` individuals; the rest of the population is random.
pub fn genetic_search_from(spec: &ObjectiveSpec, config: &GaConfig, initial: Vec<Vec<usize>>) -> Result<GaOutcome> {
    config.validate()?;
    let n = spec.plies();
    let d = spec.angle_set().len();
    if initial.iter().any(|g| g.len() != n || g.iter().any(|&s| s >= d)) {
        return Err(SsrError::InvalidStack("initial individual does not fit the objective".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pop: Vec<Vec<usize>> = initial.into_iter().take(config.population).collect();
    while pop.len() < config.population {
        pop.push((0..n).map(|_| rng.random_range(0..d)).collect());
    }
    let mut scored: Vec<(f64, Vec<usize>)> = pop.into_iter().map(|g| (spec.evaluate(&g), g)).collect();
    let order = |v: &mut Vec<(f64, Vec<usize>)>| v.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    order(&mut scored);
    let mut trace = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        let pick = |rng: &mut ChaCha8Rng| -> usize {
            (0..config.tournament)
                .map(|_| rng.random_range(0..scored.len()))
                .min()
                .expect("tournament ≥ 1")
        };
        let mut next: Vec<Vec<usize>> = scored.iter().take(config.elitism).map(|(_, g)| g.clone()).collect();
        while next.len() < config.population {
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            let (mut c1, mut c2) = (scored[a].1.clone(), scored[b].1.clone());
            if n > 1 && rng.random_bool(config.crossover_rate) {
                let cut = rng.random_range(1..n);
                for i in cut..n {
                    std::mem::swap(&mut c1[i], &mut c2[i]);
                }
            }
            for c in [&mut c1, &mut c2] {
                for g in c.iter_mut() {
                    if rng.random_bool(config.mutation_rate) {
                        *g = rng.random_range(0..d);
                    }
                }
            }
            next.push(c1);
            if next.len() < config.population {
                next.push(c2);
            }
        }
        scored = next.into_iter().map(|g| (spec.evaluate(&g), g)).collect();
        order(&mut scored);
        trace.push(scored[0].0);
    }
    let (best_loss, best) = scored.swap_remove(0);
    Ok(GaOutcome { best, best_loss, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::brute_force_min;
    use crate::laminate::{lamination_parameters, PlyAngleSet, StackingSequence};
    use crate::objective::{ConstraintWeights, DistanceMetric};

    fn spec(n: usize, seed: u64) -> ObjectiveSpec {
        let set = PlyAngleSet::conventional();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let s = StackingSequence::new(idx, &set).unwrap();
        let t = lamination_parameters(&s, &set);
        ObjectiveSpec::lp_distance(set, n, t, DistanceMetric::Euclidean, ConstraintWeights::none()).unwrap()
    }

    #[test]
    fn elitism_keeps_optimum() {
        let sp = spec(6, 9);
        let (opt, v) = brute_force_min(&sp).unwrap();
        let cfg = GaConfig { generations: 30, ..GaConfig::default() };
        let out = genetic_search_from(&sp, &cfg, vec![opt]).unwrap();
        assert!(out.trace.iter().all(|&x| x == v));
    }

    #[test]
    fn trace_non_increasing_and_deterministic() {
        let sp = spec(10, 3);
        let cfg = GaConfig { generations: 50, seed: 4, ..GaConfig::default() };
        let a = genetic_search(&sp, &cfg).unwrap();
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(a, genetic_search(&sp, &cfg).unwrap());
    }

    #[test]
    fn near_optimum_on_random_targets() {
        let mut good = 0;
        for seed in 0..20 {
            let sp = spec(6, 200 + seed);
            let out = genetic_search(&sp, &GaConfig { seed, ..GaConfig::default() }).unwrap();
            let (_, opt) = brute_force_min(&sp).unwrap();
            if out.best_loss <= opt + 0.3 {
                good += 1;
            }
        }
        assert!(good >= 16, "{good}/20");
    }

    #[test]
    fn rejects_bad_config() {
        let sp = spec(4, 1);
        assert!(genetic_search(&sp, &GaConfig { population: 1, ..GaConfig::default() }).is_err());
        assert!(genetic_search(&sp, &GaConfig { mutation_rate: 2.0, ..GaConfig::default() }).is_err());
    }
}
