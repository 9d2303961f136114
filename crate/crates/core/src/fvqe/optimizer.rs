//! Filtering-VQE iterations: shifted-circuit sampling, adaptive τ and updates.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::objective::{ConstraintWeights, ObjectiveSpec};
use crate::seeding::{derive_labelled, derive_seed};

use super::circuits::{Ansatz, HardwareEfficient, PermutationCircuit};
use super::filter::FilterKind;
use super::sampling::{distribution, Distribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FvqeConfig {
    pub shots: usize,
    /// Use exact probabilities instead of shots.
    pub exact: bool,
    pub target_gradient_norm: f64,
    pub learning_rate: f64,
    pub tau_initial: f64,
    /// Relative τ increment between rungs of the ladder.
    pub tau_increment: f64,
    pub tau_max: f64,
    pub filter: FilterKind,
    pub n_rep: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub convergence_patience: usize,
    pub seed: u64,
}

impl Default for FvqeConfig {
    fn default() -> Self {
        Self::lp_search()
    }
}

impl FvqeConfig {
    /// Inverse filter, `g_c = 0.25`.
    pub fn lp_search() -> Self {
        Self {
            shots: 1000,
            exact: false,
            target_gradient_norm: 0.25,
            learning_rate: 1.0,
            tau_initial: 0.1,
            tau_increment: 0.1,
            tau_max: 200.0,
            filter: FilterKind::inverse(),
            n_rep: 2,
            max_iterations: 200,
            convergence_tol: 1e-3,
            convergence_patience: 5,
            seed: 0,
        }
    }

    /// Exponential filter, `g_c = 0.1`.
    pub fn buckling() -> Self {
        Self {
            target_gradient_norm: 0.1,
            filter: FilterKind::Exponential,
            ..Self::lp_search()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SsrError::InvalidConfig(m.into()));
        if !self.exact && self.shots == 0 {
            return bad("shots must be ≥ 1");
        }
        if !(self.target_gradient_norm > 0.0) {
            return bad("target gradient norm must be positive");
        }
        if !(self.tau_initial > 0.0 && self.tau_initial <= self.tau_max && self.tau_max.is_finite()) {
            return bad("τ must satisfy 0 < tau_initial ≤ tau_max < ∞");
        }
        if !(self.tau_increment > 0.0) || !self.learning_rate.is_finite() {
            return bad("tau_increment must be positive and learning_rate finite");
        }
        if let FilterKind::Inverse { epsilon } = self.filter {
            if !(epsilon > 0.0) {
                return bad("inverse filter needs ε > 0");
            }
        }
        Ok(())
    }

    fn shots(&self) -> Option<usize> {
        (!self.exact).then_some(self.shots)
    }
}

/// Penalty schedule `γ = initial, initial + step, …` applied to every active constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyEscalation {
    pub initial: f64,
    pub step: f64,
    pub max_rounds: usize,
}

impl Default for PenaltyEscalation {
    fn default() -> Self {
        Self { initial: 5.0, step: 5.0, max_rounds: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzChoice {
    HardwareEfficient,
    Permutation {
        counts: Vec<usize>,
        #[serde(default)]
        pairs: Option<Vec<(usize, usize)>>,
    },
}

#[derive(Debug, Clone)]
pub struct FvqeProblem {
    pub spec: ObjectiveSpec,
    pub ansatz: AnsatzChoice,
    pub escalation: Option<PenaltyEscalation>,
}

impl FvqeProblem {
    /// Hardware-efficient circuit over all `4^N` stacks.
    pub fn lp_search(spec: ObjectiveSpec) -> Self {
        Self { spec, ansatz: AnsatzChoice::HardwareEfficient, escalation: None }
    }

    /// Permutation circuit over the arrangements of `counts`, with penalty
    /// escalation whenever the objective has active constraints.
    pub fn buckling(spec: ObjectiveSpec, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != spec.angle_set().len() || counts.iter().sum::<usize>() != spec.plies() {
            return Err(SsrError::InvalidStack(format!(
                "counts {counts:?} do not describe {} plies over {} angles",
                spec.plies(),
                spec.angle_set().len()
            )));
        }
        let probe: Vec<usize> = counts.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c)).collect();
        let w = spec.weights();
        if w.balanced > 0.0 || w.ten_percent > 0.0 {
            let check = ConstraintWeights { disorientation: 0.0, contiguity: 0.0, ..*w };
            if !spec.with_weights(check)?.is_valid(&probe) {
                return Err(SsrError::InvalidStack(format!(
                    "counts {counts:?} violate the balance or 10% rule"
                )));
            }
        }
        let escalation = (!w.is_unconstrained()).then(PenaltyEscalation::default);
        Ok(Self { spec, ansatz: AnsatzChoice::Permutation { counts, pairs: None }, escalation })
    }

    pub fn with_escalation(mut self, escalation: Option<PenaltyEscalation>) -> Self {
        self.escalation = escalation;
        self
    }
}

/// Statistics of the unshifted circuit at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    /// Mean objective over the samples.
    pub mean_energy: f64,
    pub best_state: Vec<usize>,
    pub best_energy: f64,
    /// Sampled probability of `best_state`.
    pub best_probability: f64,
    pub valid_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub stats: SampleStats,
    pub tau: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvqeIteration {
    pub iteration: usize,
    pub mean_energy: f64,
    pub best_energy: f64,
    pub best_probability: f64,
    pub valid_fraction: f64,
    /// Absent on the final measurement, which is not followed by an update.
    pub tau: Option<f64>,
    pub gradient_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvqeRound {
    /// Penalty scale of this round, when escalating.
    pub gamma: Option<f64>,
    pub iterations: Vec<FvqeIteration>,
    pub best: Vec<usize>,
    pub best_energy: f64,
    pub best_valid: bool,
    pub converged: bool,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvqeOutcome {
    pub best: Vec<usize>,
    /// Loss of `best` under the objective of the last round.
    pub best_energy: f64,
    pub best_valid: bool,
    pub rounds: Vec<FvqeRound>,
}

impl FvqeOutcome {
    pub fn iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.iterations.len().saturating_sub(1)).sum()
    }
}

/// Sampled stacks and their frequencies, handed to run observers.
pub type Snapshot<'a> = &'a [(Vec<usize>, f64)];

/// One circuit bound to an objective: energy table plus sampling and update logic.
pub struct FvqeSolver {
    spec: ObjectiveSpec,
    circuit: Box<dyn Ansatz + Send + Sync>,
    energies: Vec<f64>,
    valid: Vec<bool>,
    config: FvqeConfig,
}

struct Shifted {
    /// `(x(E), weight)` with `ln f = −τ·x`.
    points: Vec<(f64, f64)>,
}

impl Shifted {
    fn ln_mean(&self, tau: f64, power: f64) -> f64 {
        let m = self.points.iter().map(|p| -power * tau * p.0).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self.points.iter().map(|&(x, w)| w * (-power * tau * x - m).exp()).sum();
        m + s.ln()
    }
}

impl FvqeSolver {
    pub fn new(spec: ObjectiveSpec, ansatz: &AnsatzChoice, config: FvqeConfig) -> Result<Self> {
        config.validate()?;
        let circuit: Box<dyn Ansatz + Send + Sync> = match ansatz {
            AnsatzChoice::HardwareEfficient => {
                if spec.angle_set().len() != 4 {
                    return Err(SsrError::InvalidConfig("the hardware-efficient circuit encodes four ply states".into()));
                }
                Box::new(HardwareEfficient::new(spec.plies(), config.n_rep)?)
            }
            AnsatzChoice::Permutation { counts, pairs } => {
                if counts.len() != spec.angle_set().len() {
                    return Err(SsrError::DimensionMismatch("one count per ply angle required".into()));
                }
                Box::new(PermutationCircuit::from_counts(counts, spec.plies(), pairs.clone())?)
            }
        };
        let (energies, valid) = (0..circuit.dim())
            .map(|i| {
                let st = circuit.stack_of(i);
                (spec.evaluate(&st), spec.is_valid(&st))
            })
            .unzip();
        let energies: Vec<f64> = energies;
        if let FilterKind::Inverse { epsilon } = config.filter {
            if energies.iter().any(|&e| e + epsilon <= 0.0) {
                return Err(SsrError::InvalidObjective("inverse filter needs non-negative energies".into()));
            }
        }
        Ok(Self { spec, circuit, energies, valid, config })
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn config(&self) -> &FvqeConfig {
        &self.config
    }

    pub fn circuit(&self) -> &dyn Ansatz {
        self.circuit.as_ref()
    }

    pub fn initial_params(&self) -> Vec<f64> {
        self.circuit.initial_params()
    }

    pub fn energy_of_state(&self, i: usize) -> f64 {
        self.energies[i]
    }

    fn circuit_seed(&self, round_seed: u64, iteration: usize, circuit: usize) -> u64 {
        derive_seed(derive_seed(round_seed, iteration as u64), circuit as u64)
    }

    fn stats(&self, dist: &Distribution) -> SampleStats {
        let mean_energy = dist.iter().map(|&(i, w)| w * self.energies[i]).sum();
        let valid_fraction = dist.iter().filter(|(i, _)| self.valid[*i]).map(|(_, w)| w).sum();
        let &(bi, bw) = dist
            .iter()
            .min_by(|a, b| self.energies[a.0].total_cmp(&self.energies[b.0]))
            .expect("distribution is never empty");
        SampleStats {
            mean_energy,
            best_state: self.circuit.stack_of(bi),
            best_energy: self.energies[bi],
            best_probability: bw,
            valid_fraction,
        }
    }

    /// Samples (or exact probabilities) of the circuit at `params`.
    pub fn measure(&self, params: &[f64], round_seed: u64, iteration: usize) -> Result<Distribution> {
        let amps = self.circuit.run(params)?;
        Ok(distribution(&amps, self.config.shots(), self.circuit_seed(round_seed, iteration, 0)))
    }

    pub fn snapshot(&self, dist: &Distribution) -> Vec<(Vec<usize>, f64)> {
        dist.iter().map(|&(i, w)| (self.circuit.stack_of(i), w)).collect()
    }

    fn shifted(&self, params: &[f64], round_seed: u64, iteration: usize) -> Result<Vec<Vec<Shifted>>> {
        let filter = self.config.filter;
        let mut out: Vec<Vec<Shifted>> = (0..params.len()).map(|_| Vec::new()).collect();
        let mut k = 0;
        self.circuit.for_each_shifted(params, &mut |p, _, amps| {
            k += 1;
            let d = distribution(amps, self.config.shots(), self.circuit_seed(round_seed, iteration, k));
            out[p].push(Shifted {
                points: d.into_iter().map(|(i, w)| (filter.log_argument(self.energies[i]), w)).collect(),
            });
        })?;
        Ok(out)
    }

    fn gradient_from(&self, base: &Shifted, shifted: &[Vec<Shifted>], tau: f64) -> Vec<f64> {
        let half_ln_f2 = 0.5 * base.ln_mean(tau, 2.0);
        shifted
            .iter()
            .enumerate()
            .map(|(p, runs)| {
                let rule = self.circuit.shift_rule(p);
                let d_f: f64 = rule.iter().zip(runs).map(|(&(_, c), s)| c * (s.ln_mean(tau, 1.0) - half_ln_f2).exp()).sum();
                -0.5 * d_f
            })
            .collect()
    }

    fn base_points(&self, dist: &Distribution) -> Shifted {
        Shifted {
            points: dist.iter().map(|&(i, w)| (self.config.filter.log_argument(self.energies[i]), w)).collect(),
        }
    }

    /// Gradient of the fidelity cost at a fixed τ.
    pub fn gradient_at(&self, params: &[f64], tau: f64, round_seed: u64, iteration: usize) -> Result<Vec<f64>> {
        let base = self.base_points(&self.measure(params, round_seed, iteration)?);
        let shifted = self.shifted(params, round_seed, iteration)?;
        Ok(self.gradient_from(&base, &shifted, tau))
    }

    /// `1 − ⟨ψ(θ)|f(H)|ψ(θ_ref)⟩ / ‖f(H)ψ(θ_ref)‖`, from exact amplitudes.
    pub fn fidelity_cost(&self, params: &[f64], reference: &[f64], tau: f64) -> Result<f64> {
        let a = self.circuit.run(params)?;
        let r = self.circuit.run(reference)?;
        let f: Vec<f64> = self.energies.iter().map(|&e| self.config.filter.ln_value(e, tau).exp()).collect();
        let overlap: f64 = a.iter().zip(&r).zip(&f).map(|((x, y), fv)| x * fv * y).sum();
        let norm: f64 = r.iter().zip(&f).map(|(y, fv)| (y * fv).powi(2)).sum::<f64>().sqrt();
        Ok(1.0 - overlap / norm)
    }

    /// Measure, pick τ on the ladder and take one gradient step.
    pub fn step(&self, params: &[f64], round_seed: u64, iteration: usize) -> Result<(Vec<f64>, StepDiagnostics)> {
        let dist = self.measure(params, round_seed, iteration)?;
        let stats = self.stats(&dist);
        let base = self.base_points(&dist);
        let shifted = self.shifted(params, round_seed, iteration)?;
        let cfg = &self.config;
        let norm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();

        let mut tau = cfg.tau_initial;
        let mut chosen: Option<(f64, Vec<f64>, f64)> = None;
        loop {
            let g = self.gradient_from(&base, &shifted, tau);
            let n = norm(&g);
            let ok = n.is_finite() && g.iter().all(|x| x.is_finite());
            if chosen.is_none() {
                if !ok {
                    return Err(SsrError::FilterOverflow(format!("degenerate filtered weights at τ = {tau}")));
                }
                chosen = Some((tau, g, n));
            } else if ok && n <= cfg.target_gradient_norm {
                chosen = Some((tau, g, n));
            } else {
                break;
            }
            if chosen.as_ref().unwrap().2 > cfg.target_gradient_norm || tau >= cfg.tau_max {
                break;
            }
            tau = (tau * (1.0 + cfg.tau_increment)).min(cfg.tau_max);
        }
        let (tau, gradient, gradient_norm) = chosen.expect("first rung is always taken");
        let next = params.iter().zip(&gradient).map(|(t, g)| t - cfg.learning_rate * g).collect();
        Ok((next, StepDiagnostics { stats, tau, gradient, gradient_norm }))
    }

    /// One optimisation round from the circuit's initial parameters.
    /// `observer` sees each measurement and may stop the round by returning `true`.
    pub fn run_round(
        &self,
        round_seed: u64,
        observer: &mut dyn FnMut(&FvqeIteration, Snapshot<'_>) -> bool,
    ) -> Result<FvqeRound> {
        let cfg = &self.config;
        let mut params = self.circuit.initial_params();
        let mut iterations = Vec::new();
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut streak = 0;
        let mut converged = false;
        for it in 0..=cfg.max_iterations {
            let last = it == cfg.max_iterations;
            let (stats, dist, tau, gnorm, next) = if last {
                let dist = self.measure(&params, round_seed, it)?;
                (self.stats(&dist), dist, None, None, None)
            } else {
                let dist = self.measure(&params, round_seed, it)?;
                let (next, diag) = self.step(&params, round_seed, it)?;
                (diag.stats, dist, Some(diag.tau), Some(diag.gradient_norm), Some(next))
            };
            if best.as_ref().is_none_or(|b| stats.best_energy < b.0) {
                best = Some((stats.best_energy, stats.best_state.clone()));
            }
            let rec = FvqeIteration {
                iteration: it,
                mean_energy: stats.mean_energy,
                best_energy: stats.best_energy,
                best_probability: stats.best_probability,
                valid_fraction: stats.valid_fraction,
                tau,
                gradient_norm: gnorm,
            };
            let stop = observer(&rec, &self.snapshot(&dist));
            iterations.push(rec);
            if stop || last {
                break;
            }
            streak = if gnorm.unwrap() < cfg.convergence_tol { streak + 1 } else { 0 };
            params = next.unwrap();
            if streak >= cfg.convergence_patience {
                // Measure the converged point before stopping.
                let dist = self.measure(&params, round_seed, it + 1)?;
                let s = self.stats(&dist);
                if s.best_energy < best.as_ref().unwrap().0 {
                    best = Some((s.best_energy, s.best_state.clone()));
                }
                let rec = FvqeIteration {
                    iteration: it + 1,
                    mean_energy: s.mean_energy,
                    best_energy: s.best_energy,
                    best_probability: s.best_probability,
                    valid_fraction: s.valid_fraction,
                    tau: None,
                    gradient_norm: None,
                };
                observer(&rec, &self.snapshot(&dist));
                iterations.push(rec);
                converged = true;
                break;
            }
        }
        let (best_energy, best) = best.expect("at least one measurement");
        Ok(FvqeRound {
            gamma: None,
            best_valid: self.spec.is_valid(&best),
            iterations,
            best,
            best_energy,
            converged,
            params,
        })
    }
}

/// One update from `params`; the first element of the result is the new parameter vector.
pub fn fvqe_step(solver: &FvqeSolver, params: &[f64], iteration: usize) -> Result<(Vec<f64>, StepDiagnostics)> {
    solver.step(params, derive_labelled(solver.config.seed, "fvqe", 0), iteration)
}

pub fn fvqe_run(problem: &FvqeProblem, config: &FvqeConfig) -> Result<FvqeOutcome> {
    fvqe_run_observed(problem, config, &mut |_, _| false)
}

/// [`fvqe_run`] with an observer called after every measurement.
pub fn fvqe_run_observed(
    problem: &FvqeProblem,
    config: &FvqeConfig,
    observer: &mut dyn FnMut(&FvqeIteration, Snapshot<'_>) -> bool,
) -> Result<FvqeOutcome> {
    let base = problem.spec.weights();
    let schedule: Vec<Option<f64>> = match problem.escalation {
        Some(e) if !base.is_unconstrained() => {
            (0..e.max_rounds.max(1)).map(|k| Some(e.initial + k as f64 * e.step)).collect()
        }
        _ => vec![None],
    };
    let mut rounds = Vec::new();
    let mut last_spec = problem.spec.clone();
    for (k, gamma) in schedule.into_iter().enumerate() {
        let spec = match gamma {
            Some(g) => {
                let on = |w: f64| if w > 0.0 { g } else { 0.0 };
                problem.spec.with_weights(ConstraintWeights {
                    disorientation: on(base.disorientation),
                    contiguity: on(base.contiguity),
                    balanced: on(base.balanced),
                    ten_percent: on(base.ten_percent),
                    ..*base
                })?
            }
            None => problem.spec.clone(),
        };
        let solver = FvqeSolver::new(spec.clone(), &problem.ansatz, *config)?;
        let mut round = solver.run_round(derive_labelled(config.seed, "fvqe", k as u64), observer)?;
        round.gamma = gamma;
        let done = round.best_valid;
        rounds.push(round);
        last_spec = spec;
        if done {
            break;
        }
    }
    let last = rounds.last().expect("at least one round");
    Ok(FvqeOutcome {
        best: last.best.clone(),
        best_energy: last_spec.evaluate(&last.best),
        best_valid: last.best_valid,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::{lamination_parameters, PlyAngleSet, StackingSequence};
    use crate::objective::{BucklingSetup, DistanceMetric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp_spec(stack: &[usize], w: ConstraintWeights) -> ObjectiveSpec {
        let set = PlyAngleSet::conventional();
        let s = StackingSequence::new(stack.to_vec(), &set).unwrap();
        let t = lamination_parameters(&s, &set);
        ObjectiveSpec::lp_distance(set, stack.len(), t, DistanceMetric::Euclidean, w).unwrap()
    }

    #[test]
    fn exact_gradient_matches_finite_differences() {
        let spec = lp_spec(&[1, 2], ConstraintWeights::none());
        let cfg = FvqeConfig { exact: true, ..FvqeConfig::lp_search() };
        let solver = FvqeSolver::new(spec, &AnsatzChoice::HardwareEfficient, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for tau in [0.1, 1.0, 4.0] {
            let theta: Vec<f64> = (0..solver.circuit().num_params()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = solver.gradient_at(&theta, tau, 0, 0).unwrap();
            let h = 1e-5;
            for j in 0..theta.len() {
                let (mut p, mut m) = (theta.clone(), theta.clone());
                p[j] += h;
                m[j] -= h;
                let fd = (solver.fidelity_cost(&p, &theta, tau).unwrap() - solver.fidelity_cost(&m, &theta, tau).unwrap()) / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-6, "τ={tau} j={j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn exact_gradient_permutation_circuit() {
        let set = PlyAngleSet::conventional();
        let spec = ObjectiveSpec::buckling(set, 4, BucklingSetup::default(), ConstraintWeights::none()).unwrap();
        let cfg = FvqeConfig { exact: true, ..FvqeConfig::buckling() };
        let ansatz = AnsatzChoice::Permutation { counts: vec![1, 1, 1, 1], pairs: None };
        let solver = FvqeSolver::new(spec, &ansatz, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let theta: Vec<f64> = (0..solver.circuit().num_params()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = solver.gradient_at(&theta, 0.7, 0, 0).unwrap();
        for j in 0..theta.len() {
            let (mut p, mut m) = (theta.clone(), theta.clone());
            p[j] += 1e-5;
            m[j] -= 1e-5;
            let fd = (solver.fidelity_cost(&p, &theta, 0.7).unwrap() - solver.fidelity_cost(&m, &theta, 0.7).unwrap()) / 2e-5;
            assert!((fd - g[j]).abs() < 1e-6, "j={j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn flat_objective_gives_zero_gradient() {
        // A single-ply stack with balance only: every one-ply LP target is hit
        // by exactly one state, so use a constant buckling landscape instead.
        let set = PlyAngleSet::conventional();
        let spec = ObjectiveSpec::buckling(set, 3, BucklingSetup::default(), ConstraintWeights::none()).unwrap();
        let ansatz = AnsatzChoice::Permutation { counts: vec![3, 0, 0, 0], pairs: None };
        let solver = FvqeSolver::new(spec, &ansatz, FvqeConfig::buckling()).unwrap();
        let p = solver.initial_params();
        let (next, diag) = fvqe_step(&solver, &p, 0).unwrap();
        assert_eq!(diag.gradient_norm, 0.0);
        assert_eq!(next, p);
        assert_eq!(diag.tau, 200.0);
    }

    #[test]
    fn mean_energy_is_sample_mean() {
        let spec = lp_spec(&[0, 1, 3], ConstraintWeights::uniform(0.05));
        let solver = FvqeSolver::new(spec.clone(), &AnsatzChoice::HardwareEfficient, FvqeConfig::lp_search()).unwrap();
        let p = solver.initial_params();
        let dist = solver.measure(&p, 9, 0).unwrap();
        let snap = solver.snapshot(&dist);
        let mean: f64 = snap.iter().map(|(s, w)| w * spec.evaluate(s)).sum();
        let stats = solver.stats(&dist);
        assert!((stats.mean_energy - mean).abs() < 1e-12);
        assert!((snap.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_returns_best_initial_sample() {
        let spec = lp_spec(&[0, 1, 3, 2], ConstraintWeights::none());
        let cfg = FvqeConfig { max_iterations: 0, seed: 4, ..FvqeConfig::lp_search() };
        let out = fvqe_run(&FvqeProblem::lp_search(spec.clone()), &cfg).unwrap();
        assert_eq!(out.rounds[0].iterations.len(), 1);
        let solver = FvqeSolver::new(spec.clone(), &AnsatzChoice::HardwareEfficient, cfg).unwrap();
        let dist = solver.measure(&solver.initial_params(), derive_labelled(4, "fvqe", 0), 0).unwrap();
        let best = solver.snapshot(&dist).into_iter().map(|(s, _)| spec.evaluate(&s)).fold(f64::INFINITY, f64::min);
        assert_eq!(out.best_energy, best);
    }

    #[test]
    fn small_lp_search_finds_target() {
        let stack = [1, 2, 0, 3];
        let spec = lp_spec(&stack, ConstraintWeights::none());
        let cfg = FvqeConfig { max_iterations: 60, seed: 1, ..FvqeConfig::lp_search() };
        let mut peak: f64 = 0.0;
        let out = fvqe_run_observed(&FvqeProblem::lp_search(spec.clone()), &cfg, &mut |_, snap| {
            let p: f64 = snap.iter().filter(|(s, _)| spec.evaluate(s) < 1e-12).map(|x| x.1).sum();
            peak = peak.max(p);
            false
        })
        .unwrap();
        assert!(out.best_energy < 1e-12);
        assert!(peak > 0.5, "peak {peak}");
        assert_eq!(out, fvqe_run(&FvqeProblem::lp_search(spec), &cfg).unwrap());
    }

    #[test]
    fn buckling_escalation_ends_valid() {
        let set = PlyAngleSet::conventional();
        let spec = ObjectiveSpec::buckling(set, 6, BucklingSetup::default(), ConstraintWeights::uniform(1.0)).unwrap();
        let problem = FvqeProblem::buckling(spec, vec![2, 1, 2, 1]).unwrap();
        assert!(problem.escalation.is_some());
        let cfg = FvqeConfig { max_iterations: 20, ..FvqeConfig::buckling() };
        let out = fvqe_run(&problem, &cfg).unwrap();
        assert!(out.best_valid);
        assert_eq!(out.rounds[0].gamma, Some(5.0));
        assert!(FvqeProblem::buckling(problem.spec.clone(), vec![3, 0, 3, 0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(FvqeConfig { shots: 0, ..FvqeConfig::lp_search() }.validate().is_err());
        assert!(FvqeConfig { target_gradient_norm: 0.0, ..FvqeConfig::lp_search() }.validate().is_err());
        assert!(FvqeConfig { tau_initial: 300.0, ..FvqeConfig::lp_search() }.validate().is_err());
        assert!(FvqeConfig::buckling().validate().is_ok());
    }
}
