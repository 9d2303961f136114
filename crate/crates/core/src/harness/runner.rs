//! Solver matrix execution with an ordered, incrementally flushed appender.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{beam_search, brute_force_min, brute_force_permutations, genetic_search, repair};
use crate::error::{Result, SsrError};
use crate::fvqe::{fvqe_run_observed, FvqeConfig, FvqeProblem};
use crate::laminate::{lamination_parameters, ComponentMask, PlyAngleSet, StackingSequence};
use crate::objective::{distance, ConstraintWeights, DistanceMetric, ObjectiveSpec};
use crate::seeding::{derive_labelled, derive_seed};
use crate::tensornet::{dmrg_solve, hamiltonian_mpo, DmrgConfig};

use super::config::{BucklingSection, ExperimentConfig, SolverEntry, SolverFamily, SolverKind};
use super::records::{config_hash, RecordWriter, ResultRecord, ValidityFlags};
use super::targets::{generate_targets, read_targets, TargetInstance};

/// Largest `4^N` for which F-VQE records carry the optimal-state probability.
const OPTIMUM_LIMIT: u64 = 1 << 20;

/// Targets of a config: read from `targets.file`, or generated per ply count.
pub fn load_targets(cfg: &ExperimentConfig) -> Result<Vec<TargetInstance>> {
    if let Some(f) = &cfg.targets.file {
        return read_targets(f);
    }
    let set = cfg.targets.angle_set.resolve()?;
    let mut out = Vec::new();
    for &n in &cfg.targets.plies {
        let seed = derive_labelled(cfg.seed, "targets", n as u64);
        out.extend(generate_targets(n, cfg.targets.count, &set, cfg.targets.constrained, seed)?);
    }
    Ok(out)
}

struct Solved {
    stack: Vec<usize>,
    iterations: usize,
    metrics: BTreeMap<String, f64>,
}

fn lp_spec(t: &TargetInstance, metric: DistanceMetric, w: ConstraintWeights) -> Result<ObjectiveSpec> {
    ObjectiveSpec::lp_distance(t.angle_set.clone(), t.plies, t.target, metric, w)
}

fn solve(kind: &SolverKind, t: &TargetInstance, w: ConstraintWeights, seed: u64) -> Result<(ObjectiveSpec, Solved)> {
    let plain = |stack, iterations| Solved { stack, iterations, metrics: BTreeMap::new() };
    match kind {
        SolverKind::Dmrg { dmrg } => {
            let spec = lp_spec(t, DistanceMetric::Squared, w)?;
            let op = hamiltonian_mpo(&spec)?;
            let out = dmrg_solve(&op, &DmrgConfig { seed, ..dmrg.clone() })?;
            let sweeps = out.trials.iter().find(|tr| tr.collapsed == out.best).map_or(0, |tr| tr.energies.len());
            let mut s = plain(out.best, sweeps);
            s.metrics.insert("energy".into(), out.best_energy);
            Ok((spec, s))
        }
        SolverKind::Beam { beam } => {
            let spec = lp_spec(t, DistanceMetric::Euclidean, w)?;
            let st = beam_search(&spec, beam)?;
            Ok((spec, plain(st.indices().to_vec(), t.plies)))
        }
        SolverKind::Ga { ga } => {
            let spec = lp_spec(t, DistanceMetric::Euclidean, w)?;
            let out = genetic_search(&spec, &crate::baselines::GaConfig { seed, ..*ga })?;
            let best = if w.is_unconstrained() || spec.is_valid(&out.best) { out.best } else { repair(&spec, &out.best) };
            Ok((spec, plain(best, ga.generations)))
        }
        SolverKind::BruteForce => {
            let spec = lp_spec(t, DistanceMetric::Euclidean, w)?;
            let (best, _) = brute_force_min(&spec)?;
            Ok((spec, plain(best, 0)))
        }
        SolverKind::Fvqe { fvqe } => {
            let spec = lp_spec(t, DistanceMetric::Euclidean, w)?;
            let optimum = match (t.angle_set.len() as u64).checked_pow(t.plies as u32) {
                Some(sz) if sz <= OPTIMUM_LIMIT => Some(brute_force_min(&spec)?.1),
                _ => None,
            };
            let (mut peak, mut hit) = (0.0f64, None);
            let cfg = FvqeConfig { seed, ..*fvqe };
            let out = fvqe_run_observed(&FvqeProblem::lp_search(spec.clone()), &cfg, &mut |it, snap| {
                if let Some(opt) = optimum {
                    let p: f64 = snap.iter().filter(|(s, _)| spec.evaluate(s) <= opt + 1e-9).map(|x| x.1).sum();
                    peak = peak.max(p);
                    if p > 0.5 && hit.is_none() {
                        hit = Some(it.iteration);
                    }
                }
                false
            })?;
            let mut s = plain(out.best.clone(), out.iterations());
            if optimum.is_some() {
                s.metrics.insert("peak_optimal_probability".into(), peak);
            }
            if let Some(h) = hit {
                s.metrics.insert("first_iteration_above_half".into(), h as f64);
            }
            Ok((spec, s))
        }
    }
}

fn empty_record(entry: &SolverEntry, plies: usize, set: &PlyAngleSet, id: &str, seed: u64) -> Result<ResultRecord> {
    Ok(ResultRecord {
        instance_id: id.to_string(),
        solver: entry.label(),
        solver_config: serde_json::to_value(entry).map_err(|e| SsrError::Parse(e.to_string()))?,
        config_hash: config_hash(entry)?,
        plies,
        angle_set: set.angles().to_vec(),
        stack: Vec::new(),
        target: None,
        distance: None,
        total_loss: f64::NAN,
        lambda_b: None,
        validity: ValidityFlags { disorientation: false, contiguity: false, balanced: false, ten_percent: false, valid: false },
        runtime_s: 0.0,
        iterations: 0,
        seed,
        metrics: BTreeMap::new(),
        error: None,
    })
}

/// Runs one solver on one target; failures land in `error`.
pub fn run_cell(entry: &SolverEntry, target: &TargetInstance, seed: u64) -> Result<ResultRecord> {
    let mut rec = empty_record(entry, target.plies, &target.angle_set, &target.id, seed)?;
    rec.target = Some(target.target);
    let w = entry.penalties.resolve(target.plies, target.constrained, entry.kind.default_penalties());
    let start = Instant::now();
    let result = solve(&entry.kind, target, w, seed);
    rec.runtime_s = start.elapsed().as_secs_f64();
    match result {
        Ok((spec, s)) => {
            let st = StackingSequence::new(s.stack, &target.angle_set)?;
            let lp = lamination_parameters(&st, &target.angle_set);
            rec.distance = Some(distance(&lp, &target.target, ComponentMask::ALL));
            rec.total_loss = spec.evaluate(st.indices());
            rec.validity = ValidityFlags::of(&st, &target.angle_set);
            rec.stack = st.indices().to_vec();
            rec.iterations = s.iterations;
            rec.metrics = s.metrics;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    Ok(rec)
}

/// Executes `jobs` on `parallelism` threads; `emit` sees results in job order.
pub fn run_ordered<J, F>(
    jobs: Vec<J>,
    parallelism: usize,
    work: F,
    mut emit: impl FnMut(ResultRecord) -> Result<()> + Send,
) -> Result<()>
where
    J: Send + Sync,
    F: Fn(&J) -> Result<ResultRecord> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SsrError::InvalidConfig(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(usize, Result<ResultRecord>)>();
    std::thread::scope(|scope| {
        let writer = scope.spawn(move || -> Result<()> {
            let mut pending = BTreeMap::new();
            let mut next = 0;
            for (i, r) in rx {
                pending.insert(i, r);
                while let Some(r) = pending.remove(&next) {
                    emit(r?)?;
                    next += 1;
                }
            }
            Ok(())
        });
        pool.install(|| {
            jobs.par_iter().enumerate().for_each_with(tx, |tx, (i, j)| {
                // A closed channel means the writer already failed.
                let _ = tx.send((i, work(j)));
            })
        });
        writer.join().expect("writer thread panicked")
    })
}

/// Cartesian product of the selected solvers and all targets, written to
/// `<out>/<stem>.jsonl` and `.csv`.
pub fn run_matrix(
    cfg: &ExperimentConfig,
    family: Option<SolverFamily>,
    out: &Path,
    stem: &str,
) -> Result<Vec<ResultRecord>> {
    let targets = load_targets(cfg)?;
    super::targets::write_targets(&out_targets(out)?, &targets)?;
    let solvers: Vec<&SolverEntry> = cfg.solvers.iter().filter(|s| family.is_none_or(|f| s.kind.family() == f)).collect();
    if solvers.is_empty() {
        return Err(SsrError::InvalidConfig("no solver of the requested kind in the config".into()));
    }
    let cells: Vec<(&SolverEntry, &TargetInstance)> =
        solvers.iter().flat_map(|s| targets.iter().map(move |t| (*s, t))).collect();
    let jobs: Vec<(usize, &SolverEntry, &TargetInstance)> = cells.into_iter().enumerate().map(|(i, (s, t))| (i, s, t)).collect();
    let mut writer = RecordWriter::create(out, stem)?;
    let mut all = Vec::new();
    run_ordered(
        jobs,
        cfg.parallelism,
        |&(i, s, t)| run_cell(s, t, derive_seed(cfg.seed, i as u64)),
        |r| {
            writer.append(&r)?;
            all.push(r);
            Ok(())
        },
    )?;
    Ok(all)
}

fn out_targets(out: &Path) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(out)?;
    Ok(out.join("targets.toml"))
}

/// Count-sets of the buckling section: explicit, or those of valid generated stacks.
pub fn buckling_count_sets(section: &BucklingSection, set: &PlyAngleSet, seed: u64) -> Result<Vec<Vec<usize>>> {
    if !section.count_sets.is_empty() {
        return Ok(section.count_sets.clone());
    }
    let ts = generate_targets(section.plies, section.instances, set, true, derive_labelled(seed, "counts", 0))?;
    Ok(ts.iter().map(|t| t.generator_stack.counts(set.len())).collect())
}

/// One F-VQE buckling run over fixed counts, with its brute-force rank.
pub fn run_buckling_cell(section: &BucklingSection, set: &PlyAngleSet, counts: &[usize], k: usize, seed: u64) -> Result<ResultRecord> {
    let w = if section.constrained { ConstraintWeights::uniform(1.0) } else { ConstraintWeights::none() };
    let entry = SolverEntry {
        name: Some("fvqe-buckling".into()),
        penalties: super::config::Penalties::Custom(w),
        kind: SolverKind::Fvqe { fvqe: section.fvqe },
    };
    let tag: Vec<String> = counts.iter().map(usize::to_string).collect();
    let id = format!("b{}-{}-{k:03}", section.plies, tag.join("-"));
    let mut rec = empty_record(&entry, section.plies, set, &id, seed)?;
    let spec = ObjectiveSpec::buckling(set.clone(), section.plies, section.setup, w)?;
    let start = Instant::now();
    let outcome = FvqeProblem::buckling(spec.clone(), counts.to_vec())
        .and_then(|p| fvqe_run_observed(&p, &FvqeConfig { seed, ..section.fvqe }, &mut |_, _| false));
    rec.runtime_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(out) => {
            let st = StackingSequence::new(out.best.clone(), set)?;
            let lb = spec.buckling_factor_of(&out.best);
            rec.total_loss = out.best_energy;
            rec.lambda_b = Some(lb);
            rec.validity = ValidityFlags::of(&st, set);
            rec.stack = out.best.clone();
            rec.iterations = out.iterations();
            rec.metrics.insert("rounds".into(), out.rounds.len() as f64);
            if let Some(g) = out.rounds.last().and_then(|r| r.gamma) {
                rec.metrics.insert("final_gamma".into(), g);
            }
            if let Ok(all) = brute_force_permutations(&spec, counts) {
                let above = all.iter().filter(|e| e.lambda_b > lb + 1e-12 * lb.abs()).count();
                rec.metrics.insert("fraction_above".into(), above as f64 / all.len() as f64);
                rec.metrics.insert("permutations".into(), all.len() as f64);
            }
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    Ok(rec)
}

pub fn run_buckling(cfg: &ExperimentConfig, out: &Path, stem: &str) -> Result<Vec<ResultRecord>> {
    let section = cfg
        .buckling
        .as_ref()
        .ok_or_else(|| SsrError::InvalidConfig("config has no [buckling] section".into()))?;
    let set = cfg.targets.angle_set.resolve()?;
    let sets = buckling_count_sets(section, &set, cfg.seed)?;
    let mut writer = RecordWriter::create(out, stem)?;
    let mut all = Vec::new();
    let jobs: Vec<(usize, Vec<usize>)> = sets.into_iter().enumerate().collect();
    run_ordered(
        jobs,
        cfg.parallelism,
        |(k, c)| run_buckling_cell(section, &set, c, *k, derive_labelled(cfg.seed, "buckling", *k as u64)),
        |r| {
            writer.append(&r)?;
            all.push(r);
            Ok(())
        },
    )?;
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::read_records;

    fn config(solvers: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!("seed = 3\nparallelism = 2\n[targets]\nplies = [6]\ncount = 2\n{solvers}")).unwrap()
    }

    #[test]
    fn one_target_one_solver_one_record() {
        let mut cfg = config("[[solvers]]\nkind = \"brute_force\"");
        cfg.targets.count = 1;
        let dir = tempfile::tempdir().unwrap();
        let recs = run_matrix(&cfg, None, dir.path(), "r").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].distance, Some(0.0));
        recs[0].verify().unwrap();
    }

    #[test]
    fn matrix_is_deterministic_and_ordered() {
        let cfg = config("[[solvers]]\nkind = \"dmrg\"\n[solvers.dmrg]\nmax_bond = 4\nsweeps = 4\ntrials = 2\n[[solvers]]\nkind = \"beam\"\n[[solvers]]\nkind = \"ga\"\n[solvers.ga]\ngenerations = 10");
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let a = run_matrix(&cfg, None, d1.path(), "r").unwrap();
        let b = run_matrix(&cfg, None, d2.path(), "r").unwrap();
        assert_eq!(a.len(), 6);
        let strip = |v: &[ResultRecord]| v.iter().map(|r| ResultRecord { runtime_s: 0.0, ..r.clone() }).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        let order: Vec<_> = a.iter().map(|r| (r.solver.clone(), r.instance_id.clone())).collect();
        assert_eq!(order[0], ("dmrg".to_string(), "n6-d4-000".to_string()));
        assert_eq!(order[5], ("ga".to_string(), "n6-d4-001".to_string()));
        assert_eq!(strip(&read_records(&d1.path().join("r.jsonl")).unwrap()), strip(&a));
        a.iter().for_each(|r| r.verify().unwrap());
        assert_eq!(
            std::fs::read_to_string(d1.path().join("targets.toml")).unwrap(),
            std::fs::read_to_string(d2.path().join("targets.toml")).unwrap()
        );
    }

    #[test]
    fn failures_are_recorded() {
        let mut cfg = config("[[solvers]]\nkind = \"brute_force\"");
        cfg.targets.plies = vec![13];
        cfg.targets.count = 1;
        let dir = tempfile::tempdir().unwrap();
        let recs = run_matrix(&cfg, None, dir.path(), "r").unwrap();
        assert!(recs[0].error.as_deref().unwrap().contains("brute-force limit"));
        assert!(run_matrix(&cfg, Some(SolverFamily::Dmrg), dir.path(), "r").is_err());
    }

    #[test]
    fn buckling_cell_reports_rank() {
        let section = BucklingSection { plies: 6, fvqe: FvqeConfig { max_iterations: 5, ..FvqeConfig::buckling() }, ..Default::default() };
        let set = PlyAngleSet::conventional();
        let rec = run_buckling_cell(&section, &set, &[2, 1, 2, 1], 0, 1).unwrap();
        assert!(rec.error.is_none());
        assert_eq!(rec.metrics["permutations"], 180.0);
        assert!(rec.lambda_b.unwrap() > 0.0);
        let sets = buckling_count_sets(&BucklingSection { plies: 8, ..Default::default() }, &set, 1).unwrap();
        assert_eq!(sets.len(), 10);
        assert!(sets.iter().all(|c| c.iter().sum::<usize>() == 8 && c[1] == c[3]));
    }
}
