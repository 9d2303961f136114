//! Two-site DMRG for diagonal operators.
//!
//! A diagonal MPO makes the two-site effective Hamiltonian block diagonal
//! in the pair of physical indices, so every local problem splits into `d²`
//! independent blocks of size `χ_left · χ_right`. The ground state of the
//! local problem lives in the lowest block.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::eigen::{lowest_dense, lowest_lanczos, LanczosOptions};
use super::mpo::MatrixProductOperator;
use super::mps::{collapse_to_basis, MatrixProductState, SiteTensor};
use crate::error::{Result, SsrError};
use crate::seeding::derive_seed;

/// Largest block handled by dense diagonalisation.
pub const DENSE_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    /// Each sweep runs from the outermost ply to the midplane, then back.
    #[default]
    Inward,
    Outward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmrgConfig {
    pub max_bond: usize,
    pub sweeps: usize,
    pub direction: SweepDirection,
    pub seed: u64,
    pub trials: usize,
    /// Stop once the energy changes by less than this between sweeps.
    pub convergence_tol: Option<f64>,
    /// Relative singular-value cutoff.
    pub cutoff: f64,
}

impl Default for DmrgConfig {
    fn default() -> Self {
        Self {
            max_bond: 16,
            sweeps: 20,
            direction: SweepDirection::Inward,
            seed: 0,
            trials: 10,
            convergence_tol: Some(1e-12),
            cutoff: 1e-12,
        }
    }
}

impl DmrgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_bond == 0 || self.sweeps == 0 || self.trials == 0 {
            return Err(SsrError::InvalidConfig("max_bond, sweeps and trials must be ≥ 1".into()));
        }
        if !(self.cutoff >= 0.0 && self.cutoff < 1.0) {
            return Err(SsrError::InvalidConfig("cutoff must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DmrgRun {
    pub state: MatrixProductState,
    /// `⟨ψ|Ĥ|ψ⟩` after each completed sweep.
    pub energies: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub energies: Vec<f64>,
    pub collapsed: Vec<usize>,
    pub collapsed_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmrgOutcome {
    pub best: Vec<usize>,
    pub best_energy: f64,
    pub trials: Vec<TrialSummary>,
}

type Env = Vec<DMatrix<f64>>;

fn unit_env() -> Env {
    vec![DMatrix::from_element(1, 1, 1.0)]
}

fn extend_left(env: &Env, t: &SiteTensor, op: &MatrixProductOperator, k: usize) -> Env {
    let site = op.site(k);
    let slices: Vec<DMatrix<f64>> = (0..t.d).map(|s| t.slice(s)).collect();
    let mut next = vec![DMatrix::zeros(t.right, t.right); site.right];
    for e in &site.entries {
        for (s, a) in slices.iter().enumerate() {
            if e.diag[s] != 0.0 {
                next[e.to] += (a.transpose() * &env[e.from] * a) * e.diag[s];
            }
        }
    }
    next
}

fn extend_right(env: &Env, t: &SiteTensor, op: &MatrixProductOperator, k: usize) -> Env {
    let site = op.site(k);
    let slices: Vec<DMatrix<f64>> = (0..t.d).map(|s| t.slice(s)).collect();
    let mut next = vec![DMatrix::zeros(t.left, t.left); site.left];
    for e in &site.entries {
        for (s, b) in slices.iter().enumerate() {
            if e.diag[s] != 0.0 {
                next[e.from] += (b * &env[e.to] * b.transpose()) * e.diag[s];
            }
        }
    }
    next
}

/// Channel pairs `(w_left, w_right)` of a two-site block with their
/// per-`(s1, s2)` coefficients.
struct PairTerms {
    pairs: Vec<(usize, usize)>,
    /// `coef[p][s1 * d + s2]`
    coef: Vec<Vec<f64>>,
}

fn pair_terms(op: &MatrixProductOperator, k: usize) -> PairTerms {
    let d = op.phys_dim();
    let (w1, w2) = (op.site(k), op.site(k + 1));
    let mut index = std::collections::HashMap::new();
    let mut pairs = Vec::new();
    let mut coef: Vec<Vec<f64>> = Vec::new();
    for e1 in &w1.entries {
        for e2 in w2.entries.iter().filter(|e| e.from == e1.to) {
            let key = (e1.from, e2.to);
            let p = *index.entry(key).or_insert_with(|| {
                pairs.push(key);
                coef.push(vec![0.0; d * d]);
                pairs.len() - 1
            });
            for s1 in 0..d {
                if e1.diag[s1] == 0.0 {
                    continue;
                }
                for s2 in 0..d {
                    coef[p][s1 * d + s2] += e1.diag[s1] * e2.diag[s2];
                }
            }
        }
    }
    PairTerms { pairs, coef }
}

struct LocalSolution {
    s1: usize,
    s2: usize,
    /// `χ_left × χ_right` block of the two-site tensor.
    block: DMatrix<f64>,
}

fn solve_block(
    left: &Env,
    right: &Env,
    terms: &PairTerms,
    col: usize,
    guess: &DMatrix<f64>,
) -> Result<(f64, DMatrix<f64>)> {
    let (cl, cr) = (guess.nrows(), guess.ncols());
    let dim = cl * cr;
    let active: Vec<(usize, f64)> = terms
        .coef
        .iter()
        .enumerate()
        .filter_map(|(p, c)| (c[col] != 0.0).then_some((p, c[col])))
        .collect();
    if active.is_empty() {
        let mut v = guess.clone();
        let n = v.norm();
        if n > 0.0 {
            v /= n;
        } else {
            v[(0, 0)] = 1.0;
        }
        return Ok((0.0, v));
    }
    if dim <= DENSE_LIMIT {
        let mut h = DMatrix::zeros(dim, dim);
        for &(p, c) in &active {
            let (wl, wr) = terms.pairs[p];
            h += left[wl].kronecker(&right[wr]) * c;
        }
        // Row-major vec of X(a, c) matches the (a, c) Kronecker ordering.
        let (e, v) = lowest_dense(&h);
        let block = DMatrix::from_row_slice(cl, cr, v.as_slice());
        return Ok((e, block));
    }
    let apply = |x: &DVector<f64>| -> DVector<f64> {
        let xm = DMatrix::from_row_slice(cl, cr, x.as_slice());
        let mut y = DMatrix::zeros(cl, cr);
        for &(p, c) in &active {
            let (wl, wr) = terms.pairs[p];
            y += (&left[wl] * &xm * &right[wr]) * c;
        }
        DVector::from_row_slice(y.transpose().as_slice())
    };
    let mut start = DVector::from_row_slice(guess.transpose().as_slice());
    if start.norm() < 1e-12 {
        start = DVector::from_fn(dim, |i, _| 1.0 + (i % 7) as f64 * 0.1);
    }
    let (e, v) = lowest_lanczos(apply, &start, LanczosOptions::default())?;
    Ok((e, DMatrix::from_row_slice(cl, cr, v.as_slice())))
}

fn current_block(a: &SiteTensor, b: &SiteTensor, s1: usize, s2: usize) -> DMatrix<f64> {
    a.slice(s1) * b.slice(s2)
}

/// Exact local ground state: the lowest of the `d²` blocks.
fn solve_pair(
    state: &MatrixProductState,
    op: &MatrixProductOperator,
    left: &Env,
    right: &Env,
    k: usize,
) -> Result<LocalSolution> {
    let d = op.phys_dim();
    let terms = pair_terms(op, k);
    let (a, b) = (&state.tensors()[k], &state.tensors()[k + 1]);
    let mut best: Option<(f64, usize, usize, DMatrix<f64>)> = None;
    for s1 in 0..d {
        for s2 in 0..d {
            let guess = current_block(a, b, s1, s2);
            let (energy, block) = match solve_block(left, right, &terms, s1 * d + s2, &guess) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let better = match &best {
                None => true,
                Some(cur) => energy < cur.0 - 1e-13 * cur.0.abs().max(1.0),
            };
            if better {
                best = Some((energy, s1, s2, block));
            }
        }
    }
    let (_, s1, s2, block) =
        best.ok_or_else(|| SsrError::Singular(format!("no local solution at sites {k}, {}", k + 1)))?;
    Ok(LocalSolution { s1, s2, block })
}

/// SVD of the chosen block, truncated to `max_bond` and the relative `cutoff`.
fn split(sol: &LocalSolution, d: usize, max_bond: usize, cutoff: f64) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = sol.block.clone().svd(true, true);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    let smax = svd.singular_values[order[0]];
    let keep: Vec<usize> = order
        .into_iter()
        .take(max_bond)
        .filter(|&i| svd.singular_values[i] > cutoff * smax)
        .collect();
    let keep = if keep.is_empty() { vec![0] } else { keep };
    let norm = keep.iter().map(|&i| svd.singular_values[i].powi(2)).sum::<f64>().sqrt();
    let s: Vec<f64> = keep.iter().map(|&i| svd.singular_values[i] / norm).collect();
    let (cl, cr) = (sol.block.nrows(), sol.block.ncols());
    let r = keep.len();
    // Embed into (cl·d) × r and r × (d·cr) with the fixed physical indices.
    let mut left = DMatrix::zeros(cl * d, r);
    for a in 0..cl {
        for (j, &i) in keep.iter().enumerate() {
            left[(a * d + sol.s1, j)] = u[(a, i)];
        }
    }
    let mut right = DMatrix::zeros(r, d * cr);
    for (j, &i) in keep.iter().enumerate() {
        for c in 0..cr {
            right[(j, sol.s2 * cr + c)] = vt[(i, c)];
        }
    }
    (left, s, right)
}

/// One DMRG run from a random state.
pub fn dmrg_run(op: &MatrixProductOperator, config: &DmrgConfig, seed: u64) -> Result<DmrgRun> {
    config.validate()?;
    match config.direction {
        SweepDirection::Inward => inward_run(op, config, seed),
        SweepDirection::Outward => {
            let rev = op.reversed();
            let mut run = inward_run(&rev, config, seed)?;
            run.state = run.state.reversed();
            Ok(run)
        }
    }
}

fn inward_run(op: &MatrixProductOperator, config: &DmrgConfig, seed: u64) -> Result<DmrgRun> {
    let n = op.plies();
    let d = op.phys_dim();
    if n == 1 {
        let site = op.site(0);
        let mut diag = vec![0.0; d];
        for e in &site.entries {
            for s in 0..d {
                diag[s] += e.diag[s];
            }
        }
        let s = (0..d).fold(0, |b, s| if diag[s] < diag[b] { s } else { b });
        return Ok(DmrgRun {
            state: MatrixProductState::basis(&[s], d)?,
            energies: vec![diag[s]],
            seed,
        });
    }
    let mut state = MatrixProductState::random(n, d, config.max_bond, seed)?;
    let mut left: Vec<Env> = vec![unit_env()];
    for k in 0..n - 1 {
        let next = extend_left(&left[k], &state.tensors()[k], op, k);
        left.push(next);
    }
    left.push(unit_env());
    let mut right: Vec<Env> = vec![Vec::new(); n + 1];
    right[n] = unit_env();

    let mut energies: Vec<f64> = Vec::with_capacity(config.sweeps);
    for _ in 0..config.sweeps {
        // outermost ply towards the midplane
        for k in (0..n - 1).rev() {
            let sol = solve_pair(&state, op, &left[k], &right[k + 2], k)?;
            let (u, s, vt) = split(&sol, d, config.max_bond, config.cutoff);
            let us = &u * DMatrix::from_diagonal(&DVector::from_vec(s));
            let tensors = state.tensors_mut();
            tensors[k] = SiteTensor::from_left_matrix(&us, d);
            tensors[k + 1] = SiteTensor::from_right_matrix(&vt, d);
            right[k + 1] = extend_right(&right[k + 2], &state.tensors()[k + 1], op, k + 1);
        }
        // and back out
        for k in 0..n - 1 {
            let sol = solve_pair(&state, op, &left[k], &right[k + 2], k)?;
            let (u, s, vt) = split(&sol, d, config.max_bond, config.cutoff);
            let svt = DMatrix::from_diagonal(&DVector::from_vec(s)) * &vt;
            let tensors = state.tensors_mut();
            tensors[k] = SiteTensor::from_left_matrix(&u, d);
            tensors[k + 1] = SiteTensor::from_right_matrix(&svt, d);
            left[k + 1] = extend_left(&left[k], &state.tensors()[k], op, k);
        }
        state.set_center(Some(n - 1));
        let e = state.expectation(op)?;
        let stop = match (config.convergence_tol, energies.last()) {
            (Some(tol), Some(&prev)) => (prev - e).abs() < tol * e.abs().max(1.0),
            _ => false,
        };
        energies.push(e);
        if stop {
            break;
        }
    }
    Ok(DmrgRun { state, energies, seed })
}

/// Best of `config.trials` independent runs, scored by the operator diagonal
/// on the collapsed basis state. Ties go to the earlier trial.
pub fn dmrg_solve(op: &MatrixProductOperator, config: &DmrgConfig) -> Result<DmrgOutcome> {
    config.validate()?;
    let mut trials = Vec::with_capacity(config.trials);
    for t in 0..config.trials {
        let seed = derive_seed(config.seed, t as u64);
        let run = dmrg_run(op, config, seed)?;
        let collapsed = collapse_to_basis(&run.state);
        let collapsed_energy = op.diagonal_value(&collapsed);
        trials.push(TrialSummary {
            seed,
            energies: run.energies,
            collapsed,
            collapsed_energy,
        });
    }
    let best = trials
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.collapsed_energy.total_cmp(&b.collapsed_energy).then(i.cmp(j)))
        .map(|(_, t)| t)
        .expect("at least one trial");
    Ok(DmrgOutcome {
        best: best.collapsed.clone(),
        best_energy: best.collapsed_energy,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::PlyAngleSet;
    use crate::objective::{ConstraintWeights, DistanceMetric, ObjectiveSpec};
    use crate::tensornet::hamiltonian_mpo;
    use crate::LaminationParameters;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, seed: u64) -> ObjectiveSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let set = PlyAngleSet::conventional();
        let s = crate::StackingSequence::new(idx, &set).unwrap();
        let target: LaminationParameters = crate::laminate::lamination_parameters(&s, &set);
        ObjectiveSpec::lp_distance(set, n, target, DistanceMetric::Squared, ConstraintWeights::dmrg_defaults(n)).unwrap()
    }

    fn brute_min(op: &MatrixProductOperator) -> f64 {
        let (n, d) = (op.plies(), op.phys_dim());
        (0..d.pow(n as u32))
            .map(|mut x| {
                let st: Vec<usize> = (0..n)
                    .map(|_| {
                        let s = x % d;
                        x /= d;
                        s
                    })
                    .collect();
                op.diagonal_value(&st)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn energies_non_increasing_and_norm_kept() {
        let op = hamiltonian_mpo(&spec(6, 3)).unwrap();
        for chi in [1, 4, 32] {
            let cfg = DmrgConfig {
                max_bond: chi,
                sweeps: 6,
                convergence_tol: None,
                ..DmrgConfig::default()
            };
            let run = dmrg_run(&op, &cfg, 11).unwrap();
            assert_eq!(run.energies.len(), 6);
            for w in run.energies.windows(2) {
                assert!(w[1] <= w[0] + 1e-8, "{:?}", run.energies);
            }
            assert!((run.state.norm_squared() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let op = hamiltonian_mpo(&spec(5, 1)).unwrap();
        let cfg = DmrgConfig { trials: 3, sweeps: 4, ..DmrgConfig::default() };
        assert_eq!(dmrg_solve(&op, &cfg).unwrap(), dmrg_solve(&op, &cfg).unwrap());
    }

    #[test]
    fn finds_small_optimum() {
        let op = hamiltonian_mpo(&spec(5, 7)).unwrap();
        let cfg = DmrgConfig { max_bond: 32, sweeps: 10, ..DmrgConfig::default() };
        let out = dmrg_solve(&op, &cfg).unwrap();
        assert!((out.best_energy - brute_min(&op)).abs() < 1e-9);
    }

    #[test]
    fn outward_and_single_site() {
        let op = hamiltonian_mpo(&spec(4, 2)).unwrap();
        let cfg = DmrgConfig {
            direction: SweepDirection::Outward,
            ..DmrgConfig::default()
        };
        let run = dmrg_run(&op, &cfg, 5).unwrap();
        let e = run.state.expectation(&op).unwrap();
        assert!((e - run.energies.last().unwrap()).abs() < 1e-9);
        let one = MatrixProductOperator::one_local(3, vec![vec![2.0, -1.0, 0.5]]).unwrap();
        let out = dmrg_solve(&one, &DmrgConfig::default()).unwrap();
        assert_eq!(out.best, vec![1]);
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        let op = hamiltonian_mpo(&spec(8, 4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state = MatrixProductState::random(8, 4, 36, rng.random()).unwrap();
        let n = 8;
        let mut left: Vec<Env> = vec![unit_env()];
        for k in 0..n - 1 {
            left.push(extend_left(&left[k], &state.tensors()[k], &op, k));
        }
        // Pair (3, 4) spans two bonds of 36, a 1296-dimensional block.
        let mut right: Vec<Env> = vec![Vec::new(); n + 1];
        right[n] = unit_env();
        let mut st = state.clone();
        let k = 3;
        // right-canonicalise sites > k+1 so the right environments are orthonormal
        for j in (k + 2..n).rev() {
            let m = st.tensors()[j].as_right_matrix();
            let lq = m.transpose().qr();
            let q = lq.q().transpose();
            let r = lq.r().transpose();
            st.tensors_mut()[j] = SiteTensor::from_right_matrix(&q, 4);
            let prev = st.tensors()[j - 1].as_left_matrix() * r;
            st.tensors_mut()[j - 1] = SiteTensor::from_left_matrix(&prev, 4);
            right[j] = extend_right(&right[j + 1], &st.tensors()[j], &op, j);
        }
        let terms = pair_terms(&op, k);
        let (cl, cr) = (st.tensors()[k].left, st.tensors()[k + 1].right);
        assert!(cl * cr > DENSE_LIMIT, "{cl} x {cr}");
        // Lanczos on the big block vs dense on the same block built explicitly.
        let guess = DMatrix::from_element(cl, cr, 1.0);
        let (e_l, _) = solve_block(&left[k], &right[k + 2], &terms, 5, &guess).unwrap();
        let dim = cl * cr;
        let mut h = DMatrix::zeros(dim, dim);
        for (p, c) in terms.coef.iter().enumerate() {
            if c[5] != 0.0 {
                let (wl, wr) = terms.pairs[p];
                h += left[k][wl].kronecker(&right[k + 2][wr]) * c[5];
            }
        }
        let (e_d, _) = lowest_dense(&h);
        assert!((e_l - e_d).abs() < 1e-8 * e_d.abs().max(1.0), "{e_l} vs {e_d}");
    }
}
