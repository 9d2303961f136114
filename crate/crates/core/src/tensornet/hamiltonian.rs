//! Diagonal MPOs for the retrieval loss.

use super::automaton::{AutomatonTerm, Channel};
use super::mpo::MatrixProductOperator;
use crate::error::{Result, SsrError};
use crate::laminate::{
    abd_from_lp, buckling_factor, ComponentMask, LaminationParameters, PlyAngleSet, PlyWeights,
};
use crate::objective::{
    balance_pairs, disorientation_violated, ten_percent_angles, ten_percent_minimum, ConstraintWeights,
    ObjectiveKind, ObjectiveSpec,
};

/// Adds `w · (Σ_n a_n(s_n) − ξ)²` using intermediate channel `mid`.
fn add_squared_sum(term: &mut AutomatonTerm, a: &[Vec<f64>], xi: f64, w: f64, mid: usize) {
    let n = a.len();
    for (k, ak) in a.iter().enumerate() {
        let mut e: Vec<f64> = ak.iter().map(|&x| w * (x * x - 2.0 * xi * x)).collect();
        if k == 0 {
            for x in &mut e {
                *x += w * xi * xi;
            }
        }
        term.emit(k, e);
        if k + 1 < n {
            term.add(k, Channel::Ready, Channel::Mid(mid), ak.clone());
        }
        if k > 0 && k + 1 < n {
            term.add(k, Channel::Mid(mid), Channel::Mid(mid), vec![1.0; ak.len()]);
        }
        if k > 0 {
            term.add(k, Channel::Mid(mid), Channel::Done, ak.iter().map(|&x| 2.0 * w * x).collect());
        }
    }
}

fn distance_term(
    target: &LaminationParameters,
    weights: &PlyWeights,
    set: &PlyAngleSet,
    mask: ComponentMask,
) -> Result<AutomatonTerm> {
    if !target.is_finite() {
        return Err(SsrError::InvalidObjective("target must be finite".into()));
    }
    let n = weights.a.len();
    let d = set.len();
    let xi = target.to_array();
    let mut term = AutomatonTerm::new(n, d);
    for (mid, comp) in mask.active().enumerate() {
        let (alpha, l) = if comp < 4 { (&weights.a, comp) } else { (&weights.d, comp - 4) };
        let a: Vec<Vec<f64>> = (0..n)
            .map(|k| (0..d).map(|s| alpha[k] * set.functions(s)[l]).collect())
            .collect();
        add_squared_sum(&mut term, &a, xi[comp], 1.0, mid);
    }
    Ok(term)
}

/// `Σ_n V(s_n, s_{n+1})` with one intermediate channel per left-ply index.
fn nearest_neighbour_term(n: usize, d: usize, v: &[f64]) -> AutomatonTerm {
    let mut term = AutomatonTerm::new(n, d);
    if v.iter().all(|&x| x == 0.0) {
        return term;
    }
    for k in 0..n.saturating_sub(1) {
        for s in 0..d {
            let row = &v[s * d..(s + 1) * d];
            if row.iter().all(|&x| x == 0.0) {
                continue;
            }
            let mut e = vec![0.0; d];
            e[s] = 1.0;
            term.add(k, Channel::Ready, Channel::Mid(s), e);
            term.add(k + 1, Channel::Mid(s), Channel::Done, row.to_vec());
        }
    }
    term
}

fn coupling_matrix(set: &PlyAngleSet, gamma_dis: f64, limit_deg: f64, alpha: f64) -> Vec<f64> {
    let d = set.len();
    let mut v = vec![0.0; d * d];
    for s in 0..d {
        for t in 0..d {
            if gamma_dis > 0.0 && disorientation_violated(set, s, t, limit_deg) {
                v[s * d + t] += gamma_dis;
            }
            if s == t {
                v[s * d + t] += alpha;
            }
        }
    }
    v
}

/// Windows of `limit + 1` identical plies; channel `(s, k)` means the open
/// window holds `k` plies of index `s`.
fn contiguity_term(n: usize, d: usize, limit: usize, gamma: f64) -> AutomatonTerm {
    let mut term = AutomatonTerm::new(n, d);
    if gamma == 0.0 || n <= limit {
        return term;
    }
    let chan = |s: usize, k: usize| Channel::Mid(s * limit + (k - 1));
    for s in 0..d {
        let mut e = vec![0.0; d];
        e[s] = 1.0;
        let mut close = vec![0.0; d];
        close[s] = gamma;
        for start in 0..n - limit {
            term.add(start, Channel::Ready, chan(s, 1), e.clone());
            for k in 1..limit {
                term.add(start + k, chan(s, k), chan(s, k + 1), e.clone());
            }
            term.add(start + limit, chan(s, limit), Channel::Done, close.clone());
        }
    }
    term
}

fn balance_term(n: usize, set: &PlyAngleSet, gamma: f64, mid_offset: usize) -> AutomatonTerm {
    let d = set.len();
    let mut term = AutomatonTerm::new(n, d);
    if gamma == 0.0 {
        return term;
    }
    for (i, pair) in balance_pairs(set).iter().enumerate() {
        let mut a = vec![0.0; d];
        if let Some(p) = pair.plus {
            a[p] += 1.0;
        }
        if let Some(m) = pair.minus {
            a[m] -= 1.0;
        }
        add_squared_sum(&mut term, &vec![a; n], 0.0, gamma, mid_offset + i);
    }
    term
}

/// Saturating counters: channel `(θ, c)` holds the running count `c < m` of
/// ply angle θ; counts at or above `m` can no longer be penalised and are dropped.
fn ten_percent_term(n: usize, set: &PlyAngleSet, gamma: f64) -> Result<AutomatonTerm> {
    let d = set.len();
    let mut term = AutomatonTerm::new(n, d);
    if gamma == 0.0 {
        return Ok(term);
    }
    let required = ten_percent_angles(set)?;
    let m = ten_percent_minimum(n);
    let chan = |t: usize, c: usize| Channel::Mid(t * m + c);
    let deficit = |c: usize| {
        let r = m.saturating_sub(c) as f64;
        gamma * r * r
    };
    for (t, &theta) in required.iter().enumerate() {
        let hit = |s: usize| usize::from(s == theta);
        if n == 1 {
            term.emit(0, (0..d).map(|s| deficit(hit(s))).collect());
            continue;
        }
        // site 0: Ready → (θ, count)
        for c in 0..2.min(m) {
            let e = (0..d).map(|s| f64::from(u8::from(hit(s) == c))).collect();
            term.add(0, Channel::Ready, chan(t, c), e);
        }
        for k in 1..n - 1 {
            let reach = (k + 1).min(m);
            for c in 0..reach {
                term.add(k, chan(t, c), chan(t, c), (0..d).map(|s| (1 - hit(s)) as f64).collect());
                if c + 1 < m {
                    term.add(k, chan(t, c), chan(t, c + 1), (0..d).map(|s| hit(s) as f64).collect());
                }
            }
        }
        for c in 0..n.min(m) {
            let e = (0..d).map(|s| deficit(c + hit(s))).collect();
            term.add(n - 1, chan(t, c), Channel::Done, e);
        }
    }
    Ok(term)
}

/// `λ_max − λ_B(s)`; λ_B is affine in vD so it reduces to one-local terms.
fn buckling_term(spec: &ObjectiveSpec) -> Result<AutomatonTerm> {
    let setup = spec
        .buckling_setup()
        .ok_or_else(|| SsrError::InvalidObjective("not a buckling objective".into()))?;
    let lambda_max = spec.lambda_max().expect("buckling objective has lambda_max");
    let gammas = crate::laminate::GammaMatrices::for_material(&setup.material)?;
    let lam = |vd: [f64; 4]| -> Result<f64> {
        let lp = LaminationParameters::new([0.0; 4], vd);
        buckling_factor(&abd_from_lp(&lp, setup.thickness, &gammas).d, &setup.plate)
    };
    let c0 = lam([0.0; 4])?;
    let mut c = [0.0; 4];
    for (l, cl) in c.iter_mut().enumerate() {
        let mut e = [0.0; 4];
        e[l] = 1.0;
        *cl = lam(e)? - c0;
    }
    let set = spec.angle_set();
    let (n, d) = (spec.plies(), set.len());
    let mut term = AutomatonTerm::new(n, d);
    for k in 0..n {
        let w = spec.ply_weights().d[k];
        let e = (0..d)
            .map(|s| {
                let f = set.functions(s);
                let mut v = -w * (0..4).map(|l| c[l] * f[l]).sum::<f64>();
                if k == 0 {
                    v += lambda_max - c0;
                }
                v
            })
            .collect();
        term.emit(k, e);
    }
    Ok(term)
}

/// `⟨s|Ĥ|s⟩ = Σ_{X,l} (Σ_n αX_n f_l(s_n) − ξ_l^X)²` over the active components.
pub fn mpo_distance_squared(
    target: &LaminationParameters,
    weights: &PlyWeights,
    set: &PlyAngleSet,
    mask: ComponentMask,
) -> Result<MatrixProductOperator> {
    distance_term(target, weights, set, mask)?.build()
}

/// `Σ_c γ_c · penalty_c(s)` for the four manufacturing constraints.
pub fn mpo_penalties(weights: &ConstraintWeights, set: &PlyAngleSet, plies: usize) -> Result<MatrixProductOperator> {
    penalty_automaton(weights, set, plies, 0.0)?.build()
}

/// `α · #{n : s_n = s_{n+1}}`.
pub fn mpo_bias(alpha: f64, d: usize, plies: usize) -> Result<MatrixProductOperator> {
    let mut v = vec![0.0; d * d];
    for s in 0..d {
        v[s * d + s] = alpha;
    }
    nearest_neighbour_term(plies, d, &v).build()
}

fn penalty_automaton(weights: &ConstraintWeights, set: &PlyAngleSet, plies: usize, alpha: f64) -> Result<AutomatonTerm> {
    weights.validate()?;
    let d = set.len();
    let v = coupling_matrix(set, weights.disorientation, weights.disorientation_limit, alpha);
    AutomatonTerm::merge(vec![
        nearest_neighbour_term(plies, d, &v),
        contiguity_term(plies, d, weights.contiguity_limit, weights.contiguity),
        balance_term(plies, set, weights.balanced, 0),
        ten_percent_term(plies, set, weights.ten_percent)?,
    ])
}

/// Full diagonal Hamiltonian of an objective. LP targets always enter as the
/// squared distance, the only form with a compact MPO.
pub fn hamiltonian_mpo(spec: &ObjectiveSpec) -> Result<MatrixProductOperator> {
    let objective = match spec.kind() {
        ObjectiveKind::LpDistance { target, .. } => {
            distance_term(target, spec.ply_weights(), spec.angle_set(), spec.mask())?
        }
        ObjectiveKind::Buckling(_) => buckling_term(spec)?,
    };
    let constraints = penalty_automaton(spec.weights(), spec.angle_set(), spec.plies(), spec.bias_alpha())?;
    AutomatonTerm::merge(vec![objective, constraints])?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::{lamination_parameters, ply_weights, StackingSequence};
    use crate::objective::{
        clustering_bias, distance_squared, BucklingSetup, DistanceMetric, ViolationReport,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_states(n: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
        (0..d.pow(n as u32)).map(move |mut x| {
            (0..n)
                .map(|_| {
                    let s = x % d;
                    x /= d;
                    s
                })
                .collect()
        })
    }

    fn random_target(rng: &mut ChaCha8Rng) -> LaminationParameters {
        let mut v = [0.0; 8];
        for x in &mut v {
            *x = rng.random_range(-1.0..1.0);
        }
        LaminationParameters::from_array(v)
    }

    #[test]
    fn distance_mpo_exhaustive_n4() {
        let set = PlyAngleSet::conventional();
        let mask = ComponentMask::for_angle_set(&set);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let target = random_target(&mut rng);
        let mpo = mpo_distance_squared(&target, &ply_weights(4), &set, mask).unwrap();
        assert!(mpo.max_bond() <= mask.count() + 2);
        for st in all_states(4, 4) {
            let s = StackingSequence::new(st.clone(), &set).unwrap();
            let want = distance_squared(&lamination_parameters(&s, &set), &target, mask);
            assert!((mpo.diagonal_value(&st) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn distance_mpo_zero_at_generator() {
        let set = PlyAngleSet::fifteen_degree();
        let mask = ComponentMask::for_angle_set(&set);
        let s = StackingSequence::new(vec![3, 7, 0, 11, 5], &set).unwrap();
        let target = lamination_parameters(&s, &set);
        let mpo = mpo_distance_squared(&target, &ply_weights(5), &set, mask).unwrap();
        assert!(mpo.diagonal_value(s.indices()).abs() < 1e-12);
    }

    #[test]
    fn distance_mpo_single_ply_zero_target() {
        let set = PlyAngleSet::conventional();
        let mpo = mpo_distance_squared(&LaminationParameters::default(), &ply_weights(1), &set, ComponentMask::ALL).unwrap();
        for s in 0..4 {
            let f = set.functions(s);
            let want: f64 = f.iter().map(|x| x * x).sum::<f64>() * 2.0;
            assert!((mpo.diagonal_value(&[s]) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn penalties_zero_when_unweighted() {
        let set = PlyAngleSet::conventional();
        let mpo = mpo_penalties(&ConstraintWeights::none(), &set, 5).unwrap();
        for st in all_states(5, 4) {
            assert_eq!(mpo.diagonal_value(&st), 0.0);
        }
        assert_eq!(mpo.max_bond(), 1);
    }

    #[test]
    fn penalties_exhaustive_n6() {
        let set = PlyAngleSet::conventional();
        let w = ConstraintWeights {
            disorientation: 0.7,
            contiguity: 1.3,
            balanced: 0.4,
            ten_percent: 2.1,
            contiguity_limit: 2,
            disorientation_limit: 45.0,
        };
        let mpo = mpo_penalties(&w, &set, 6).unwrap();
        for st in all_states(6, 4) {
            let s = StackingSequence::new(st.clone(), &set).unwrap();
            let want = ViolationReport::evaluate(&s, &set, &w).weighted(&w);
            assert!((mpo.diagonal_value(&st) - want).abs() < 1e-9, "{st:?}");
        }
    }

    #[test]
    fn ten_percent_with_larger_minimum() {
        // N = 12 gives m = 2, exercising counters that survive past one hit.
        let set = PlyAngleSet::conventional();
        let w = ConstraintWeights {
            ten_percent: 1.0,
            ..ConstraintWeights::none()
        };
        let mpo = mpo_penalties(&w, &set, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let st: Vec<usize> = (0..12).map(|_| rng.random_range(0..4)).collect();
            let s = StackingSequence::new(st.clone(), &set).unwrap();
            let want = crate::objective::penalty_ten_percent(&s, &set).unwrap() as f64;
            assert!((mpo.diagonal_value(&st) - want).abs() < 1e-9);
        }
        for n in 1..4 {
            let mpo = mpo_penalties(&w, &set, n).unwrap();
            for st in all_states(n, 4) {
                let s = StackingSequence::new(st.clone(), &set).unwrap();
                let want = crate::objective::penalty_ten_percent(&s, &set).unwrap() as f64;
                assert_eq!(mpo.diagonal_value(&st), want);
            }
        }
    }

    #[test]
    fn fifteen_degree_balance() {
        let set = PlyAngleSet::fifteen_degree();
        let w = ConstraintWeights {
            balanced: 1.0,
            ..ConstraintWeights::none()
        };
        let mpo = mpo_penalties(&w, &set, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let st: Vec<usize> = (0..7).map(|_| rng.random_range(0..12)).collect();
            let s = StackingSequence::new(st.clone(), &set).unwrap();
            let want = crate::objective::penalty_balanced(&s, &set) as f64;
            assert!((mpo.diagonal_value(&st) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn bias_mpo() {
        let set = PlyAngleSet::conventional();
        assert_eq!(mpo_bias(0.0, 4, 4).unwrap().max_bond(), 1);
        let mpo = mpo_bias(0.3, 4, 5).unwrap();
        assert!((mpo.diagonal_value(&[2; 5]) - 1.2).abs() < 1e-12);
        let mpo = mpo_bias(-0.7, 4, 4).unwrap();
        for st in all_states(4, 4) {
            let s = StackingSequence::new(st.clone(), &set).unwrap();
            assert!((mpo.diagonal_value(&st) - clustering_bias(&s, -0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_hamiltonian_matches_total_loss() {
        let set = PlyAngleSet::conventional();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = ObjectiveSpec::lp_distance(
            set,
            5,
            random_target(&mut rng),
            DistanceMetric::Squared,
            ConstraintWeights::dmrg_defaults(5),
        )
        .unwrap()
        .with_bias(0.02);
        let mpo = hamiltonian_mpo(&spec).unwrap();
        for st in all_states(5, 4) {
            assert!((mpo.diagonal_value(&st) - spec.evaluate(&st)).abs() < 1e-9);
        }
    }

    #[test]
    fn buckling_hamiltonian_matches_objective() {
        let set = PlyAngleSet::conventional();
        let spec = ObjectiveSpec::buckling(set, 5, BucklingSetup::default(), ConstraintWeights::uniform(0.5)).unwrap();
        let mpo = hamiltonian_mpo(&spec).unwrap();
        for st in all_states(5, 4) {
            let want = spec.evaluate(&st);
            assert!((mpo.diagonal_value(&st) - want).abs() < 1e-9 * want.abs().max(1.0));
        }
    }
}
