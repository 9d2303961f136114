//! Hardware-efficient and count-conserving variational circuits.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};

use super::encoding::PlyEncoding;
use super::statevector::{cnot, ry, Statevector};

/// Largest multiset-permutation subspace the permutation circuit simulates.
pub const MAX_SUBSPACE: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Ry { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
    PartialSwap { sites: (usize, usize), param: usize },
}

impl Gate {
    pub fn param(&self) -> Option<usize> {
        match *self {
            Gate::Ry { param, .. } | Gate::PartialSwap { param, .. } => Some(param),
            Gate::Cnot { .. } => None,
        }
    }
}

/// Shifts and weights with `∂f(θ) = Σ w·f(θ + shift)`.
pub type ShiftRule = &'static [(f64, f64)];

const RY_RULE: ShiftRule = &[(FRAC_PI_2, 0.5), (-FRAC_PI_2, -0.5)];

/// The partial swap has generator spectrum {−½, 0, ½}, hence frequencies ½
/// and 1 and a four-term rule.
const SWAP_RULE: ShiftRule = &[
    (FRAC_PI_2, 0.5),
    (-FRAC_PI_2, -0.5),
    (PI, 0.5 * (0.5 - FRAC_1_SQRT_2)),
    (-PI, -0.5 * (0.5 - FRAC_1_SQRT_2)),
];

/// A parameterised circuit acting on a real register of `dim()` amplitudes.
pub trait Ansatz: Sync {
    fn plies(&self) -> usize;
    fn num_params(&self) -> usize;
    fn dim(&self) -> usize;
    fn gates(&self) -> &[Gate];
    fn initial_register(&self) -> Vec<f64>;
    fn initial_params(&self) -> Vec<f64>;
    fn apply_gate(&self, gate: &Gate, params: &[f64], shift: f64, amps: &mut [f64]);
    /// Stack of register basis state `i`, midplane first.
    fn stack_of(&self, i: usize) -> Vec<usize>;
    fn shift_rule(&self, param: usize) -> ShiftRule;

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(SsrError::DimensionMismatch(format!(
                "{} parameters for a circuit with {}",
                params.len(),
                self.num_params()
            )));
        }
        Ok(())
    }

    fn run(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let mut amps = self.initial_register();
        for g in self.gates() {
            self.apply_gate(g, params, 0.0, &mut amps);
        }
        Ok(amps)
    }

    /// Calls `visit(param, rule_index, amplitudes)` for every shifted circuit,
    /// reusing the state before each parameterised gate.
    fn for_each_shifted(&self, params: &[f64], visit: &mut dyn FnMut(usize, usize, &[f64])) -> Result<()> {
        self.check_params(params)?;
        let gates = self.gates();
        let mut prefix = self.initial_register();
        let mut buf = vec![0.0; prefix.len()];
        for (k, g) in gates.iter().enumerate() {
            if let Some(p) = g.param() {
                for (r, &(shift, _)) in self.shift_rule(p).iter().enumerate() {
                    buf.copy_from_slice(&prefix);
                    self.apply_gate(g, params, shift, &mut buf);
                    for h in &gates[k + 1..] {
                        self.apply_gate(h, params, 0.0, &mut buf);
                    }
                    visit(p, r, &buf);
                }
            }
            self.apply_gate(g, params, 0.0, &mut prefix);
        }
        Ok(())
    }
}

/// `n_rep` blocks of [RY on every qubit, CNOT chain k → k+1], then a final RY layer.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareEfficient {
    plies: usize,
    n_rep: usize,
    gates: Vec<Gate>,
}

impl HardwareEfficient {
    pub fn new(plies: usize, n_rep: usize) -> Result<Self> {
        Statevector::zero(plies)?;
        let q = 2 * plies;
        let mut gates = Vec::new();
        for r in 0..=n_rep {
            gates.extend((0..q).map(|k| Gate::Ry { qubit: k, param: r * q + k }));
            if r < n_rep {
                gates.extend((0..q - 1).map(|k| Gate::Cnot { control: k, target: k + 1 }));
            }
        }
        Ok(Self { plies, n_rep, gates })
    }

    pub fn n_rep(&self) -> usize {
        self.n_rep
    }

    pub fn apply(&self, params: &[f64]) -> Result<Statevector> {
        Statevector::from_amplitudes(self.plies, self.run(params)?)
    }
}

impl Ansatz for HardwareEfficient {
    fn plies(&self) -> usize {
        self.plies
    }

    fn num_params(&self) -> usize {
        (self.n_rep + 1) * 2 * self.plies
    }

    fn dim(&self) -> usize {
        1 << (2 * self.plies)
    }

    fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn initial_register(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[0] = 1.0;
        v
    }

    /// Zero except the final layer at π/2: the uniform superposition.
    fn initial_params(&self) -> Vec<f64> {
        let q = 2 * self.plies;
        let mut p = vec![0.0; self.num_params()];
        p[self.n_rep * q..].fill(FRAC_PI_2);
        p
    }

    fn apply_gate(&self, gate: &Gate, params: &[f64], shift: f64, amps: &mut [f64]) {
        match *gate {
            Gate::Ry { qubit, param } => ry(amps, qubit, params[param] + shift),
            Gate::Cnot { control, target } => cnot(amps, control, target),
            Gate::PartialSwap { .. } => unreachable!("not part of this circuit"),
        }
    }

    fn stack_of(&self, i: usize) -> Vec<usize> {
        PlyEncoding::stack_of(i, self.plies)
    }

    fn shift_rule(&self, _: usize) -> ShiftRule {
        RY_RULE
    }
}

pub fn hwe_apply(params: &[f64], n_rep: usize, plies: usize) -> Result<Statevector> {
    HardwareEfficient::new(plies, n_rep)?.apply(params)
}

/// Brick pattern over adjacent sites, even pairs then odd pairs, until `total`
/// gates are placed.
pub fn brick_pairs(plies: usize, total: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(total);
    if plies < 2 {
        return out;
    }
    let mut layer = 0;
    while out.len() < total {
        let mut n = layer % 2;
        while n + 1 < plies && out.len() < total {
            out.push((n, n + 1));
            n += 2;
        }
        layer += 1;
    }
    out
}

/// Partial swaps on the multiset permutations of a fixed initial stack.
#[derive(Debug, Clone)]
pub struct PermutationCircuit {
    initial: Vec<usize>,
    counts: Vec<usize>,
    gates: Vec<Gate>,
    basis: Vec<Vec<usize>>,
    start: usize,
    /// Basis pairs `(|…s…t…⟩, |…t…s…⟩)` with `s < t`, per distinct site pair.
    partners: HashMap<(usize, usize), Vec<(u32, u32)>>,
}

impl PermutationCircuit {
    /// Counts per ply state; the initial stack lists the states in index order.
    pub fn from_counts(counts: &[usize], plies: usize, pairs: Option<Vec<(usize, usize)>>) -> Result<Self> {
        if counts.iter().sum::<usize>() != plies {
            return Err(SsrError::InvalidStack(format!(
                "counts {counts:?} do not sum to {plies} plies"
            )));
        }
        let initial = counts.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c)).collect();
        Self::new(initial, counts.len(), pairs)
    }

    /// Circuit starting at `initial`; default pairs are the brick pattern with
    /// `N(N − 1)` gates.
    pub fn new(initial: Vec<usize>, d: usize, pairs: Option<Vec<(usize, usize)>>) -> Result<Self> {
        let n = initial.len();
        if n == 0 || initial.iter().any(|&s| s >= d) {
            return Err(SsrError::InvalidStack("initial stack empty or outside the angle set".into()));
        }
        let pairs = pairs.unwrap_or_else(|| brick_pairs(n, n * (n - 1)));
        if pairs.iter().any(|&(a, b)| a == b || a >= n || b >= n) {
            return Err(SsrError::InvalidConfig("partial swaps need two distinct sites in range".into()));
        }
        let mut counts = vec![0; d];
        for &s in &initial {
            counts[s] += 1;
        }
        let mut cur = initial.clone();
        cur.sort_unstable();
        let mut basis = Vec::new();
        loop {
            basis.push(cur.clone());
            if basis.len() > MAX_SUBSPACE {
                return Err(SsrError::TooLarge(format!("more than {MAX_SUBSPACE} permutations")));
            }
            if !crate::baselines::next_permutation(&mut cur) {
                break;
            }
        }
        let index: HashMap<&[usize], u32> = basis.iter().enumerate().map(|(i, b)| (b.as_slice(), i as u32)).collect();
        let mut partners = HashMap::new();
        for &(a, b) in &pairs {
            partners.entry((a, b)).or_insert_with(|| {
                let mut tmp = vec![0; n];
                basis
                    .iter()
                    .enumerate()
                    .filter(|(_, st)| st[a] < st[b])
                    .map(|(i, st)| {
                        tmp.copy_from_slice(st);
                        tmp.swap(a, b);
                        (i as u32, index[tmp.as_slice()])
                    })
                    .collect::<Vec<_>>()
            });
        }
        let start = index[initial.as_slice()] as usize;
        let gates = pairs
            .iter()
            .enumerate()
            .map(|(k, &sites)| Gate::PartialSwap { sites, param: k })
            .collect();
        Ok(Self { initial, counts, gates, basis, start, partners })
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::PartialSwap { sites, .. } => *sites,
                _ => unreachable!(),
            })
            .collect()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    /// Subspace amplitudes embedded in the full encoded space.
    pub fn embed(&self, amps: &[f64]) -> Result<Statevector> {
        if self.counts.len() != PlyEncoding::SITE_DIM {
            return Err(SsrError::DimensionMismatch("embedding needs four ply states".into()));
        }
        let mut full = Statevector::zero(self.initial.len())?.into_amplitudes();
        full[0] = 0.0;
        for (st, a) in self.basis.iter().zip(amps) {
            full[PlyEncoding::index_of(st)] = *a;
        }
        Statevector::from_amplitudes(self.initial.len(), full)
    }
}

impl Ansatz for PermutationCircuit {
    fn plies(&self) -> usize {
        self.initial.len()
    }

    fn num_params(&self) -> usize {
        self.gates.len()
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn initial_register(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.basis.len()];
        v[self.start] = 1.0;
        v
    }

    fn initial_params(&self) -> Vec<f64> {
        vec![FRAC_PI_2; self.gates.len()]
    }

    fn apply_gate(&self, gate: &Gate, params: &[f64], shift: f64, amps: &mut [f64]) {
        let Gate::PartialSwap { sites, param } = *gate else {
            unreachable!("not part of this circuit")
        };
        let half = (params[param] + shift) / 2.0;
        let (c, s) = (half.cos(), half.sin());
        for &(i, j) in &self.partners[&sites] {
            let (a, b) = (amps[i as usize], amps[j as usize]);
            amps[i as usize] = c * a - s * b;
            amps[j as usize] = s * a + c * b;
        }
    }

    fn stack_of(&self, i: usize) -> Vec<usize> {
        self.basis[i].clone()
    }

    fn shift_rule(&self, _: usize) -> ShiftRule {
        SWAP_RULE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    HardwareEfficient,
    Permutation,
}

/// Full-space description of one circuit instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub kind: CircuitKind,
    pub plies: usize,
    pub parameters: Vec<f64>,
    /// Repetitions of the hardware-efficient block.
    #[serde(default)]
    pub n_rep: usize,
    /// Initial basis state of the permutation circuit.
    #[serde(default)]
    pub initial: Vec<usize>,
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
}

impl CircuitSpec {
    pub fn hardware_efficient(plies: usize, n_rep: usize, parameters: Vec<f64>) -> Self {
        Self { kind: CircuitKind::HardwareEfficient, plies, parameters, n_rep, initial: Vec::new(), pairs: Vec::new() }
    }

    pub fn permutation(initial: Vec<usize>, pairs: Vec<(usize, usize)>, parameters: Vec<f64>) -> Self {
        Self { kind: CircuitKind::Permutation, plies: initial.len(), parameters, n_rep: 0, initial, pairs }
    }

    /// Gate-by-gate simulation in the full `4^N` space.
    pub fn apply(&self) -> Result<Statevector> {
        match self.kind {
            CircuitKind::HardwareEfficient => hwe_apply(&self.parameters, self.n_rep, self.plies),
            CircuitKind::Permutation => {
                if self.initial.len() != self.plies {
                    return Err(SsrError::DimensionMismatch("initial stack length differs from plies".into()));
                }
                if self.parameters.len() != self.pairs.len() {
                    return Err(SsrError::DimensionMismatch(format!(
                        "{} parameters for {} partial swaps",
                        self.parameters.len(),
                        self.pairs.len()
                    )));
                }
                let mut v = Statevector::basis(&self.initial)?;
                for (&(a, b), &alpha) in self.pairs.iter().zip(&self.parameters) {
                    v.apply_partial_swap(a, b, alpha)?;
                }
                Ok(v)
            }
        }
    }
}

pub fn permutation_circuit_apply(spec: &CircuitSpec) -> Result<Statevector> {
    if spec.kind != CircuitKind::Permutation {
        return Err(SsrError::InvalidConfig("expected a permutation circuit".into()));
    }
    spec.apply()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hwe_initial_is_uniform() {
        for n in 1..=4 {
            let c = HardwareEfficient::new(n, 2).unwrap();
            let v = c.apply(&c.initial_params()).unwrap();
            let want = 0.5f64.powi(n as i32);
            assert!(v.amplitudes().iter().all(|a| (a.abs() - want).abs() < 1e-12));
        }
        let v = hwe_apply(&vec![0.0; 3 * 2 * 3], 2, 3).unwrap();
        assert_eq!(v.amplitudes()[0], 1.0);
        assert!(hwe_apply(&[0.0; 5], 2, 3).is_err());
    }

    #[test]
    fn hwe_norm_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = HardwareEfficient::new(5, 2).unwrap();
        for _ in 0..5 {
            let p: Vec<f64> = (0..c.num_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert!((c.apply(&p).unwrap().norm_squared() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn brick_schedule() {
        let p = brick_pairs(8, 56);
        assert_eq!(p.len(), 56);
        assert_eq!(&p[..5], &[(0, 1), (2, 3), (4, 5), (6, 7), (1, 2)]);
        assert!(p.iter().all(|&(a, b)| b == a + 1));
    }

    #[test]
    fn subspace_matches_full_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let circ = PermutationCircuit::from_counts(&[2, 1, 2, 1], 6, None).unwrap();
        assert_eq!(circ.dim(), 180);
        let p: Vec<f64> = (0..circ.num_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let sub = circ.embed(&circ.run(&p).unwrap()).unwrap();
        let full = CircuitSpec::permutation(circ.initial().to_vec(), circ.pairs(), p).apply().unwrap();
        for (a, b) in sub.amplitudes().iter().zip(full.amplitudes()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((full.norm_squared() - 1.0).abs() < 1e-10);
        assert_eq!(full.conserved_counts(), Some(vec![2, 1, 2, 1]));
    }

    #[test]
    fn permutation_support() {
        let circ = PermutationCircuit::from_counts(&[1, 1, 1, 1], 4, None).unwrap();
        assert_eq!(circ.dim(), 24);
        let spec = CircuitSpec::permutation(circ.initial().to_vec(), circ.pairs(), circ.initial_params());
        let v = permutation_circuit_apply(&spec).unwrap();
        let support = v.amplitudes().iter().filter(|a| a.abs() > 0.0).count();
        assert!(support <= 24 && support > 1);
        let zero = CircuitSpec::permutation(vec![0, 1, 2, 3], circ.pairs(), vec![0.0; 12]).apply().unwrap();
        assert_eq!(zero.amplitude(&[0, 1, 2, 3]), 1.0);
        assert!(PermutationCircuit::from_counts(&[1, 1, 1, 1], 5, None).is_err());
    }
}
