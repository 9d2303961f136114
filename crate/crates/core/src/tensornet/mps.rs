use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mpo::MatrixProductOperator;
use crate::error::{Result, SsrError};

/// Real site tensor of shape `(left, d, right)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub d: usize,
    pub right: usize,
    pub data: Vec<f64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, d: usize, right: usize) -> Self {
        Self {
            left,
            d,
            right,
            data: vec![0.0; left * d * right],
        }
    }

    #[inline]
    pub fn at(&self, a: usize, s: usize, b: usize) -> f64 {
        self.data[(a * self.d + s) * self.right + b]
    }

    #[inline]
    pub fn at_mut(&mut self, a: usize, s: usize, b: usize) -> &mut f64 {
        &mut self.data[(a * self.d + s) * self.right + b]
    }

    /// The `left × right` slice for physical index `s`.
    pub fn slice(&self, s: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.left, self.right, |a, b| self.at(a, s, b))
    }

    /// `(left·d) × right` matrix view.
    pub(crate) fn as_left_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left * self.d, self.right, &self.data)
    }

    /// `left × (d·right)` matrix view.
    pub(crate) fn as_right_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left, self.d * self.right, &self.data)
    }

    pub(crate) fn from_left_matrix(m: &DMatrix<f64>, d: usize) -> Self {
        let left = m.nrows() / d;
        let right = m.ncols();
        let mut t = Self::zeros(left, d, right);
        for r in 0..m.nrows() {
            for c in 0..right {
                t.data[r * right + c] = m[(r, c)];
            }
        }
        t
    }

    pub(crate) fn from_right_matrix(m: &DMatrix<f64>, d: usize) -> Self {
        let left = m.nrows();
        let right = m.ncols() / d;
        let mut t = Self::zeros(left, d, right);
        for r in 0..left {
            for c in 0..m.ncols() {
                t.data[r * m.ncols() + c] = m[(r, c)];
            }
        }
        t
    }
}

/// Open-boundary matrix product state with real tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductState {
    d: usize,
    tensors: Vec<SiteTensor>,
    max_bond: usize,
    center: Option<usize>,
}

impl MatrixProductState {
    /// Normalised random state with internal bonds `min(χ, d^k, d^(N-k))`,
    /// left-canonical with the centre on the last site.
    pub fn random(plies: usize, d: usize, chi: usize, seed: u64) -> Result<Self> {
        if chi == 0 || plies == 0 || d == 0 {
            return Err(SsrError::InvalidConfig("random MPS needs N, d, χ ≥ 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bond = |k: usize| -> usize {
            // bond k sits between site k-1 and site k
            if k == 0 || k == plies {
                return 1;
            }
            let cap = |e: usize| d.checked_pow(e as u32).unwrap_or(usize::MAX);
            chi.min(cap(k)).min(cap(plies - k))
        };
        let tensors = (0..plies)
            .map(|k| {
                let mut t = SiteTensor::zeros(bond(k), d, bond(k + 1));
                for x in &mut t.data {
                    *x = StandardNormal.sample(&mut rng);
                }
                t
            })
            .collect();
        let mut mps = Self {
            d,
            tensors,
            max_bond: chi,
            center: None,
        };
        mps.left_canonicalize();
        Ok(mps)
    }

    /// Product basis state `|s⟩`.
    pub fn basis(indices: &[usize], d: usize) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|&s| s >= d) {
            return Err(SsrError::InvalidStack("basis state index out of range".into()));
        }
        let tensors = indices
            .iter()
            .map(|&s| {
                let mut t = SiteTensor::zeros(1, d, 1);
                *t.at_mut(0, s, 0) = 1.0;
                t
            })
            .collect();
        Ok(Self {
            d,
            tensors,
            max_bond: 1,
            center: Some(indices.len() - 1),
        })
    }

    pub fn from_tensors(tensors: Vec<SiteTensor>, max_bond: usize) -> Result<Self> {
        let first = tensors
            .first()
            .ok_or_else(|| SsrError::DimensionMismatch("MPS needs at least one site".into()))?;
        let d = first.d;
        if first.left != 1 || tensors.last().unwrap().right != 1 {
            return Err(SsrError::DimensionMismatch("boundary bonds must be 1".into()));
        }
        for w in tensors.windows(2) {
            if w[0].right != w[1].left || w[1].d != d {
                return Err(SsrError::DimensionMismatch("inconsistent MPS bonds".into()));
            }
        }
        Ok(Self {
            d,
            tensors,
            max_bond,
            center: None,
        })
    }

    pub fn plies(&self) -> usize {
        self.tensors.len()
    }

    pub fn phys_dim(&self) -> usize {
        self.d
    }

    pub fn max_bond(&self) -> usize {
        self.max_bond
    }

    pub fn canonical_center(&self) -> Option<usize> {
        self.center
    }

    pub(crate) fn set_center(&mut self, c: Option<usize>) {
        self.center = c;
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut Vec<SiteTensor> {
        &mut self.tensors
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.plies() - 1].iter().map(|t| t.right).collect()
    }

    /// QR sweep from the left; the norm ends up on the last site and is
    /// then divided out.
    pub fn left_canonicalize(&mut self) {
        let n = self.plies();
        for k in 0..n - 1 {
            let m = self.tensors[k].as_left_matrix();
            let qr = m.qr();
            let (q, r) = (qr.q(), qr.r());
            self.tensors[k] = SiteTensor::from_left_matrix(&q, self.d);
            let next = self.tensors[k + 1].as_right_matrix();
            self.tensors[k + 1] = SiteTensor::from_right_matrix(&(r * next), self.d);
        }
        let norm = self.tensors[n - 1].data.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut self.tensors[n - 1].data {
                *x /= norm;
            }
        }
        self.center = Some(n - 1);
    }

    /// Mirror image: site `k` becomes site `N - 1 - k`.
    pub fn reversed(&self) -> Self {
        let tensors = self
            .tensors
            .iter()
            .rev()
            .map(|t| {
                let mut r = SiteTensor::zeros(t.right, t.d, t.left);
                for a in 0..t.left {
                    for s in 0..t.d {
                        for b in 0..t.right {
                            *r.at_mut(b, s, a) = t.at(a, s, b);
                        }
                    }
                }
                r
            })
            .collect();
        let n = self.plies();
        Self {
            d: self.d,
            tensors,
            max_bond: self.max_bond,
            center: self.center.map(|c| n - 1 - c),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        let mut env = DMatrix::from_element(1, 1, 1.0);
        for t in &self.tensors {
            let mut next = DMatrix::zeros(t.right, t.right);
            for s in 0..self.d {
                let a = t.slice(s);
                next += a.transpose() * &env * &a;
            }
            env = next;
        }
        env[(0, 0)]
    }

    pub fn normalize(&mut self) {
        let nrm = self.norm_squared().sqrt();
        if nrm > 0.0 {
            let k = self.center.unwrap_or(0);
            for x in &mut self.tensors[k].data {
                *x /= nrm;
            }
        }
    }

    pub fn amplitude(&self, indices: &[usize]) -> f64 {
        let mut v = DMatrix::from_element(1, 1, 1.0);
        for (t, &s) in self.tensors.iter().zip(indices) {
            v = v * t.slice(s);
        }
        v[(0, 0)]
    }

    /// `⟨ψ|Ĥ|ψ⟩` by left-to-right contraction through the operator channels.
    pub fn expectation(&self, op: &MatrixProductOperator) -> Result<f64> {
        if op.plies() != self.plies() || op.phys_dim() != self.d {
            return Err(SsrError::DimensionMismatch("MPS and MPO differ in N or d".into()));
        }
        let mut env = vec![DMatrix::from_element(1, 1, 1.0)];
        for (t, site) in self.tensors.iter().zip(op.sites()) {
            let slices: Vec<DMatrix<f64>> = (0..self.d).map(|s| t.slice(s)).collect();
            let mut next = vec![DMatrix::zeros(t.right, t.right); site.right];
            for e in &site.entries {
                for (s, a) in slices.iter().enumerate() {
                    if e.diag[s] != 0.0 {
                        next[e.to] += (a.transpose() * &env[e.from] * a) * e.diag[s];
                    }
                }
            }
            env = next;
        }
        Ok(env[0][(0, 0)])
    }
}

/// Sequential projection from the last site to the first, picking the most
/// probable index at each step; near-ties go to the lowest index.
pub fn collapse_to_basis(state: &MatrixProductState) -> Vec<usize> {
    let n = state.plies();
    let d = state.phys_dim();
    // prefix[k]: ⟨ψ|ψ⟩ contracted over sites 0..k
    let mut prefix = Vec::with_capacity(n);
    prefix.push(DMatrix::from_element(1, 1, 1.0));
    for t in &state.tensors()[..n - 1] {
        let env = prefix.last().unwrap();
        let mut next = DMatrix::zeros(t.right, t.right);
        for s in 0..d {
            let a = t.slice(s);
            next += a.transpose() * env * &a;
        }
        prefix.push(next);
    }

    let mut out = vec![0; n];
    let mut v = nalgebra::DVector::from_element(1, 1.0);
    for k in (0..n).rev() {
        let t = &state.tensors()[k];
        let candidates: Vec<nalgebra::DVector<f64>> = (0..d).map(|s| t.slice(s) * &v).collect();
        let probs: Vec<f64> = candidates
            .iter()
            .map(|w| (w.transpose() * &prefix[k] * w)[(0, 0)].max(0.0))
            .collect();
        let best = probs.iter().cloned().fold(0.0, f64::max);
        let pick = if best > 0.0 {
            probs.iter().position(|&p| p >= best * (1.0 - 1e-12)).unwrap()
        } else {
            0
        };
        out[k] = pick;
        let w = &candidates[pick];
        v = if best > 0.0 { w / probs[pick].sqrt() } else { w.clone() };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_state_is_normalised_and_deterministic() {
        let a = MatrixProductState::random(6, 4, 8, 42).unwrap();
        let b = MatrixProductState::random(6, 4, 8, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_squared() - 1.0).abs() < 1e-10);
        assert_eq!(a.bond_dims(), vec![4, 8, 8, 8, 4]);
        let p = MatrixProductState::random(5, 3, 1, 1).unwrap();
        assert!(p.bond_dims().iter().all(|&b| b == 1));
        assert_ne!(a, MatrixProductState::random(6, 4, 8, 43).unwrap());
    }

    #[test]
    fn amplitudes_square_sum_to_norm() {
        let a = MatrixProductState::random(4, 3, 4, 7).unwrap();
        let mut total = 0.0;
        for x in 0..81 {
            let idx = [x % 3, (x / 3) % 3, (x / 9) % 3, x / 27];
            total += a.amplitude(&idx).powi(2);
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectation_of_diagonal_operator() {
        let diags = (0..4).map(|k| vec![k as f64, 1.0, -2.0]).collect();
        let op = MatrixProductOperator::one_local(3, diags).unwrap();
        let b = MatrixProductState::basis(&[0, 1, 2, 0], 3).unwrap();
        assert!((b.expectation(&op).unwrap() - op.diagonal_value(&[0, 1, 2, 0])).abs() < 1e-12);

        let a = MatrixProductState::random(4, 3, 4, 9).unwrap();
        let mut want = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in 0..81 {
            let idx = [x % 3, (x / 3) % 3, (x / 9) % 3, x / 27];
            let h = op.diagonal_value(&idx);
            want += a.amplitude(&idx).powi(2) * h;
            lo = lo.min(h);
            hi = hi.max(h);
        }
        let e = a.expectation(&op).unwrap();
        assert!((e - want).abs() < 1e-10);
        assert!(e >= lo - 1e-12 && e <= hi + 1e-12);
        assert_eq!(a.expectation(&MatrixProductOperator::zero(4, 3)).unwrap(), 0.0);
    }

    #[test]
    fn collapse_of_basis_state_is_identity() {
        let idx = [3, 0, 2, 2, 1];
        let b = MatrixProductState::basis(&idx, 4).unwrap();
        assert_eq!(collapse_to_basis(&b), idx.to_vec());
    }

    #[test]
    fn collapse_tie_breaks_low() {
        // (|1111⟩ + |2222⟩)/√2 as a bond-2 MPS
        let d = 4;
        let n = 4;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut ts = Vec::new();
        for k in 0..n {
            let left = if k == 0 { 1 } else { 2 };
            let right = if k == n - 1 { 1 } else { 2 };
            let mut t = SiteTensor::zeros(left, d, right);
            for c in 0..2 {
                let a = if k == 0 { 0 } else { c };
                let b = if k == n - 1 { 0 } else { c };
                *t.at_mut(a, 1 + c, b) = if k == 0 { r } else { 1.0 };
            }
            ts.push(t);
        }
        let mps = MatrixProductState::from_tensors(ts, 2).unwrap();
        assert!((mps.norm_squared() - 1.0).abs() < 1e-12);
        assert_eq!(collapse_to_basis(&mps), vec![1; 4]);
    }
}
