//! Real-amplitude statevector over `N` encoded ply sites.

use crate::error::{Result, SsrError};

use super::encoding::PlyEncoding;

/// Largest ply count simulated in the full `4^N` space.
pub const MAX_FULL_PLIES: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    plies: usize,
    amps: Vec<f64>,
}

impl Statevector {
    /// |00…0⟩, all sites in ply state 0.
    pub fn zero(plies: usize) -> Result<Self> {
        if plies == 0 || plies > MAX_FULL_PLIES {
            return Err(SsrError::TooLarge(format!(
                "full statevector supports 1..={MAX_FULL_PLIES} plies, got {plies}"
            )));
        }
        let mut amps = vec![0.0; 1 << (2 * plies)];
        amps[0] = 1.0;
        Ok(Self { plies, amps })
    }

    pub fn basis(stack: &[usize]) -> Result<Self> {
        if stack.iter().any(|&s| s >= PlyEncoding::SITE_DIM) {
            return Err(SsrError::InvalidStack("ply index outside the 4-state encoding".into()));
        }
        let mut v = Self::zero(stack.len())?;
        v.amps[0] = 0.0;
        v.amps[PlyEncoding::index_of(stack)] = 1.0;
        Ok(v)
    }

    pub fn from_amplitudes(plies: usize, amps: Vec<f64>) -> Result<Self> {
        if plies == 0 || plies > MAX_FULL_PLIES || amps.len() != 1 << (2 * plies) {
            return Err(SsrError::DimensionMismatch(format!(
                "{} amplitudes for {plies} plies",
                amps.len()
            )));
        }
        Ok(Self { plies, amps })
    }

    pub fn plies(&self) -> usize {
        self.plies
    }

    pub fn qubits(&self) -> usize {
        2 * self.plies
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amps
    }

    pub fn amplitude(&self, stack: &[usize]) -> f64 {
        self.amps[PlyEncoding::index_of(stack)]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    pub fn apply_ry(&mut self, qubit: usize, theta: f64) {
        ry(&mut self.amps, qubit, theta);
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        cnot(&mut self.amps, control, target);
    }

    /// Partial swap `U(α)` of the ply states on sites `n` and `m`.
    pub fn apply_partial_swap(&mut self, n: usize, m: usize, alpha: f64) -> Result<()> {
        if n == m || n >= self.plies || m >= self.plies {
            return Err(SsrError::InvalidConfig(format!("partial swap needs two distinct sites, got ({n}, {m})")));
        }
        let (c, s) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
        for i in 0..self.amps.len() {
            let (cn, cm) = ((i >> (2 * n)) & 3, (i >> (2 * m)) & 3);
            let (pn, pm) = (PlyEncoding::decode(cn), PlyEncoding::decode(cm));
            if pn >= pm {
                continue;
            }
            let j = i ^ (cn << (2 * n)) ^ (cm << (2 * m)) | (cm << (2 * n)) | (cn << (2 * m));
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = c * a - s * b;
            self.amps[j] = s * a + c * b;
        }
        Ok(())
    }

    /// Ply-angle counts shared by every basis state with nonzero amplitude,
    /// or `None` when the support mixes different counts.
    pub fn conserved_counts(&self) -> Option<Vec<usize>> {
        let mut counts: Option<Vec<usize>> = None;
        for (i, a) in self.amps.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let mut c = vec![0; PlyEncoding::SITE_DIM];
            for s in PlyEncoding::stack_of(i, self.plies) {
                c[s] += 1;
            }
            match &counts {
                None => counts = Some(c),
                Some(prev) if *prev != c => return None,
                _ => {}
            }
        }
        counts
    }
}

pub(crate) fn ry(amps: &mut [f64], qubit: usize, theta: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let bit = 1usize << qubit;
    let mut base = 0;
    while base < amps.len() {
        for i in base..base + bit {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = c * a0 - s * a1;
            amps[i | bit] = s * a0 + c * a1;
        }
        base += 2 * bit;
    }
}

pub(crate) fn cnot(amps: &mut [f64], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}
