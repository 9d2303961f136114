//! Finite-automaton assembly of diagonal MPOs.
//!
//! Every internal operator bond carries a `Ready` channel (nothing emitted
//! yet), a `Done` channel (term complete) and any number of intermediate
//! channels. `Ready → Ready` and `Done → Done` identities are implicit, so a
//! term only lists its emissions and its intermediate transitions.

use super::mpo::{MatrixProductOperator, MpoEntry, MpoSite};
use crate::error::{Result, SsrError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Ready,
    Mid(usize),
    Done,
}

#[derive(Debug, Clone)]
struct Transition {
    site: usize,
    from: Channel,
    to: Channel,
    diag: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AutomatonTerm {
    plies: usize,
    d: usize,
    /// Number of intermediate channels on each internal bond.
    mids: Vec<usize>,
    transitions: Vec<Transition>,
}

impl AutomatonTerm {
    pub fn new(plies: usize, d: usize) -> Self {
        Self {
            plies,
            d,
            mids: vec![0; plies.saturating_sub(1)],
            transitions: Vec::new(),
        }
    }

    pub fn plies(&self) -> usize {
        self.plies
    }

    /// Reserves `count` intermediate channels on every internal bond.
    pub fn with_uniform_mids(mut self, count: usize) -> Self {
        for m in &mut self.mids {
            *m = (*m).max(count);
        }
        self
    }

    pub fn set_mids(&mut self, bond: usize, count: usize) {
        self.mids[bond] = self.mids[bond].max(count);
    }

    /// Adds a transition at `site`. `Mid` channels on the left refer to the
    /// bond before the site, on the right to the bond after it.
    pub fn add(&mut self, site: usize, from: Channel, to: Channel, diag: Vec<f64>) {
        debug_assert_eq!(diag.len(), self.d);
        if let Channel::Mid(i) = from {
            assert!(site > 0, "no intermediate channel on the left boundary");
            self.set_mids(site - 1, i + 1);
        }
        if let Channel::Mid(i) = to {
            assert!(site + 1 < self.plies, "no intermediate channel on the right boundary");
            self.set_mids(site, i + 1);
        }
        self.transitions.push(Transition { site, from, to, diag });
    }

    /// Single-site contribution `Ready → Done`.
    pub fn emit(&mut self, site: usize, diag: Vec<f64>) {
        self.add(site, Channel::Ready, Channel::Done, diag);
    }

    /// Shared-boundary merge: intermediate channels are stacked, `Ready` and
    /// `Done` are shared, so the bond is `2 + Σ mids` rather than a direct sum.
    pub fn merge(terms: Vec<AutomatonTerm>) -> Result<AutomatonTerm> {
        let mut iter = terms.into_iter();
        let mut acc = iter
            .next()
            .ok_or_else(|| SsrError::DimensionMismatch("empty term list".into()))?;
        for t in iter {
            if t.plies != acc.plies || t.d != acc.d {
                return Err(SsrError::DimensionMismatch("automaton terms differ in N or d".into()));
            }
            let offsets = acc.mids.clone();
            let shift = |site: usize, c: Channel, left: bool| match c {
                Channel::Mid(i) => Channel::Mid(i + offsets[if left { site - 1 } else { site }]),
                other => other,
            };
            for tr in t.transitions {
                acc.transitions.push(Transition {
                    site: tr.site,
                    from: shift(tr.site, tr.from, true),
                    to: shift(tr.site, tr.to, false),
                    diag: tr.diag,
                });
            }
            for (m, extra) in acc.mids.iter_mut().zip(&t.mids) {
                *m += extra;
            }
        }
        Ok(acc)
    }

    pub fn build(&self) -> Result<MatrixProductOperator> {
        let n = self.plies;
        let d = self.d;
        if n == 0 {
            return Err(SsrError::DimensionMismatch("automaton needs at least one site".into()));
        }
        let width = |bond: usize| self.mids[bond] + 2;
        // Channel index on the left bond of `site` / right bond of `site`.
        let left_index = |site: usize, c: Channel| -> usize {
            if site == 0 {
                assert_eq!(c, Channel::Ready, "left boundary only carries Ready");
                return 0;
            }
            match c {
                Channel::Ready => 0,
                Channel::Mid(i) => 1 + i,
                Channel::Done => width(site - 1) - 1,
            }
        };
        let right_index = |site: usize, c: Channel| -> usize {
            if site + 1 == n {
                assert_eq!(c, Channel::Done, "right boundary only carries Done");
                return 0;
            }
            match c {
                Channel::Ready => 0,
                Channel::Mid(i) => 1 + i,
                Channel::Done => width(site) - 1,
            }
        };

        let mut sites: Vec<MpoSite> = (0..n)
            .map(|k| MpoSite {
                left: if k == 0 { 1 } else { width(k - 1) },
                right: if k + 1 == n { 1 } else { width(k) },
                entries: Vec::new(),
            })
            .collect();
        for k in 0..n {
            if k + 1 < n {
                sites[k].entries.push(MpoEntry {
                    from: 0,
                    to: 0,
                    diag: vec![1.0; d],
                });
            }
            if k > 0 {
                sites[k].entries.push(MpoEntry {
                    from: width(k - 1) - 1,
                    to: right_index(k, Channel::Done),
                    diag: vec![1.0; d],
                });
            }
        }
        for tr in &self.transitions {
            sites[tr.site].entries.push(MpoEntry {
                from: left_index(tr.site, tr.from),
                to: right_index(tr.site, tr.to),
                diag: tr.diag.clone(),
            });
        }
        Ok(MatrixProductOperator::new(d, sites)?.compress())
    }
}
