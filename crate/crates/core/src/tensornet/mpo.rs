use crate::error::{Result, SsrError};

/// One nonzero operator-bond transition `from → to` acting as the diagonal
/// matrix `diag` on the physical index.
#[derive(Debug, Clone, PartialEq)]
pub struct MpoEntry {
    pub from: usize,
    pub to: usize,
    pub diag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpoSite {
    pub left: usize,
    pub right: usize,
    pub entries: Vec<MpoEntry>,
}

/// Matrix product operator that is diagonal in the computational basis.
///
/// Each site tensor `W[w, s, t, w']` is stored sparsely as a list of
/// `(w, w')` blocks whose physical part is `δ(s, t) · diag[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductOperator {
    d: usize,
    sites: Vec<MpoSite>,
}

impl MatrixProductOperator {
    pub fn new(d: usize, sites: Vec<MpoSite>) -> Result<Self> {
        if d == 0 || sites.is_empty() {
            return Err(SsrError::DimensionMismatch("MPO needs d ≥ 1 and at least one site".into()));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(SsrError::DimensionMismatch("boundary operator bonds must be 1".into()));
        }
        for (n, site) in sites.iter().enumerate() {
            if n + 1 < sites.len() && site.right != sites[n + 1].left {
                return Err(SsrError::DimensionMismatch(format!("bond mismatch after site {n}")));
            }
            for e in &site.entries {
                if e.from >= site.left || e.to >= site.right || e.diag.len() != d {
                    return Err(SsrError::DimensionMismatch(format!("malformed entry at site {n}")));
                }
            }
        }
        Ok(Self { d, sites })
    }

    /// The zero operator with unit bonds.
    pub fn zero(plies: usize, d: usize) -> Self {
        let sites = (0..plies)
            .map(|_| MpoSite {
                left: 1,
                right: 1,
                entries: Vec::new(),
            })
            .collect();
        Self { d, sites }
    }

    /// Operator `Σ_n diag_n(s_n)` given one diagonal per site.
    pub fn one_local(d: usize, diags: Vec<Vec<f64>>) -> Result<Self> {
        let n = diags.len();
        let mut b = super::automaton::AutomatonTerm::new(n, d);
        for (k, diag) in diags.into_iter().enumerate() {
            b.emit(k, diag);
        }
        b.build()
    }

    pub fn plies(&self) -> usize {
        self.sites.len()
    }

    pub fn phys_dim(&self) -> usize {
        self.d
    }

    pub fn sites(&self) -> &[MpoSite] {
        &self.sites
    }

    pub fn site(&self, n: usize) -> &MpoSite {
        &self.sites[n]
    }

    /// Internal operator-bond dimensions, `N - 1` values.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `⟨s|Ĥ|s⟩` by propagating a channel vector through the sites.
    pub fn diagonal_value(&self, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.plies(), "basis state length");
        let mut v = vec![1.0];
        for (site, &s) in self.sites.iter().zip(indices) {
            let mut next = vec![0.0; site.right];
            for e in &site.entries {
                next[e.to] += v[e.from] * e.diag[s];
            }
            v = next;
        }
        v[0]
    }

    /// Dense site tensor in `(w_left, s, t, w_right)` row-major layout.
    pub fn dense_site(&self, n: usize) -> Vec<f64> {
        let site = &self.sites[n];
        let d = self.d;
        let mut out = vec![0.0; site.left * d * d * site.right];
        for e in &site.entries {
            for s in 0..d {
                out[((e.from * d + s) * d + s) * site.right + e.to] += e.diag[s];
            }
        }
        out
    }

    /// Same operator with the site order reversed.
    pub fn reversed(&self) -> Self {
        let sites = self
            .sites
            .iter()
            .rev()
            .map(|s| MpoSite {
                left: s.right,
                right: s.left,
                entries: s
                    .entries
                    .iter()
                    .map(|e| MpoEntry { from: e.to, to: e.from, diag: e.diag.clone() })
                    .collect(),
            })
            .collect();
        Self { d: self.d, sites }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        // Scaling the first site scales every path exactly once.
        for e in &mut out.sites[0].entries {
            for x in &mut e.diag {
                *x *= c;
            }
        }
        out.compress()
    }

    /// Merges duplicate transitions, drops zero entries and removes channels
    /// that lie on no boundary-to-boundary path.
    pub fn compress(mut self) -> Self {
        for site in &mut self.sites {
            site.entries.sort_by_key(|e| (e.from, e.to));
            let mut merged: Vec<MpoEntry> = Vec::with_capacity(site.entries.len());
            for e in site.entries.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.from == e.from && last.to == e.to => {
                        for (x, y) in last.diag.iter_mut().zip(&e.diag) {
                            *x += y;
                        }
                    }
                    _ => merged.push(e),
                }
            }
            merged.retain(|e| e.diag.iter().any(|&x| x != 0.0));
            site.entries = merged;
        }

        let n = self.sites.len();
        // forward[k][w]: channel w on the left bond of site k reachable from the left boundary
        let mut forward: Vec<Vec<bool>> = Vec::with_capacity(n + 1);
        forward.push(vec![true]);
        for site in &self.sites {
            let prev = forward.last().unwrap();
            let mut r = vec![false; site.right];
            for e in &site.entries {
                if prev[e.from] {
                    r[e.to] = true;
                }
            }
            forward.push(r);
        }
        let mut backward: Vec<Vec<bool>> = vec![Vec::new(); n + 1];
        backward[n] = vec![true];
        for k in (0..n).rev() {
            let site = &self.sites[k];
            let mut l = vec![false; site.left];
            for e in &site.entries {
                if backward[k + 1][e.to] {
                    l[e.from] = true;
                }
            }
            backward[k] = l;
        }

        // New index per channel on every bond; boundary bonds keep their single channel.
        let remap: Vec<Vec<Option<usize>>> = (0..=n)
            .map(|k| {
                if k == 0 || k == n {
                    return vec![Some(0)];
                }
                let mut next = 0;
                forward[k]
                    .iter()
                    .zip(&backward[k])
                    .map(|(&f, &b)| {
                        if f && b {
                            next += 1;
                            Some(next - 1)
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let dims: Vec<usize> = remap
            .iter()
            .map(|m| m.iter().filter(|x| x.is_some()).count().max(1))
            .collect();

        for (k, site) in self.sites.iter_mut().enumerate() {
            let entries = std::mem::take(&mut site.entries);
            site.entries = entries
                .into_iter()
                .filter_map(|e| match (remap[k][e.from], remap[k + 1][e.to]) {
                    (Some(f), Some(t)) => Some(MpoEntry { from: f, to: t, diag: e.diag }),
                    _ => None,
                })
                .collect();
            site.left = dims[k];
            site.right = dims[k + 1];
        }
        self
    }
}

/// Direct sum: internal bonds concatenate, boundaries are shared, so the
/// diagonal of the result is the sum of the diagonals.
pub fn mpo_sum(terms: &[MatrixProductOperator]) -> Result<MatrixProductOperator> {
    let first = terms
        .first()
        .ok_or_else(|| SsrError::DimensionMismatch("empty MPO sum".into()))?;
    let (n, d) = (first.plies(), first.phys_dim());
    if terms.iter().any(|t| t.plies() != n || t.phys_dim() != d) {
        return Err(SsrError::DimensionMismatch("MPO terms differ in N or d".into()));
    }
    if terms.len() == 1 {
        return Ok(first.clone());
    }
    // offsets[t][k]: offset of term t on bond k (left bond of site k)
    let mut sites = Vec::with_capacity(n);
    let bond_offsets = |k: usize| -> Vec<usize> {
        let mut acc = 0;
        terms
            .iter()
            .map(|t| {
                let off = acc;
                acc += if k == 0 { 1 } else { t.sites[k].left };
                off
            })
            .collect()
    };
    for k in 0..n {
        let left_off = bond_offsets(k);
        let right_off = if k + 1 < n { bond_offsets(k + 1) } else { vec![0; terms.len()] };
        let left = if k == 0 { 1 } else { terms.iter().map(|t| t.sites[k].left).sum() };
        let right = if k + 1 == n { 1 } else { terms.iter().map(|t| t.sites[k].right).sum() };
        let mut entries = Vec::new();
        for (ti, t) in terms.iter().enumerate() {
            for e in &t.sites[k].entries {
                let from = if k == 0 { 0 } else { e.from + left_off[ti] };
                let to = if k + 1 == n { 0 } else { e.to + right_off[ti] };
                entries.push(MpoEntry { from, to, diag: e.diag.clone() });
            }
        }
        sites.push(MpoSite { left, right, entries });
    }
    MatrixProductOperator::new(d, sites)
}
