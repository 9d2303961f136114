use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::objective::ObjectiveSpec;

/// Largest search space the exhaustive oracles accept.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

fn space_size(d: usize, n: usize) -> Option<u64> {
    (d as u64).checked_pow(n as u32)
}

/// Exhaustive minimum of the objective; ties go to the lexicographically
/// smallest index vector.
pub fn brute_force_min(spec: &ObjectiveSpec) -> Result<(Vec<usize>, f64)> {
    let n = spec.plies();
    let d = spec.angle_set().len();
    match space_size(d, n) {
        Some(s) if s <= BRUTE_FORCE_LIMIT => {}
        _ => {
            return Err(SsrError::TooLarge(format!(
                "{d}^{n} stacks exceeds the brute-force limit {BRUTE_FORCE_LIMIT}"
            )))
        }
    }
    let mut cur = vec![0usize; n];
    let mut best = cur.clone();
    let mut best_val = spec.evaluate(&cur);
    // Odometer with the last position varying fastest enumerates in lexicographic order.
    loop {
        let mut k = n;
        loop {
            if k == 0 {
                return Ok((best, best_val));
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < d {
                break;
            }
            cur[k] = 0;
        }
        let v = spec.evaluate(&cur);
        if v < best_val {
            best_val = v;
            best.clone_from(&cur);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationEntry {
    pub stack: Vec<usize>,
    pub lambda_b: f64,
    /// Weighted constraint penalty of the stack.
    pub penalty: f64,
}

fn multinomial(counts: &[usize]) -> Option<u64> {
    let mut total: u64 = 0;
    let mut acc: u128 = 1;
    for &c in counts {
        for i in 1..=c as u64 {
            total += 1;
            acc = acc * total as u128 / i as u128;
            if acc > u64::MAX as u128 {
                return None;
            }
        }
    }
    Some(acc as u64)
}

/// In-place next lexicographic permutation; `false` once the sequence is the last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every distinct arrangement of the multiset `counts`, sorted by descending
/// buckling factor; equal factors keep lexicographic order.
pub fn brute_force_permutations(spec: &ObjectiveSpec, counts: &[usize]) -> Result<Vec<PermutationEntry>> {
    let d = spec.angle_set().len();
    if counts.len() != d {
        return Err(SsrError::DimensionMismatch(format!("{} counts for {d} angles", counts.len())));
    }
    if counts.iter().sum::<usize>() != spec.plies() {
        return Err(SsrError::InvalidStack("counts do not sum to N".into()));
    }
    match multinomial(counts) {
        Some(m) if m <= BRUTE_FORCE_LIMIT => {}
        _ => return Err(SsrError::TooLarge("permutation count exceeds the brute-force limit".into())),
    }
    let mut cur: Vec<usize> = counts.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c)).collect();
    let mut out = Vec::new();
    loop {
        out.push(PermutationEntry {
            stack: cur.clone(),
            lambda_b: spec.buckling_factor_of(&cur),
            penalty: spec.penalty(&cur),
        });
        if !next_permutation(&mut cur) {
            break;
        }
    }
    out.sort_by(|a, b| b.lambda_b.total_cmp(&a.lambda_b));
    Ok(out)
}
