//! Shot sampling from a statevector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sparse distribution over register basis states: `(index, weight)` sorted by index.
pub type Distribution = Vec<(usize, f64)>;

/// `shots` iid draws from `|amp|²`, returned as sorted `(index, count)` pairs.
pub fn sample(amps: &[f64], shots: usize, seed: u64) -> Vec<(usize, u64)> {
    let mut cdf = Vec::with_capacity(amps.len());
    let mut acc = 0.0;
    for a in amps {
        acc += a * a;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: Vec<usize> = (0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(amps.len() - 1)
        })
        .collect();
    hits.sort_unstable();
    let mut out: Vec<(usize, u64)> = Vec::new();
    for h in hits {
        match out.last_mut() {
            Some((i, c)) if *i == h => *c += 1,
            _ => out.push((h, 1)),
        }
    }
    out
}

/// Empirical frequencies of `shots` draws, or exact probabilities when `shots` is `None`.
pub fn distribution(amps: &[f64], shots: Option<usize>, seed: u64) -> Distribution {
    match shots {
        Some(n) => sample(amps, n, seed).into_iter().map(|(i, c)| (i, c as f64 / n as f64)).collect(),
        None => amps.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(i, a)| (i, a * a)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_always_sampled() {
        let mut amps = vec![0.0; 16];
        amps[5] = 1.0;
        assert_eq!(sample(&amps, 1000, 3), vec![(5, 1000)]);
    }

    #[test]
    fn two_state_superposition_within_binomial_bound() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = [h, 0.0, 0.0, h];
        for seed in 0..20 {
            let s = sample(&amps, 1000, seed);
            assert_eq!(s.iter().map(|x| x.1).sum::<u64>(), 1000);
            assert_eq!(s.len(), 2);
            assert!(s.iter().all(|&(_, c)| (400..=600).contains(&c)), "{s:?}");
        }
        assert_eq!(sample(&amps, 1000, 7), sample(&amps, 1000, 7));
    }

    #[test]
    fn exact_distribution() {
        let d = distribution(&[0.6, 0.0, 0.8], None, 0);
        assert_eq!(d.len(), 2);
        assert!((d[0].1 - 0.36).abs() < 1e-15 && (d[1].1 - 0.64).abs() < 1e-15);
    }
}
