//! Lowest eigenpair of real symmetric operators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, SsrError};

/// Lowest eigenpair of a dense symmetric matrix. Degenerate eigenvalues
/// resolve to the eigenvector nalgebra returns first.
pub fn lowest_dense(h: &DMatrix<f64>) -> (f64, DVector<f64>) {
    if h.nrows() == 1 {
        return (h[(0, 0)], DVector::from_element(1, 1.0));
    }
    let eig = SymmetricEigen::new(h.clone());
    let (mut k, mut best) = (0, f64::INFINITY);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < best {
            best = v;
            k = i;
        }
    }
    (best, eig.eigenvectors.column(k).into_owned())
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-12 }
    }
}

/// Lanczos with full reorthogonalisation, started from `start`.
pub fn lowest_lanczos<F>(apply: F, start: &DVector<f64>, opts: LanczosOptions) -> Result<(f64, DVector<f64>)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let dim = start.len();
    let nrm = start.norm();
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(SsrError::Singular("Lanczos start vector has zero norm".into()));
    }
    let mut basis: Vec<DVector<f64>> = vec![start / nrm];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::INFINITY;
    let steps = opts.max_iter.min(dim);
    for j in 0..steps {
        let mut w = apply(&basis[j]);
        let a = w.dot(&basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = w.dot(q);
                w.axpy(-c, q, 1.0);
            }
        }
        let b = w.norm();
        let t = tridiagonal(&alpha, &beta);
        let (theta, y) = lowest_dense(&t);
        let residual = b * y[j].abs();
        let converged = residual < opts.tol * theta.abs().max(1.0) || (theta - last).abs() < opts.tol * 1e-2;
        last = theta;
        if converged || b < 1e-14 || j + 1 == steps {
            let mut v = DVector::zeros(dim);
            for (q, c) in basis.iter().zip(y.iter()) {
                v.axpy(*c, q, 1.0);
            }
            let vn = v.norm();
            if !(vn > 0.0) || !theta.is_finite() {
                return Err(SsrError::Singular("Lanczos produced a degenerate vector".into()));
            }
            return Ok((theta, v / vn));
        }
        beta.push(b);
        basis.push(w / b);
    }
    Err(SsrError::Singular("Lanczos did not converge".into()))
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    #[test]
    fn dense_lowest() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let (e, v) = lowest_dense(&h);
        assert_eq!(e, -1.0);
        assert!((v[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        for seed in 0..5 {
            let h = random_sym(60, seed);
            let (e0, _) = lowest_dense(&h);
            let start = DVector::from_element(60, 1.0);
            let (e, v) = lowest_lanczos(|x| &h * x, &start, LanczosOptions::default()).unwrap();
            assert!((e - e0).abs() < 1e-9, "{e} vs {e0}");
            let r = &h * &v - &v * e;
            assert!(r.norm() < 1e-5);
        }
    }

    #[test]
    fn lanczos_rejects_zero_start() {
        let h = random_sym(4, 1);
        assert!(lowest_lanczos(|x| &h * x, &DVector::zeros(4), LanczosOptions::default()).is_err());
    }
}
