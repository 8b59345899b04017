use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const START_SEED: u64 = 0x5eed_1a2c;
const RITZ_CHECK_PERIOD: usize = 5;

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub eigenvalue: f64,
    pub eigenvector: DVector<f64>,
    pub iterations: usize,
    /// `||H x - θ x||` of the returned Ritz pair.
    pub residual: f64,
}

fn smallest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, DVector<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let m = eig.eigenvalues.imin();
    (eig.eigenvalues[m], eig.eigenvectors.column(m).into_owned())
}

/// Lowest eigenpair of a symmetric operator given as a matrix-vector product,
/// Lanczos with full (twice-iterated Gram-Schmidt) reorthogonalization.
pub fn lanczos_ground_state<F>(matvec: F, dim: usize, max_iter: usize, tol: f64) -> Result<LanczosOutcome>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v = DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
    v /= v.norm();

    let cap = max_iter.min(dim).max(1);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(cap);
    let mut alpha: Vec<f64> = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut estimate = f64::INFINITY;

    for k in 0..cap {
        let mut w = matvec(&v);
        let a = v.dot(&w);
        w.axpy(-a, &v, 1.0);
        if k > 0 {
            w.axpy(-beta[k - 1], &basis[k - 1], 1.0);
        }
        basis.push(v.clone());
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let b = w.norm();
        let breakdown = b < 1e-13 * a.abs().max(1.0);
        let last = k + 1 == cap;

        if breakdown || last || (k + 1) % RITZ_CHECK_PERIOD == 0 {
            let (theta, s) = smallest_ritz(&alpha, &beta);
            estimate = (b * s[k]).abs();
            if breakdown || estimate <= tol * theta.abs().max(1.0) {
                let mut x = DVector::zeros(dim);
                for (q, sk) in basis.iter().zip(s.iter()) {
                    x.axpy(*sk, q, 1.0);
                }
                x /= x.norm();
                let hx = matvec(&x);
                let theta = x.dot(&hx);
                let residual = (hx - &x * theta).norm();
                return Ok(LanczosOutcome { eigenvalue: theta, eigenvector: x, iterations: k + 1, residual });
            }
        }
        if breakdown {
            break;
        }
        beta.push(b);
        v = w / b;
    }
    Err(Error::LanczosNotConverged { iterations: cap, residual: estimate })
}
