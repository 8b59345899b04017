//! Eigenvalue clipping onto the PSD cone.
//!
//! Blocks are split into the connected components of their exact nonzero
//! pattern before diagonalizing. Symmetry-adapted problems keep exact zeros
//! between symmetry sectors through every iteration, so this recovers their
//! block structure without being told about it.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Components at least this large go to faer's blocked eigensolver.
const FAER_MIN_DIM: usize = 64;

/// Connected components of the graph with an edge wherever `m[(i,j)] != 0`.
pub fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..j {
            if m[(i, j)] != 0.0 || m[(j, i)] != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Indices of a component, its eigenvalues and eigenvectors as columns.
pub type EigenComponent = (Vec<usize>, Vec<f64>, DMatrix<f64>);

/// Eigenpairs of a symmetric matrix, per component: `(indices, eigenvalues, eigenvectors)`
/// where eigenvector columns live on `indices`.
pub fn eigen_components(m: &DMatrix<f64>) -> Result<Vec<EigenComponent>> {
    components(m)
        .into_iter()
        .map(|idx| {
            if idx.len() == 1 {
                let v = m[(idx[0], idx[0])];
                return Ok((idx, vec![v], DMatrix::from_element(1, 1, 1.0)));
            }
            let k = idx.len();
            if k >= FAER_MIN_DIM {
                let sub = faer::Mat::<f64>::from_fn(k, k, |a, b| m[(idx[a], idx[b])]);
                let eig = sub
                    .self_adjoint_eigen(faer::Side::Lower)
                    .map_err(|e| Error::Eigensolver(format!("{k}x{k} component: {e:?}")))?;
                let vals = (0..k).map(|c| eig.S().column_vector()[c]).collect();
                let u = eig.U();
                return Ok((idx, vals, DMatrix::from_fn(k, k, |a, b| u[(a, b)])));
            }
            let sub = DMatrix::from_fn(k, k, |a, b| m[(idx[a], idx[b])]);
            let eig = SymmetricEigen::try_new(sub, f64::EPSILON, 0)
                .ok_or_else(|| Error::Eigensolver(format!("{k}x{k} component")))?;
            Ok((idx, eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
        })
        .collect()
}

/// Splits symmetric `m` into `(m₊, m₋)` with `m = m₊ - m₋`, both PSD and
/// `m₊ m₋ = 0`: the positive and negative spectral parts.
pub fn spectral_split(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let mut pos = DMatrix::zeros(n, n);
    let mut neg = DMatrix::zeros(n, n);
    for (idx, vals, vecs) in eigen_components(m)? {
        if idx.len() == 1 {
            let v = vals[0];
            let i = idx[0];
            if v > 0.0 {
                pos[(i, i)] = v;
            } else {
                neg[(i, i)] = -v;
            }
            continue;
        }
        // one product on the smaller spectral side, the other part by difference
        let k = idx.len();
        let n_pos = vals.iter().filter(|&&l| l > 0.0).count();
        let take_pos = n_pos <= k - n_pos;
        let cols: Vec<usize> = (0..k).filter(|&c| if take_pos { vals[c] > 0.0 } else { vals[c] < 0.0 }).collect();
        let u = vecs.select_columns(&cols);
        let mut scaled = u.clone();
        for (a, &c) in cols.iter().enumerate() {
            scaled.column_mut(a).scale_mut(vals[c].abs());
        }
        let part = scaled * u.transpose();
        for a in 0..k {
            for b in 0..k {
                let v = 0.5 * (part[(a, b)] + part[(b, a)]);
                let x = m[(idx[a], idx[b])];
                let (p, q) = if take_pos { (v, v - x) } else { (x + v, v) };
                pos[(idx[a], idx[b])] = p;
                neg[(idx[a], idx[b])] = q;
            }
        }
    }
    Ok((pos, neg))
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
pub fn project_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Eigensolver(format!("non-square {}x{} matrix", m.nrows(), m.ncols())));
    }
    let sym = (m + m.transpose()) * 0.5;
    Ok(spectral_split(&sym)?.0)
}

/// Smallest eigenvalue of a symmetric matrix (0 for an empty one).
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let sym = (m + m.transpose()) * 0.5;
    Ok(eigen_components(&sym)?
        .into_iter()
        .flat_map(|(_, vals, _)| vals)
        .fold(f64::INFINITY, f64::min)
        .min(if m.nrows() == 0 { 0.0 } else { f64::INFINITY }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clips_negative_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::dvector![3.0, -2.0]);
        let p = project_psd(&m).unwrap();
        assert_eq!(p, DMatrix::from_diagonal(&nalgebra::dvector![3.0, 0.0]));
    }

    #[test]
    fn psd_input_unchanged() {
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.5, -1.0, 1.0, 0.0, 0.3, 2.0]);
        let m = &b * b.transpose();
        let p = project_psd(&m).unwrap();
        assert!((p - &m).amax() < 1e-12);
    }

    #[test]
    fn components_of_block_matrix() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = 1.0;
        m[(2, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        assert_eq!(components(&m), vec![vec![0, 2], vec![1], vec![3]]);
    }

    // Nearest PSD point of a 2x2 symmetric [[a, b], [b, c]] in closed form:
    // with λ± = (a+c)/2 ± sqrt(((a-c)/2)² + b²), the projection is the matrix
    // itself when λ₋ ≥ 0, zero when λ₊ ≤ 0, and λ₊ u uᵀ otherwise.
    fn analytic_nearest(a: f64, b: f64, c: f64) -> [f64; 3] {
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let (lp, lm) = (mean + rad, mean - rad);
        if lm >= 0.0 {
            [a, b, c]
        } else if lp <= 0.0 {
            [0.0; 3]
        } else {
            // (A - λ₋ I) is rank one: λ₊ u uᵀ scaled by (λ₊ - λ₋)
            let s = lp / (lp - lm);
            [s * (a - lm), s * b, s * (c - lm)]
        }
    }

    proptest! {
        #[test]
        fn two_by_two_matches_closed_form(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let m = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
            let p = project_psd(&m).unwrap();
            let e = analytic_nearest(a, b, c);
            prop_assert!((p[(0, 0)] - e[0]).abs() < 1e-9);
            prop_assert!((p[(0, 1)] - e[1]).abs() < 1e-9);
            prop_assert!((p[(1, 1)] - e[2]).abs() < 1e-9);
        }

        #[test]
        fn projection_idempotent(v in proptest::collection::vec(-3.0f64..3.0, 16)) {
            let m = DMatrix::from_row_slice(4, 4, &v);
            let p = project_psd(&m).unwrap();
            let pp = project_psd(&p).unwrap();
            prop_assert!((pp - &p).amax() < 1e-12);
            prop_assert!(min_eigenvalue(&p).unwrap() > -1e-12);
        }
    }
}
