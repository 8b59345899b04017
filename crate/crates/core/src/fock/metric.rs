//! Reduced density matrices and metric matrices evaluated directly from a
//! wavefunction. Every matrix here is a Gram matrix `<u_a | u_b>` of the
//! vectors `u_a = O_a |psi>` for a family of operator strings, which is the
//! defining expectation value rewritten as an overlap.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::Wavefunction;
use crate::fermion::LadderOp;
use crate::index::{PairIndexer, TripleIndexer};

type SparseState = Vec<(u64, f64)>;

fn sparse_dot(a: &SparseState, b: &SparseState) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn gram(vectors: &[SparseState]) -> DMatrix<f64> {
    let n = vectors.len();
    let rows: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|i| (0..=i).map(|j| sparse_dot(&vectors[i], &vectors[j])).collect()).collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn images(psi: &Wavefunction, strings: impl Iterator<Item = Vec<LadderOp>>) -> Vec<SparseState> {
    strings.map(|s| psi.apply_string_sparse(&s)).collect()
}

use LadderOp as L;

/// `D1[i,k] = <a†_i a_k>`.
pub fn extract_d1(psi: &Wavefunction) -> DMatrix<f64> {
    let r = psi.basis().rank();
    gram(&images(psi, (0..r).map(|k| vec![L::annihilate(k)])))
}

/// `D2[(i,j),(k,l)] = <a†_i a†_j a_l a_k>` on packed pairs.
pub fn extract_d2(psi: &Wavefunction) -> DMatrix<f64> {
    let pairs = PairIndexer::new(psi.basis().rank());
    gram(&images(psi, pairs.iter().map(|(k, l)| vec![L::annihilate(l), L::annihilate(k)])))
}

/// `Q2[(i,j),(k,l)] = <a_i a_j a†_l a†_k>` on packed pairs.
pub fn extract_q2(psi: &Wavefunction) -> DMatrix<f64> {
    let pairs = PairIndexer::new(psi.basis().rank());
    gram(&images(psi, pairs.iter().map(|(k, l)| vec![L::create(l), L::create(k)])))
}

/// `G2[(i,j),(k,l)] = <a†_i a_j a†_l a_k>` on ordered pairs `i * r + j`.
pub fn extract_g2(psi: &Wavefunction) -> DMatrix<f64> {
    let r = psi.basis().rank();
    let strings = (0..r * r).map(|kl| {
        let (k, l) = (kl / r, kl % r);
        vec![L::create(l), L::annihilate(k)]
    });
    gram(&images(psi, strings))
}

/// `E3[(i,j,k),(l,m,n)] = <C_ijk C†_lmn>` with `C_ijk = a†_i a†_j a_k`.
pub fn extract_e3(psi: &Wavefunction) -> DMatrix<f64> {
    let triples = TripleIndexer::new(psi.basis().rank());
    let strings = (0..triples.len()).map(|t| {
        let (l, m, n) = triples.unpack(t);
        vec![L::create(n), L::annihilate(m), L::annihilate(l)]
    });
    gram(&images(psi, strings))
}

/// `F3[(i,j,k),(l,m,n)] = <C†_lmn C_ijk>`, the two-hole/one-particle partner of E3.
pub fn extract_f3(psi: &Wavefunction) -> DMatrix<f64> {
    let triples = TripleIndexer::new(psi.basis().rank());
    let strings = (0..triples.len()).map(|t| {
        let (i, j, k) = triples.unpack(t);
        vec![L::create(i), L::create(j), L::annihilate(k)]
    });
    gram(&images(psi, strings))
}

/// `T2 = E3 + F3`.
pub fn extract_t2(psi: &Wavefunction) -> DMatrix<f64> {
    extract_e3(psi) + extract_f3(psi)
}

/// All metric matrices of one state.
#[derive(Debug, Clone)]
pub struct MetricMatrices {
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub q2: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    /// `(E3, F3, T2)`, present when requested.
    pub three_body: Option<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>,
}

impl MetricMatrices {
    pub fn from_wavefunction(psi: &Wavefunction, with_t2: bool) -> Self {
        let three_body = with_t2.then(|| {
            let e3 = extract_e3(psi);
            let f3 = extract_f3(psi);
            let t2 = &e3 + &f3;
            (e3, f3, t2)
        });
        Self { d1: extract_d1(psi), d2: extract_d2(psi), q2: extract_q2(psi), g2: extract_g2(psi), three_body }
    }

    pub fn t2(&self) -> Option<&DMatrix<f64>> {
        self.three_body.as_ref().map(|(_, _, t2)| t2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use std::sync::Arc;

    fn det(l: usize, up: usize, dn: usize, word: u64) -> Wavefunction {
        let b = Arc::new(FockBasis::new(l, up, dn).unwrap());
        Wavefunction::determinant(b, word).unwrap()
    }

    #[test]
    fn determinant_d2_single_unit_entry() {
        // r = 4, N = 2: orbitals 0 and 3 occupied
        let psi = det(2, 1, 1, 0b1001);
        let d2 = extract_d2(&psi);
        let pairs = PairIndexer::new(4);
        let p = pairs.pack(0, 3);
        assert_eq!(d2[(p, p)], 1.0);
        assert_eq!(d2.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn filled_state_has_no_holes() {
        let psi = det(2, 2, 2, 0b1111);
        assert!(extract_q2(&psi).iter().all(|v| *v == 0.0));
        let t2 = extract_t2(&psi);
        assert!(t2.clone().symmetric_eigenvalues().min() > -1e-12);
    }

    #[test]
    fn vacuum_three_body() {
        let psi = det(2, 0, 0, 0);
        assert!(extract_e3(&psi).iter().all(|v| *v == 0.0));
        assert!(extract_f3(&psi).iter().all(|v| *v == 0.0));
        let q2 = extract_q2(&psi);
        assert_eq!(q2, DMatrix::identity(6, 6));
    }
}
