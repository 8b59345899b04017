//! Exact diagonalization in a fixed `(N_up, N_down)` sector.
//!
//! Determinants are 64-bit occupation words, bit `p` set when spin orbital
//! `p` is occupied. A word stands for `Π_p (a†_p)^{n_p} |0>` with the lowest
//! orbital leftmost, so `a_p` and `a†_p` pick up `(-1)^{#occupied below p}`.

mod lanczos;
mod metric;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermion::LadderOp;
use crate::lattice::SecondQuantizedOperator;

pub use lanczos::{lanczos_ground_state, LanczosOutcome};
pub use metric::{extract_d1, extract_d2, extract_e3, extract_f3, extract_g2, extract_q2, extract_t2, MetricMatrices};

const MAX_SITES: usize = 31;

/// Canonically ordered determinants of one `(N_up, N_down)` sector.
#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    n_up: usize,
    n_down: usize,
    words: Vec<u64>,
    lookup: HashMap<u64, usize>,
}

/// All `bits`-bit masks with `ones` bits set, ascending (Gosper's hack).
fn combinations(bits: usize, ones: usize) -> Vec<u64> {
    if ones == 0 {
        return vec![0];
    }
    if ones > bits {
        return Vec::new();
    }
    let limit = 1u64 << bits;
    let mut out = Vec::new();
    let mut x: u64 = (1u64 << ones) - 1;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Places site-indexed masks on the even (up) or odd (down) bits.
fn spread(mask: u64, spin: usize) -> u64 {
    let mut w = 0u64;
    let mut m = mask;
    while m != 0 {
        let site = m.trailing_zeros() as usize;
        w |= 1u64 << (2 * site + spin);
        m &= m - 1;
    }
    w
}

impl FockBasis {
    pub fn new(sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        if sites > MAX_SITES {
            return Err(Error::BasisOverflow(2 * sites));
        }
        if n_up > sites || n_down > sites {
            return Err(Error::InvalidSector(format!("({n_up}, {n_down}) electrons on {sites} sites")));
        }
        let ups = combinations(sites, n_up);
        let downs = combinations(sites, n_down);
        let mut words: Vec<u64> =
            ups.iter().flat_map(|&u| downs.iter().map(move |&d| spread(u, 0) | spread(d, 1))).collect();
        words.sort_unstable();
        let lookup = words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        Ok(Self { sites, n_up, n_down, words, lookup })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn rank(&self) -> usize {
        2 * self.sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    pub fn n_particles(&self) -> usize {
        self.n_up + self.n_down
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn word(&self, i: usize) -> u64 {
        self.words[i]
    }

    pub fn index_of(&self, word: u64) -> Option<usize> {
        self.lookup.get(&word).copied()
    }
}

/// Applies `ops` (rightmost first) to a determinant. `None` when the result vanishes.
pub fn apply_string(word: u64, ops: &[LadderOp]) -> Option<(u64, f64)> {
    let mut w = word;
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let bit = 1u64 << op.orbital;
        let occupied = w & bit != 0;
        if occupied == op.dagger {
            return None;
        }
        if (w & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        w ^= bit;
    }
    Some((w, sign))
}

/// A real state vector over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct Wavefunction {
    basis: Arc<FockBasis>,
    coeffs: DVector<f64>,
}

impl Wavefunction {
    pub fn new(basis: Arc<FockBasis>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::InvalidSector(format!(
                "{} amplitudes for a basis of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    /// Single determinant with unit amplitude.
    pub fn determinant(basis: Arc<FockBasis>, word: u64) -> Result<Self> {
        let idx =
            basis.index_of(word).ok_or_else(|| Error::InvalidSector(format!("determinant {word:#b} not in basis")))?;
        let mut coeffs = DVector::zeros(basis.dim());
        coeffs[idx] = 1.0;
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.coeffs.norm();
        if n > 0.0 {
            self.coeffs /= n;
        }
        self
    }

    pub fn dot(&self, other: &Wavefunction) -> f64 {
        self.coeffs.dot(&other.coeffs)
    }

    /// Sparse image `ops |psi>` as `(word, amplitude)` pairs sorted by word;
    /// the result may lie in any particle sector.
    pub fn apply_string_sparse(&self, ops: &[LadderOp]) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = self
            .basis
            .words()
            .iter()
            .zip(self.coeffs.iter())
            .filter(|(_, &c)| c != 0.0)
            .filter_map(|(&w, &c)| apply_string(w, ops).map(|(w2, s)| (w2, s * c)))
            .collect();
        // a fixed string maps distinct determinants to distinct determinants
        out.sort_unstable_by_key(|&(w, _)| w);
        out
    }
}

fn check_sector(op: &SecondQuantizedOperator) -> Result<()> {
    for (n, term) in op.terms().iter().enumerate() {
        let mut delta = [0i64; 2];
        for l in &term.ops {
            delta[l.orbital % 2] += if l.dagger { 1 } else { -1 };
        }
        if delta != [0, 0] {
            return Err(Error::SectorViolation(n));
        }
    }
    Ok(())
}

/// `op |psi>` in the same sector, not normalized.
pub fn apply_operator(op: &SecondQuantizedOperator, psi: &Wavefunction) -> Result<Wavefunction> {
    check_sector(op)?;
    let basis = psi.basis();
    let mut out = DVector::zeros(basis.dim());
    for (j, &w) in basis.words().iter().enumerate() {
        let c = psi.coeffs[j];
        if c == 0.0 {
            continue;
        }
        for (n, term) in op.terms().iter().enumerate() {
            if let Some((w2, s)) = apply_string(w, &term.ops) {
                let i = basis.index_of(w2).ok_or(Error::SectorViolation(n))?;
                out[i] += term.coef * s * c;
            }
        }
    }
    Ok(Wavefunction { basis: basis.clone(), coeffs: out })
}

/// Row-compressed matrix of a sector-preserving operator.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SectorMatrix {
    pub fn new(op: &SecondQuantizedOperator, basis: &FockBasis) -> Result<Self> {
        check_sector(op)?;
        let dim = basis.dim();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (j, &w) in basis.words().iter().enumerate() {
            for (n, term) in op.terms().iter().enumerate() {
                if let Some((w2, s)) = apply_string(w, &term.ops) {
                    let i = basis.index_of(w2).ok_or(Error::SectorViolation(n))?;
                    rows[i].push((j, term.coef * s));
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { dim, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let out: Vec<f64> = (0..self.dim)
            .into_par_iter()
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum())
            .collect();
        DVector::from_vec(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EdOptions {
    /// Largest sector dimension handled by dense diagonalization.
    pub dense_limit: usize,
    pub lanczos_max_iter: usize,
    pub lanczos_tol: f64,
}

impl Default for EdOptions {
    fn default() -> Self {
        Self { dense_limit: 2000, lanczos_max_iter: 500, lanczos_tol: 1e-10 }
    }
}

/// Lowest eigenpair of `op` in `basis`.
pub fn ground_state(op: &SecondQuantizedOperator, basis: &Arc<FockBasis>) -> Result<(f64, Wavefunction)> {
    ground_state_with(op, basis, &EdOptions::default())
}

pub fn ground_state_with(
    op: &SecondQuantizedOperator,
    basis: &Arc<FockBasis>,
    opts: &EdOptions,
) -> Result<(f64, Wavefunction)> {
    let h = SectorMatrix::new(op, basis)?;
    let (e0, v) = if h.dim() <= opts.dense_limit {
        let eig = SymmetricEigen::try_new(h.to_dense(), 1e-14, 0)
            .ok_or_else(|| Error::Eigensolver("dense symmetric eigensolver did not converge".into()))?;
        let k = eig.eigenvalues.imin();
        (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
    } else {
        let out = lanczos_ground_state(|x| h.matvec(x), h.dim(), opts.lanczos_max_iter, opts.lanczos_tol)?;
        (out.eigenvalue, out.eigenvector)
    };
    let psi = Wavefunction::new(basis.clone(), v)?.normalized();
    Ok((e0, psi))
}

/// `<psi|op|psi>`.
pub fn expectation(op: &SecondQuantizedOperator, psi: &Wavefunction) -> Result<f64> {
    Ok(psi.dot(&apply_operator(op, psi)?))
}
