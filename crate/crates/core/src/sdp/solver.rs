//! Boundary-point (alternating-direction augmented Lagrangian) method for
//! `min <C, X>  s.t.  A(X) = b,  X ⪰ 0`.
//!
//! Each iteration solves `AAᵀ y = -(μ (A(X) - b) + A(Z - C))` with a sparse
//! Cholesky factor computed once, splits `V = C - Aᵀy - μX` into its positive
//! and negative spectral parts `V = Z - μX`, and thereby updates the dual slack
//! `Z ⪰ 0` and the primal `X ⪰ 0` with `<X, Z> = 0`.
//!
//! Internally every block is stored as its upper triangle with off-diagonal
//! entries scaled by `√2`, so Frobenius inner products become dot products.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LltRef, SymbolicCholesky};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, MatMut, Par, Side};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::SdpProblem;
use super::psd::spectral_split;
use crate::error::{Error, Result};
use crate::index::sym_index;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Tolerance on the relative primal, dual and gap residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial penalty parameter (on the internally scaled problem).
    pub mu_init: f64,
    /// Multiplicative step applied to `mu` when residuals are unbalanced.
    pub mu_factor: f64,
    /// Residual ratio that triggers a `mu` update.
    pub mu_ratio: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Iterations between convergence checks and checkpoint records.
    pub check_period: usize,
    /// Relaxation of the multiplier step, in (0, (1 + √5) / 2). 1 is the
    /// plain method.
    pub step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 20_000,
            mu_init: 1.0,
            mu_factor: 1.1,
            mu_ratio: 10.0,
            mu_min: 1e-6,
            mu_max: 1e6,
            check_period: 25,
            step: 1.6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.mu_init > 0.0
            && self.mu_factor > 1.0
            && self.mu_ratio >= 1.0
            && self.mu_min > 0.0
            && self.mu_min <= self.mu_max
            && self.check_period > 0
            && self.step > 0.0
            && self.step < 0.5 * (1.0 + 5f64.sqrt());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Converged,
    MaxIter,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "maxiter",
        }
    }
}

/// Relative residuals:
/// `primal = ||A(X) - b|| / (1 + ||b||)`,
/// `dual = ||C - Aᵀy - Z|| / (1 + ||C||)`,
/// `gap = |<C,X> - bᵀy| / (1 + |<C,X>| + |bᵀy|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.primal <= tol && self.dual <= tol && self.gap <= tol
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_inf: f64,
    pub dual_inf: f64,
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    /// One multiplier per constraint row.
    pub y: Vec<f64>,
    /// Dual slack `C - Aᵀy` projected onto the PSD cone.
    pub z: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Recomputed from `x`, `y`, `z`.
    pub residuals: Residuals,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Checkpoint records, one per `check_period` iterations.
    pub history: Vec<IterationRecord>,
    /// Penalty parameter at the returned iterate (internal scaling).
    pub mu: f64,
}

impl SdpSolution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Row-compressed constraint matrix in svec coordinates.
#[derive(Debug, Clone)]
pub(crate) struct SvecOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    ncols: usize,
}

impl SvecOperator {
    pub(crate) fn new(problem: &SdpProblem) -> Self {
        let layout = problem.layout();
        let offsets = layout.svec_offsets();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in &problem.constraints.rows {
            let mut entries: Vec<(usize, f64)> = row
                .entries
                .iter()
                .map(|e| {
                    let s = if e.i == e.j { 1.0 } else { 1.0 / SQRT2 };
                    (offsets[e.block] + sym_index(e.i, e.j), e.coef * s)
                })
                .collect();
            entries.sort_by_key(|&(c, _)| c);
            for (c, v) in entries {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals, ncols: layout.svec_total() }
    }

    pub(crate) fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn row(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    pub(crate) fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows()).map(|r| self.row(r).map(|k| self.vals[k] * x[self.cols[k]]).sum()).collect()
    }

    pub(crate) fn tmul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for k in self.row(r) {
                    out[self.cols[k]] += self.vals[k] * yr;
                }
            }
        }
        out
    }

    fn row_norms(&self) -> Vec<f64> {
        (0..self.nrows()).map(|r| self.row(r).map(|k| self.vals[k] * self.vals[k]).sum::<f64>().sqrt()).collect()
    }

    fn scale_rows(&mut self, s: &[f64]) {
        for (r, &sr) in s.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                self.vals[k] /= sr;
            }
        }
    }

    /// Lower triangle of `A Aᵀ` as sorted, merged triplets.
    fn gram_lower(&self) -> Vec<(usize, usize, f64)> {
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.ncols];
        for r in 0..self.nrows() {
            for k in self.row(r) {
                by_col[self.cols[k]].push((r, self.vals[k]));
            }
        }
        let mut trips: Vec<(usize, usize, f64)> = Vec::new();
        for col in &by_col {
            for &(r1, v1) in col {
                for &(r2, v2) in col {
                    if r1 >= r2 {
                        trips.push((r1, r2, v1 * v2));
                    }
                }
            }
        }
        trips.sort_by_key(|a| (a.1, a.0));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(trips.len());
        for t in trips {
            match merged.last_mut() {
                Some(last) if last.0 == t.0 && last.1 == t.1 => last.2 += t.2,
                _ => merged.push(t),
            }
        }
        merged
    }
}

pub(crate) fn to_svec(blocks: &[DMatrix<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(blocks.iter().map(|b| b.nrows() * (b.nrows() + 1) / 2).sum());
    for b in blocks {
        for j in 0..b.ncols() {
            for i in 0..=j {
                out.push(if i == j { b[(i, j)] } else { SQRT2 * b[(i, j)] });
            }
        }
    }
    out
}

fn block_from_svec(v: &[f64], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..=j {
            let x = v[sym_index(i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                m[(i, j)] = x / SQRT2;
                m[(j, i)] = x / SQRT2;
            }
        }
    }
    m
}

pub(crate) fn from_svec(v: &[f64], dims: &[usize]) -> Vec<DMatrix<f64>> {
    let mut off = 0;
    dims.iter()
        .map(|&d| {
            let len = d * (d + 1) / 2;
            let m = block_from_svec(&v[off..off + len], d);
            off += len;
            m
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residuals(
    op: &SvecOperator,
    b: &[f64],
    c: &[f64],
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> (Residuals, f64, f64) {
    let ax = op.mul(x);
    let pr: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
    let aty = op.tmul(y);
    let dr: Vec<f64> = (0..c.len()).map(|k| c[k] - aty[k] - z[k]).collect();
    let pobj = dot(c, x);
    let dobj = dot(b, y);
    let res = Residuals {
        primal: norm(&pr) / (1.0 + norm(b)),
        dual: norm(&dr) / (1.0 + norm(c)),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    };
    (res, pobj, dobj)
}

/// Residuals of a candidate `(X, y, Z)` for `problem`.
pub fn residuals(problem: &SdpProblem, x: &[DMatrix<f64>], y: &[f64], z: &[DMatrix<f64>]) -> Residuals {
    let op = SvecOperator::new(problem);
    let b = problem.rhs();
    relative_residuals(&op, &b, &to_svec(&problem.objective), &to_svec(x), y, &to_svec(z)).0
}

struct CholeskyFactor {
    symbolic: SymbolicCholesky<usize>,
    numeric: Vec<f64>,
    scratch: MemBuffer,
}

impl CholeskyFactor {
    fn new(dim: usize, lower: &[(usize, usize, f64)]) -> Result<Self> {
        let trips: Vec<Triplet<usize, usize, f64>> = lower.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &trips)
            .map_err(|e| Error::NumericalBreakdown(format!("AAᵀ assembly: {e:?}")))?;
        let symbolic = factorize_symbolic_cholesky(mat.symbolic(), Side::Lower, Default::default(), Default::default())
            .map_err(|e| Error::NumericalBreakdown(format!("AAᵀ symbolic factorization: {e:?}")))?;
        let mut numeric = vec![0.0; symbolic.len_val()];
        let par = Par::Seq;
        symbolic
            .factorize_numeric_llt::<f64>(
                &mut numeric,
                mat.as_ref(),
                Side::Lower,
                Default::default(),
                par,
                MemStack::new(&mut MemBuffer::new(
                    symbolic.factorize_numeric_llt_scratch::<f64>(par, Default::default()),
                )),
                Default::default(),
            )
            .map_err(|e| Error::NumericalBreakdown(format!("AAᵀ is not positive definite ({e:?}); rows dependent?")))?;
        let scratch = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, par));
        Ok(Self { symbolic, numeric, scratch })
    }

    fn solve_in_place(&mut self, rhs: &mut [f64]) {
        let n = rhs.len();
        let llt = LltRef::<'_, usize, f64>::new(&self.symbolic, &self.numeric);
        llt.solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(rhs, n, 1),
            Par::Seq,
            MemStack::new(&mut self.scratch),
        );
    }
}

/// Solves `problem` with default observer-free logging.
pub fn solve_boundary_point(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    solve_boundary_point_observed(problem, opts, &mut |_| {})
}

/// As [`solve_boundary_point`], calling `observer` at every checkpoint.
pub fn solve_boundary_point_observed(
    problem: &SdpProblem,
    opts: &SolverOptions,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<SdpSolution> {
    solve_boundary_point_from(problem, opts, None, observer)
}

type Checkpoint = (Residuals, f64, Vec<f64>, Vec<f64>, Vec<f64>);

/// As [`solve_boundary_point_observed`], starting from the iterate and penalty
/// of an earlier solution of a problem with the same constraint structure.
pub fn solve_boundary_point_from(
    problem: &SdpProblem,
    opts: &SolverOptions,
    start: Option<&SdpSolution>,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<SdpSolution> {
    opts.validate()?;
    let layout = problem.layout();
    let dims = layout.dims().to_vec();
    let offsets = layout.svec_offsets();
    let m = problem.constraints.len();
    let n = layout.svec_total();

    let raw = SvecOperator::new(problem);
    let b_raw = problem.rhs();
    let c_raw = to_svec(&problem.objective);

    let row_scale = raw.row_norms();
    if let Some(r) = row_scale.iter().position(|&s| s == 0.0) {
        return Err(Error::MalformedProblem(format!("constraint row {r} is empty")));
    }
    let mut op = raw.clone();
    op.scale_rows(&row_scale);
    let b: Vec<f64> = b_raw.iter().zip(&row_scale).map(|(b, s)| b / s).collect();
    let c_scale = c_raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_scale = if c_scale > 0.0 { c_scale } else { 1.0 };
    let c: Vec<f64> = c_raw.iter().map(|v| v / c_scale).collect();

    let mut factor = CholeskyFactor::new(m, &op.gram_lower())?;

    let unscale = |x: &[f64], y: &[f64], z: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let y_raw: Vec<f64> = y.iter().zip(&row_scale).map(|(y, s)| c_scale * y / s).collect();
        let z_raw: Vec<f64> = z.iter().map(|z| c_scale * z).collect();
        (x.to_vec(), y_raw, z_raw)
    };

    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut y = vec![0.0; m];
    let mut mu = opts.mu_init;
    if let Some(s) = start {
        let shapes_match = s.y.len() == m
            && s.x.len() == dims.len()
            && s.z.len() == dims.len()
            && s.x.iter().zip(&dims).all(|(b, &d)| b.nrows() == d)
            && s.z.iter().zip(&dims).all(|(b, &d)| b.nrows() == d);
        if !shapes_match {
            return Err(Error::MalformedProblem("warm start does not match the problem shape".into()));
        }
        x = to_svec(&s.x);
        z = to_svec(&s.z).iter().map(|v| v / c_scale).collect();
        y = s.y.iter().zip(&row_scale).map(|(y, r)| y * r / c_scale).collect();
        mu = s.mu.clamp(opts.mu_min, opts.mu_max);
    }
    let mut x_hat = x.clone();
    let b_norm = norm(&b);
    let c_norm = norm(&c);

    let mut history = Vec::new();
    // residuals, mu, x, y, z at the best checkpoint so far
    let mut best: Option<Checkpoint> = None;
    let mut iterations = 0;
    let mut ax = op.mul(&x);

    for it in 1..=opts.max_iter {
        iterations = it;
        let zc: Vec<f64> = z.iter().zip(&c).map(|(z, c)| z - c).collect();
        let azc = op.mul(&zc);
        for r in 0..m {
            y[r] = -(mu * (ax[r] - b[r]) + azc[r]);
        }
        factor.solve_in_place(&mut y);
        let aty = op.tmul(&y);
        let v: Vec<f64> = (0..n).map(|k| c[k] - aty[k] - mu * x[k]).collect();

        let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..dims.len())
            .into_par_iter()
            .map(|blk| {
                let seg = &v[offsets[blk]..offsets[blk + 1]];
                let (pos, neg) = spectral_split(&block_from_svec(seg, dims[blk]))?;
                Ok((to_svec(std::slice::from_ref(&pos)), to_svec(std::slice::from_ref(&neg))))
            })
            .collect::<Result<_>>()?;
        // x_hat is the PSD projection; x carries the relaxed multiplier.
        let mut dx = 0.0;
        for (blk, (zp, xn)) in parts.into_iter().enumerate() {
            let off = offsets[blk];
            for k in 0..zp.len() {
                let xh = xn[k] / mu;
                let xnew = (1.0 - opts.step) * x[off + k] + opts.step * xh;
                dx += (xnew - x[off + k]).powi(2);
                x[off + k] = xnew;
                x_hat[off + k] = xh;
                z[off + k] = zp[k];
            }
        }
        ax = op.mul(&x);
        let ax_hat = op.mul(&x_hat);
        let pinf = norm(&ax_hat.iter().zip(&b).map(|(a, b)| a - b).collect::<Vec<_>>()) / (1.0 + b_norm);
        let dinf = mu * dx.sqrt() / (1.0 + c_norm);

        if pinf > opts.mu_ratio * dinf {
            mu = (mu * opts.mu_factor).min(opts.mu_max);
        } else if dinf > opts.mu_ratio * pinf {
            mu = (mu / opts.mu_factor).max(opts.mu_min);
        }

        if it % opts.check_period == 0 || it == opts.max_iter {
            let (xr, yr, zr) = unscale(&x_hat, &y, &z);
            let (res, pobj, dobj) = relative_residuals(&raw, &b_raw, &c_raw, &xr, &yr, &zr);
            let rec = IterationRecord {
                iteration: it,
                primal_inf: res.primal,
                dual_inf: res.dual,
                gap: res.gap,
                primal_objective: pobj,
                dual_objective: dobj,
                mu,
            };
            observer(&rec);
            history.push(rec);
            if best.as_ref().is_none_or(|(r, ..)| res.max() < r.max()) {
                best = Some((res, mu, xr, yr, zr));
            }
            if res.within(opts.tol) {
                break;
            }
        }
    }

    let (res, best_mu, xr, yr, zr) = best.ok_or_else(|| Error::Config("max_iter must be positive".into()))?;
    let x_blocks = from_svec(&xr, &dims);
    let z_blocks = from_svec(&zr, &dims);
    let status = if res.within(opts.tol) { SolveStatus::Converged } else { SolveStatus::MaxIter };
    Ok(SdpSolution {
        primal_objective: problem.objective_value(&x_blocks),
        dual_objective: dot(&b_raw, &yr),
        residuals: residuals(problem, &x_blocks, &yr, &z_blocks),
        x: x_blocks,
        y: yr,
        z: z_blocks,
        iterations,
        status,
        history,
        mu: best_mu,
    })
}
