//! The variational 2-RDM program: minimize `Tr(K2 · D2)` over 2-RDMs whose
//! metric matrices are positive semidefinite.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::PairIndexer;
use crate::lattice::{build_extended_hubbard, reduce_to_two_body, HubbardParams, LatticeSpec, ReducedTwoBodyMatrix};
use crate::maps::{build_constraints, map_d_to_1rdm, AffineMap, BlockKind, Positivity, SpinSector};
use crate::sdp::{
    eigen_components, min_eigenvalue, solve_boundary_point_from, IterationRecord, Residuals, RowTag, SdpProblem,
    SdpSolution, SolveStatus, SolverOptions,
};

/// Which metric matrices are constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionLevel {
    /// D, Q and G.
    #[serde(rename = "2pos")]
    TwoPos,
    /// D, Q, G and T2.
    #[serde(rename = "2pos+t2")]
    TwoPosT2,
}

impl ConditionLevel {
    pub const ALL: [ConditionLevel; 2] = [ConditionLevel::TwoPos, ConditionLevel::TwoPosT2];

    pub fn conditions(&self) -> Vec<Positivity> {
        match self {
            ConditionLevel::TwoPos => vec![Positivity::D, Positivity::Q, Positivity::G],
            ConditionLevel::TwoPosT2 => vec![Positivity::D, Positivity::Q, Positivity::G, Positivity::T2],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionLevel::TwoPos => "2pos",
            ConditionLevel::TwoPosT2 => "2pos+t2",
        }
    }
}

impl fmt::Display for ConditionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2pos" | "twopos" => Ok(ConditionLevel::TwoPos),
            "2pos+t2" | "t2" | "twopost2" => Ok(ConditionLevel::TwoPosT2),
            _ => Err(Error::Config(format!("unknown condition level '{s}' (expected 2pos or 2pos+t2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// Add the row fixing `<N_up - N_down>` to the sector value.
    pub spin_row: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { spin_row: true }
    }
}

/// An assembled program together with what is needed to interpret it.
#[derive(Debug, Clone)]
pub struct V2rdmProblem {
    pub sdp: SdpProblem,
    pub k2: ReducedTwoBodyMatrix,
    pub level: ConditionLevel,
    pub spec: LatticeSpec,
    /// Block index of each kind present.
    pub blocks: Vec<(BlockKind, usize)>,
    /// Maps defining the non-D2 blocks.
    pub maps: Vec<AffineMap>,
}

impl V2rdmProblem {
    pub fn block(&self, kind: BlockKind) -> Option<usize> {
        self.blocks.iter().find(|(k, _)| *k == kind).map(|&(_, b)| b)
    }

    fn d2_block(&self) -> usize {
        self.block(BlockKind::D2).expect("D2 block always present")
    }

    /// Number of pairs `N(N-1)/2`, the trace of the 2-RDM.
    pub fn n_pairs(&self) -> f64 {
        let n = self.k2.n_particles as f64;
        n * (n - 1.0) / 2.0
    }

    /// Trace of each block. The constraints fix it: every block is an affine
    /// image of the 2-RDM whose trace depends on `Tr D2` and `Tr D1` only, so a
    /// single determinant gives the value shared by all feasible points.
    pub fn block_traces(&self) -> Result<Vec<f64>> {
        let rank = self.k2.rank;
        let pairs = PairIndexer::new(rank);
        let mut d2 = DMatrix::zeros(pairs.len(), pairs.len());
        for (p, (_, j)) in pairs.iter().enumerate() {
            if j < self.k2.n_particles {
                d2[(p, p)] = 1.0;
            }
        }
        let mut traces = vec![0.0; self.sdp.layout().len()];
        traces[self.d2_block()] = self.n_pairs();
        for map in &self.maps {
            let b = self.block(map.target).expect("map target present");
            traces[b] = map.apply(&d2)?.trace();
        }
        Ok(traces)
    }
}

/// Lower bound on the optimum of `problem` from any multipliers `y`:
/// `bᵀy + Σ_b τ_b min(0, λ_min(C_b - (Aᵀy)_b))` with `τ_b` the fixed block
/// traces. It needs no dual feasibility, so an inexact solve still yields a
/// rigorous bound, looser by the dual slack's negative part.
pub fn certified_bound(problem: &V2rdmProblem, y: &[f64]) -> Result<f64> {
    let sdp = &problem.sdp;
    if y.len() != sdp.constraints.len() {
        return Err(Error::MalformedProblem("multipliers do not match the problem".into()));
    }
    let mut slack = sdp.objective.clone();
    let mut by = 0.0;
    for (row, &yr) in sdp.constraints.rows.iter().zip(y) {
        by += row.rhs * yr;
        for e in &row.entries {
            if e.i == e.j {
                slack[e.block][(e.i, e.i)] -= yr * e.coef;
            } else {
                slack[e.block][(e.i, e.j)] -= 0.5 * yr * e.coef;
                slack[e.block][(e.j, e.i)] -= 0.5 * yr * e.coef;
            }
        }
    }
    let traces = problem.block_traces()?;
    let mut bound = by;
    for (s, tau) in slack.iter().zip(traces) {
        bound += tau * min_eigenvalue(s)?.min(0.0);
    }
    Ok(bound)
}

pub fn assemble(spec: &LatticeSpec, params: &HubbardParams, level: ConditionLevel) -> Result<V2rdmProblem> {
    assemble_with(spec, params, level, &AssembleOptions::default())
}

pub fn assemble_with(
    spec: &LatticeSpec,
    params: &HubbardParams,
    level: ConditionLevel,
    opts: &AssembleOptions,
) -> Result<V2rdmProblem> {
    let op = build_extended_hubbard(spec, params)?;
    let n = spec.n_particles();
    let k2 = reduce_to_two_body(&op, n)?;
    let spin = opts.spin_row.then_some(SpinSector { n_up: spec.n_up, n_down: spec.n_down });
    let cons = build_constraints(spec.rank(), n, &level.conditions(), spin)?;
    let mut objective = cons.system.layout.zeros();
    let d2 = cons.block(BlockKind::D2).expect("D2 block always present");
    objective[d2] = k2.k2.clone();
    let sdp = SdpProblem::new(objective, cons.system)?;
    Ok(V2rdmProblem { sdp, k2, level, spec: *spec, blocks: cons.blocks, maps: cons.maps })
}

#[derive(Debug, Clone)]
pub struct V2rdmResult {
    /// `Tr(K2 · D2)` at the returned 2-RDM.
    pub energy: f64,
    /// `bᵀy`, the dual objective.
    pub dual_energy: f64,
    /// [`certified_bound`] at the returned multipliers: below the exact
    /// optimum however loosely the solve converged.
    pub certified_bound: f64,
    pub d2: DMatrix<f64>,
    /// Smallest eigenvalue of each primal block, by block name.
    pub min_eigenvalues: Vec<(String, f64)>,
    /// `Tr[(K2 - E_dual I / N_pairs) D2]`: zero at an optimal primal-dual pair.
    pub complementarity: f64,
    pub residuals: Residuals,
    pub status: SolveStatus,
    pub iterations: usize,
    pub level: ConditionLevel,
    pub solution: SdpSolution,
}

impl V2rdmResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

pub fn solve(
    spec: &LatticeSpec,
    params: &HubbardParams,
    level: ConditionLevel,
    opts: &SolverOptions,
) -> Result<V2rdmResult> {
    let problem = assemble(spec, params, level)?;
    solve_problem(&problem, opts, &mut |_| {})
}

/// Solves an assembled program, reporting checkpoints to `observer`.
pub fn solve_problem(
    problem: &V2rdmProblem,
    opts: &SolverOptions,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<V2rdmResult> {
    solve_problem_from(problem, opts, None, observer)
}

/// As [`solve_problem`], warm-started from the solution of a program with
/// the same lattice, sector and level.
pub fn solve_problem_from(
    problem: &V2rdmProblem,
    opts: &SolverOptions,
    start: Option<&SdpSolution>,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<V2rdmResult> {
    let solution = solve_boundary_point_from(&problem.sdp, opts, start, observer)?;
    let d2 = solution.x[problem.d2_block()].clone();
    let energy = problem.k2.energy(&d2);
    let dual_energy = solution.dual_objective;
    let layout = problem.sdp.layout();
    let min_eigenvalues = (0..layout.len())
        .map(|b| Ok((layout.name(b).to_string(), min_eigenvalue(&solution.x[b])?)))
        .collect::<Result<Vec<_>>>()?;
    let complementarity = energy - dual_energy * d2.trace() / problem.n_pairs();
    let certified_bound = certified_bound(problem, &solution.y)?;
    Ok(V2rdmResult {
        energy,
        dual_energy,
        certified_bound,
        d2,
        min_eigenvalues,
        complementarity,
        residuals: solution.residuals,
        status: solution.status,
        iterations: solution.iterations,
        level: problem.level,
        solution,
    })
}

/// One factor `β C C†` of the dual decomposition: `vector` is an eigenvector
/// of the dual slack of `block` and `beta` its eigenvalue.
#[derive(Debug, Clone)]
pub struct CertificateFactor {
    pub block: String,
    pub beta: f64,
    pub vector: DVector<f64>,
}

/// Decomposition `K2 - E = Σ β_i C_i C_i†` pulled back onto the 2-RDM space.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    /// The certified bound `bᵀy`.
    pub energy: f64,
    pub factors: Vec<CertificateFactor>,
    /// Frobenius norm of target minus reconstruction on the pair space.
    pub residual: f64,
    /// `tolerance_factor · ||K2||`.
    pub tolerance: f64,
    /// `Tr(Z_b X_b)` per block name.
    pub block_complementarity: Vec<(String, f64)>,
}

impl DualCertificate {
    pub fn min_beta(&self) -> f64 {
        self.factors.iter().map(|f| f.beta).fold(f64::INFINITY, f64::min)
    }

    pub fn total_complementarity(&self) -> f64 {
        self.block_complementarity.iter().map(|(_, v)| v).sum()
    }

    pub fn is_valid(&self) -> bool {
        self.residual <= self.tolerance && self.min_beta() >= -1e-9
    }
}

/// Default certificate tolerance relative to `||K2||`.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-4;

/// Rebuilds `K2 - E` from the dual slack blocks.
///
/// With `y` the multipliers, `E = bᵀy` and every derived block `X_k = M_k(D2)`
/// affine, dual feasibility gives, for every symmetric `D2`,
/// `Tr(K2 D2) - E = <Z_D2, D2> + Σ_k <Z_k, M_k(D2)> + y_tr (Tr D2 - P) + y_s (S(D2) - s)`
/// where `P = N(N-1)/2`, `S` is the spin functional and `s` its value. Constants
/// are made homogeneous through `Tr D2 = P`, so the identity is checked as
/// `K2 - (E/P) I - y_s (S_D - (s/P) I) = Z_D2 + Σ_k [M_kᵀ Z_k + (c_k/P) I]`.
pub fn dual_certificate(problem: &V2rdmProblem, solution: &SdpSolution) -> Result<DualCertificate> {
    let layout = problem.sdp.layout();
    if solution.z.len() != layout.len() || solution.y.len() != problem.sdp.constraints.len() {
        return Err(Error::MalformedProblem("solution does not match the problem".into()));
    }
    let d2b = problem.d2_block();
    let np = layout.dim(d2b);
    let rank = problem.k2.rank;
    let p = problem.n_pairs();

    let mut recon = solution.z[d2b].clone();
    let mut pull_d1 = DMatrix::zeros(rank, rank);
    let mut constant = 0.0;
    for map in &problem.maps {
        let b = problem.block(map.target).expect("map target present");
        let (p2, p1, c) = map.adjoint(&solution.z[b]);
        recon += p2;
        pull_d1 += p1;
        constant += c;
    }
    // 1-RDM terms of the maps go back onto D2 through the contraction
    let contraction = map_d_to_1rdm(rank, problem.k2.n_particles)?;
    let (from_d1, _, _) = contraction.adjoint(&pull_d1);
    recon += from_d1;
    recon += DMatrix::identity(np, np) * (constant / p);

    let energy = solution.dual_objective;
    let mut target = &problem.k2.k2 - DMatrix::identity(np, np) * (energy / p);
    for (r, row) in problem.sdp.constraints.rows.iter().enumerate() {
        if row.tag == RowTag::Spin {
            let mut s_d1 = DMatrix::zeros(rank, rank);
            for e in &row.entries {
                s_d1[(e.i, e.j)] = e.coef;
            }
            let (s_d, _, _) = contraction.adjoint(&s_d1);
            target -= (s_d - DMatrix::identity(np, np) * (row.rhs / p)) * solution.y[r];
        }
    }
    let residual = (&target - &recon).norm();
    let tolerance = CERTIFICATE_TOLERANCE * problem.k2.k2.norm();

    let mut factors = Vec::new();
    let mut block_complementarity = Vec::new();
    for b in 0..layout.len() {
        let z = &solution.z[b];
        block_complementarity.push((layout.name(b).to_string(), z.dot(&solution.x[b])));
        let comps = eigen_components(z)?;
        let max_beta = comps.iter().flat_map(|(_, v, _)| v.iter().copied()).fold(0.0, f64::max);
        for (idx, vals, vecs) in comps {
            for (c, &beta) in vals.iter().enumerate() {
                if beta > 1e-8 * max_beta && beta != 0.0 {
                    let mut v = DVector::zeros(z.nrows());
                    for (a, &i) in idx.iter().enumerate() {
                        v[i] = vecs[(a, c)];
                    }
                    factors.push(CertificateFactor { block: layout.name(b).to_string(), beta, vector: v });
                }
            }
        }
    }
    Ok(DualCertificate { energy, factors, residual, tolerance, block_complementarity })
}
