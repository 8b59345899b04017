use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::fock::{ground_state, FockBasis};
use crate::lattice::{analytic_t0_energy, build_extended_hubbard, HubbardParams, LatticeSpec};
use crate::maps::BlockKind;
use crate::sdp::{SdpSolution, SolveStatus};
use crate::variational::{assemble_with, solve_problem_from, AssembleOptions, ConditionLevel, V2rdmProblem};

/// Outcome of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Converged,
    /// Iteration cap reached; residuals above tolerance.
    Maxiter,
    /// Converged but failing the experiment's acceptance check.
    Flagged,
}

impl PointStatus {
    pub fn is_converged(&self) -> bool {
        !matches!(self, PointStatus::Maxiter)
    }
}

/// One row of a sweep table. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub u_over_v: f64,
    #[serde(rename = "L")]
    pub sites: usize,
    pub level: ConditionLevel,
    /// Certified lower bound of the solved program, see
    /// [`certified_bound`](crate::variational::certified_bound).
    pub energy_sdp: f64,
    /// Exact-diagonalization or analytic reference.
    pub energy_ref: f64,
    /// `energy_ref - energy_sdp`, non-negative unless the program is wrong.
    pub error: f64,
    pub gap: f64,
    pub iters: usize,
    pub wall_ms: u64,
    pub status: PointStatus,
}

/// A finished sweep in grid order, with the reasons behind any flagged point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub failures: Vec<String>,
}

impl SweepResult {
    pub fn converged(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.status.is_converged())
    }

    pub fn unconverged(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| !p.status.is_converged())
    }

    pub fn level(&self, level: ConditionLevel) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(move |p| p.level == level)
    }

    fn flag(&mut self, index: usize, reason: String) {
        let p = &mut self.points[index];
        if p.status == PointStatus::Converged {
            p.status = PointStatus::Flagged;
        }
        self.failures.push(reason);
    }
}

fn sector(cfg: &ExperimentConfig, sites: usize) -> Result<LatticeSpec> {
    match (cfg.n_up, cfg.n_down) {
        (Some(u), Some(d)) => LatticeSpec::new(sites, cfg.boundary, u, d),
        _ => LatticeSpec::half_filled(sites, cfg.boundary),
    }
}

struct Solved {
    energy: f64,
    gap: f64,
    iters: usize,
    wall_ms: u64,
    converged: bool,
    problem: V2rdmProblem,
    solution: SdpSolution,
}

fn solve_point(
    cfg: &ExperimentConfig,
    spec: &LatticeSpec,
    params: &HubbardParams,
    level: ConditionLevel,
    warm: Option<&SdpSolution>,
) -> Result<Solved> {
    let start = Instant::now();
    let problem = assemble_with(spec, params, level, &AssembleOptions { spin_row: cfg.spin_row })?;
    let res = solve_problem_from(&problem, &cfg.solver, warm, &mut |_| {})?;
    let wall_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };
    Ok(Solved {
        energy: res.certified_bound,
        gap: res.residuals.gap,
        iters: res.iterations,
        wall_ms,
        converged: res.status == SolveStatus::Converged,
        problem,
        solution: res.solution,
    })
}

fn point(params: &HubbardParams, sites: usize, level: ConditionLevel, s: &Solved, energy_ref: f64) -> SweepPoint {
    SweepPoint {
        t: params.t,
        u: params.u,
        v: params.v,
        u_over_v: params.u / params.v,
        sites,
        level,
        energy_sdp: s.energy,
        energy_ref,
        error: energy_ref - s.energy,
        gap: s.gap,
        iters: s.iters,
        wall_ms: s.wall_ms,
        status: if s.converged { PointStatus::Converged } else { PointStatus::Maxiter },
    }
}

/// Where the analytic t = 0 ground state changes character, and where the
/// solved energies change slope.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingAnalysis {
    /// Grid value at which the minimizing branch switches (the tie point when
    /// it lies on the grid, otherwise the first value past the switch).
    pub branch_switch: Option<f64>,
    /// Interior grid value with the largest jump between left and right
    /// finite-difference slopes of the solved energies.
    pub kink: Option<f64>,
    /// Left and right slopes at the kink.
    pub slopes: Option<(f64, f64)>,
}

/// The t = 0 chain across V at 2-positivity against `min(UL/2, VL)`.
/// A converged point is flagged when `|error| > 1e-4 · L`.
pub fn run_fig1_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    ExperimentConfig::require_grid("v_grid", &cfg.v_grid)?;
    let spec = sector(cfg, cfg.sites)?;
    let level = ConditionLevel::TwoPos;
    let points: Vec<SweepPoint> = cfg
        .v_grid
        .par_iter()
        .map(|&v| {
            let params = HubbardParams::new(0.0, cfg.u, v);
            let solved = solve_point(cfg, &spec, &params, level, None)?;
            let reference = analytic_t0_energy(cfg.sites, cfg.u, v)?;
            Ok(point(&params, cfg.sites, level, &solved, reference))
        })
        .collect::<Result<_>>()?;
    let mut result = SweepResult { points, failures: Vec::new() };
    let tol = 1e-4 * cfg.sites as f64;
    for k in 0..result.points.len() {
        let p = &result.points[k];
        if p.status.is_converged() && p.error.abs() > tol {
            let reason = format!("fig1 V={}: |E_sdp - E_exact| = {:.3e} > {tol:.1e}", p.v, p.error.abs());
            result.flag(k, reason);
        }
    }
    Ok(result)
}

/// Locates the branch switch of `min(UL/2, VL)` and the slope kink of the
/// solved energies along a fig1 table.
pub fn analyze_crossing(result: &SweepResult) -> CrossingAnalysis {
    let pts = &result.points;
    let branch = |p: &SweepPoint| {
        let l = p.sites as f64;
        let (cdw, sdw) = (p.u * l / 2.0, p.v * l);
        if (cdw - sdw).abs() <= 1e-12 * l {
            0
        } else if cdw < sdw {
            1
        } else {
            -1
        }
    };
    let mut branch_switch = pts.iter().find(|p| branch(p) == 0).map(|p| p.v);
    if branch_switch.is_none() {
        branch_switch = pts.windows(2).find(|w| branch(&w[0]) != branch(&w[1])).map(|w| w[1].v);
    }
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for w in pts.windows(3) {
        let left = (w[1].energy_sdp - w[0].energy_sdp) / (w[1].v - w[0].v);
        let right = (w[2].energy_sdp - w[1].energy_sdp) / (w[2].v - w[1].v);
        let jump = (right - left).abs();
        if best.is_none_or(|b| jump > b.0) {
            best = Some((jump, w[1].v, left, right));
        }
    }
    CrossingAnalysis { branch_switch, kink: best.map(|b| b.1), slopes: best.map(|b| (b.2, b.3)) }
}

/// t = U = 1 across U/V at every configured level against exact
/// diagonalization. A converged point is flagged when its energy lies above
/// the exact one by more than `1e-6 (1 + |E|)`, or when the 2-positivity
/// energy lies above the T2 one by the same margin.
pub fn run_fig2_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    ExperimentConfig::require_grid("u_over_v_grid", &cfg.u_over_v_grid)?;
    ExperimentConfig::require_grid("levels", &cfg.levels)?;
    let spec = sector(cfg, cfg.sites)?;
    let basis = Arc::new(FockBasis::new(spec.sites, spec.n_up, spec.n_down)?);
    let exact: Vec<f64> = cfg
        .u_over_v_grid
        .par_iter()
        .map(|&r| {
            let params = HubbardParams::new(cfg.t, cfg.u, cfg.u / r);
            Ok(ground_state(&build_extended_hubbard(&spec, &params)?, &basis)?.0)
        })
        .collect::<Result<_>>()?;
    // Each level walks the grid in order; with warm starts every point starts
    // from its converged neighbour.
    let chains: Vec<Vec<SweepPoint>> = cfg
        .levels
        .par_iter()
        .map(|&level| {
            let mut prev: Option<SdpSolution> = None;
            let mut chain = Vec::with_capacity(cfg.u_over_v_grid.len());
            for (k, &r) in cfg.u_over_v_grid.iter().enumerate() {
                let params = HubbardParams::new(cfg.t, cfg.u, cfg.u / r);
                let warm = if cfg.warm_start { prev.as_ref() } else { None };
                let solved = solve_point(cfg, &spec, &params, level, warm)?;
                chain.push(point(&params, cfg.sites, level, &solved, exact[k]));
                prev = Some(solved.solution);
            }
            Ok(chain)
        })
        .collect::<Result<_>>()?;
    let n_levels = cfg.levels.len();
    let points: Vec<SweepPoint> =
        (0..cfg.u_over_v_grid.len()).flat_map(|g| chains.iter().map(move |c| c[g].clone())).collect();
    let mut result = SweepResult { points, failures: Vec::new() };
    for k in 0..result.points.len() {
        let p = &result.points[k];
        if p.status.is_converged() && p.error < -1e-6 * (1.0 + p.energy_ref.abs()) {
            let reason = format!("fig2 U/V={} {}: E_sdp exceeds E_exact by {:.3e}", p.u_over_v, p.level, -p.error);
            result.flag(k, reason);
        }
    }
    if let (Some(a), Some(b)) = (
        cfg.levels.iter().position(|&l| l == ConditionLevel::TwoPos),
        cfg.levels.iter().position(|&l| l == ConditionLevel::TwoPosT2),
    ) {
        for g in 0..cfg.u_over_v_grid.len() {
            let (pa, pb) = (&result.points[g * n_levels + a], &result.points[g * n_levels + b]);
            if pa.status.is_converged()
                && pb.status.is_converged()
                && pa.energy_sdp > pb.energy_sdp + 1e-6 * (1.0 + pb.energy_sdp.abs())
            {
                let reason = format!(
                    "fig2 U/V={}: 2pos energy {} above 2pos+t2 energy {}",
                    pa.u_over_v, pa.energy_sdp, pb.energy_sdp
                );
                result.flag(g * n_levels + b, reason);
            }
        }
    }
    Ok(result)
}

/// Mean `|error|` of converged points of one level with U/V in `[lo, hi]`.
pub fn mean_abs_error(result: &SweepResult, level: ConditionLevel, lo: f64, hi: f64) -> Option<f64> {
    let errs: Vec<f64> = result
        .level(level)
        .filter(|p| p.status.is_converged() && p.u_over_v >= lo - 1e-12 && p.u_over_v <= hi + 1e-12)
        .map(|p| p.error.abs())
        .collect();
    (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
}

/// One lattice size of the cost benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "L")]
    pub sites: usize,
    pub level: ConditionLevel,
    pub wall_ms: u64,
    pub iters: usize,
    pub dim_d2: usize,
    pub dim_q2: usize,
    pub dim_g2: usize,
    pub rows: usize,
    pub energy_sdp: f64,
    pub energy_ref: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln(wall_ms)` against `ln(L)`.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    pub failures: Vec<String>,
}

/// Ordinary least squares `y = a + b x`, returning `(b, R²)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}

/// Cost of the t = 0 2-positivity program over `sites_grid` at the first V
/// of `v_grid`. Sizes are solved one after another so timings do not compete.
pub fn run_scaling_benchmark(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    ExperimentConfig::require_grid("sites_grid", &cfg.sites_grid)?;
    ExperimentConfig::require_grid("v_grid", &cfg.v_grid)?;
    let v = cfg.v_grid[0];
    let level = ConditionLevel::TwoPos;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &sites in &cfg.sites_grid {
        let spec = sector(cfg, sites)?;
        let params = HubbardParams::new(0.0, cfg.u, v);
        let solved = solve_point(cfg, &spec, &params, level, None)?;
        let reference = analytic_t0_energy(sites, cfg.u, v)?;
        let dim = |k: BlockKind| solved.problem.block(k).map_or(0, |b| solved.problem.sdp.layout().dim(b));
        let mut status = if solved.converged { PointStatus::Converged } else { PointStatus::Maxiter };
        let tol = 1e-4 * sites as f64;
        if solved.converged && (solved.energy - reference).abs() > tol {
            status = PointStatus::Flagged;
            failures.push(format!(
                "scale L={sites}: |E_sdp - E_exact| = {:.3e} > {tol:.1e}",
                (solved.energy - reference).abs()
            ));
        }
        rows.push(ScalingRow {
            sites,
            level,
            wall_ms: solved.wall_ms,
            iters: solved.iters,
            dim_d2: dim(BlockKind::D2),
            dim_q2: dim(BlockKind::Q2),
            dim_g2: dim(BlockKind::G2),
            rows: solved.problem.sdp.constraints.len(),
            energy_sdp: solved.energy,
            energy_ref: reference,
            status,
        });
    }
    let timed: Vec<&ScalingRow> = rows.iter().filter(|r| r.wall_ms > 0).collect();
    let fit = fit_line(
        &timed.iter().map(|r| (r.sites as f64).ln()).collect::<Vec<_>>(),
        &timed.iter().map(|r| (r.wall_ms as f64).ln()).collect::<Vec<_>>(),
    );
    Ok(ScalingReport { rows, slope: fit.map(|f| f.0), r_squared: fit.map(|f| f.1), failures })
}
