//! Acceptance run: each criterion is checked at full size and reported on one
//! line. A failing criterion is reported, not fatal, so the rest of the suite
//! still runs; set `V2RDM_ACCEPTANCE_STRICT=1` to exit non-zero on any FAIL.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::{dmatrix, DMatrix, SymmetricEigen};
use rand::Rng;
use v2rdm::experiment::{
    analyze_crossing, mean_abs_error, run_fig1_sweep, run_fig2_sweep, run_scaling_benchmark, ExperimentConfig,
    SweepPoint, SweepResult,
};
use v2rdm::fock::{extract_d2, extract_g2, extract_q2, extract_t2};
use v2rdm::lattice::{Boundary, HubbardParams, LatticeSpec};
use v2rdm::maps::{map_d_to_g, map_d_to_q, map_d_to_t2};
use v2rdm::sdp::{
    project_psd, solve_boundary_point, BlockLayout, ConstraintEntry, ConstraintRow, ConstraintSystem, RowTag,
    SdpProblem, SolverOptions,
};
use v2rdm::variational::{assemble, dual_certificate, solve, solve_problem, ConditionLevel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn slack(e: f64) -> f64 {
    1e-6 * (1.0 + e.abs())
}

fn t0_exactness(fig1: &SweepResult, elapsed: Duration) -> Outcome {
    let tol = 1e-4 * 6.0;
    let converged: Vec<_> = fig1.converged().collect();
    let worst = converged.iter().map(|p| p.error.abs()).fold(0.0, f64::max);
    let fraction = converged.len() as f64 / fig1.points.len() as f64;
    let pass = worst <= tol && fraction >= 0.95 && elapsed <= Duration::from_secs(600) && fig1.points.len() == 16;
    outcome(
        pass,
        format!(
            "{}/{} converged, max |dE| = {worst:.2e} (tol {tol:.0e}), {:.1} s",
            converged.len(),
            fig1.points.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn crossing(fig1: &SweepResult) -> Outcome {
    let c = analyze_crossing(fig1);
    let (left, right) = c.slopes.unwrap_or((f64::NAN, f64::NAN));
    // E = min(L/2, VL): slope L below the switch, 0 above
    let jump = left - right;
    let pass = c.branch_switch == Some(0.5) && c.kink == Some(0.5) && jump > 3.0;
    outcome(pass, format!("branch switch {:?}, kink {:?}, slopes {left:.4} -> {right:.4}", c.branch_switch, c.kink))
}

fn map_certification() -> Outcome {
    let mut rng = rng(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = random_model(&mut rng, 4);
        let (r, n) = (m.spec.rank(), m.spec.n_particles());
        let k = rng.random_range(0..m.states.len());
        let psi = &m.states[k];
        let d2 = extract_d2(psi);
        worst = worst
            .max(max_abs_diff(&map_d_to_q(r, n).unwrap().apply(&d2).unwrap(), &extract_q2(psi)))
            .max(max_abs_diff(&map_d_to_g(r, n).unwrap().apply(&d2).unwrap(), &extract_g2(psi)))
            .max(max_abs_diff(&map_d_to_t2(r, n).unwrap().apply(&d2).unwrap(), &extract_t2(psi)));
    }
    outcome(worst <= 1e-10, format!("20 random eigenstates, max entrywise deviation {worst:.2e}"))
}

fn at(fig2: &SweepResult, level: ConditionLevel, r: f64) -> &SweepPoint {
    fig2.points.iter().find(|p| p.level == level && p.u_over_v == r).expect("grid point present")
}

fn lower_bounds(fig2: &SweepResult, grid: &[f64]) -> Outcome {
    let mut violations = Vec::new();
    let mut checked = 0;
    for r in grid {
        let two = at(fig2, ConditionLevel::TwoPos, *r);
        let t2 = at(fig2, ConditionLevel::TwoPosT2, *r);
        let e = two.energy_ref;
        if two.status.is_converged() && two.energy_sdp > e + slack(e) {
            violations.push(format!("2pos above exact at U/V={r}"));
        }
        if t2.status.is_converged() && t2.energy_sdp > e + slack(e) {
            violations.push(format!("T2 above exact at U/V={r}"));
        }
        if two.status.is_converged() && t2.status.is_converged() {
            checked += 1;
            if two.energy_sdp > t2.energy_sdp + slack(e) {
                violations.push(format!("2pos above T2 at U/V={r}"));
            }
        }
    }
    let skipped: Vec<String> = fig2.unconverged().map(|p| format!("{}@{}", p.level, p.u_over_v)).collect();
    outcome(
        violations.is_empty() && checked > 0,
        format!("{checked}/{} grid points with both levels converged; skipped {skipped:?}; {violations:?}", grid.len()),
    )
}

fn error_kink(fig2: &SweepResult, grid: &[f64]) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for level in ConditionLevel::ALL {
        let low = mean_abs_error(fig2, level, 0.5, 1.5);
        let high = mean_abs_error(fig2, level, 2.5, 4.0);
        pass &= matches!((low, high), (Some(l), Some(h)) if h > l);
        detail += &format!(
            "{level}: mean |err| {:?} (U/V<=1.5) vs {:?} (U/V>=2.5); ",
            low.map(|x| format!("{x:.2e}")),
            high.map(|x| format!("{x:.2e}"))
        );
    }
    let mut compared = 0;
    for r in grid {
        let (two, t2) = (at(fig2, ConditionLevel::TwoPos, *r), at(fig2, ConditionLevel::TwoPosT2, *r));
        if *r < 2.0 && two.status.is_converged() && t2.status.is_converged() {
            compared += 1;
            if t2.error.abs() >= two.error.abs() {
                pass = false;
                detail += &format!("T2 error not below 2pos at U/V={r}; ");
            }
        }
    }
    detail += &format!("T2 < 2pos error checked at {compared} points below U/V=2");
    outcome(pass && compared > 0, detail)
}

fn duality(fig1: &SweepResult, fig2: &SweepResult) -> Outcome {
    let worst_gap = fig1.converged().chain(fig2.converged()).map(|p| p.gap).fold(0.0, f64::max);
    let spec = LatticeSpec::half_filled(6, Boundary::Periodic).unwrap();
    let mut worst_ratio: f64 = 0.0;
    let mut min_beta = f64::INFINITY;
    let mut valid = true;
    for p in fig1.converged() {
        let problem = assemble(&spec, &HubbardParams::new(0.0, p.u, p.v), ConditionLevel::TwoPos).unwrap();
        let res = solve_problem(&problem, &SolverOptions::default(), &mut |_| {}).unwrap();
        let cert = dual_certificate(&problem, &res.solution).unwrap();
        worst_ratio = worst_ratio.max(cert.residual / cert.tolerance);
        min_beta = min_beta.min(cert.min_beta());
        valid &= cert.is_valid();
    }
    outcome(
        worst_gap <= 1e-5 && valid,
        format!("max relative gap {worst_gap:.2e}; t=0 certificates: max residual/tolerance {worst_ratio:.2e}, min beta {min_beta:.2e}"),
    )
}

fn dimer() -> Outcome {
    let spec = LatticeSpec::half_filled(2, Boundary::Open).unwrap();
    let res =
        solve(&spec, &HubbardParams::new(1.0, 4.0, 0.0), ConditionLevel::TwoPos, &SolverOptions::default()).unwrap();
    let exact = 2.0 - 2.0 * 2f64.sqrt();
    let err = (res.energy - exact).abs();
    outcome(res.converged() && err <= 1e-5, format!("E = {:.8}, |E - (2 - 2√2)| = {err:.2e}", res.energy))
}

/// Nearest PSD matrix to a symmetric 2x2 by the closed-form eigensystem.
fn analytic_projection(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let mut out = DMatrix::zeros(2, 2);
    for lam in [mean + rad, mean - rad] {
        if lam <= 0.0 {
            continue;
        }
        // eigenvector of [[a, b], [b, d]] for eigenvalue lam
        let v = if b.abs() > 1e-300 {
            nalgebra::dvector![b, lam - a]
        } else if (lam - a).abs() <= (lam - d).abs() {
            nalgebra::dvector![1.0, 0.0]
        } else {
            nalgebra::dvector![0.0, 1.0]
        };
        let v = v.normalize();
        out += lam * &v * v.transpose();
    }
    out
}

fn solver_unit() -> Outcome {
    let mut layout = BlockLayout::new();
    layout.push("X", 3);
    let mut cs = ConstraintSystem::new(layout);
    cs.push(ConstraintRow::new(
        (0..3).map(|i| ConstraintEntry { block: 0, i, j: i, coef: 1.0 }).collect(),
        1.0,
        RowTag::Trace,
    ));
    let c = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0, 3.0]);
    let sol = solve_boundary_point(
        &SdpProblem::new(vec![c], cs).unwrap(),
        &SolverOptions { tol: 1e-10, ..Default::default() },
    )
    .unwrap();
    let obj_err = (sol.primal_objective - 1.0).abs();

    let mut rng = rng(88);
    let mut worst: f64 = 0.0;
    let mut nearest = true;
    let mut cases: Vec<DMatrix<f64>> =
        vec![dmatrix![1.0, 0.0; 0.0, -1.0], dmatrix![0.0, 2.0; 2.0, 0.0], dmatrix![-1.0, 0.0; 0.0, -2.0]];
    for _ in 0..200 {
        let (a, b, d) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        cases.push(dmatrix![a, b; b, d]);
    }
    for m in &cases {
        let p = project_psd(m).unwrap();
        worst = worst.max((&p - analytic_projection(m)).amax());
        let dist = (m - &p).norm();
        for _ in 0..10 {
            let g = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
            let y = &g * g.transpose();
            nearest &= dist <= (m - &y).norm() + 1e-12;
        }
        nearest &= SymmetricEigen::new(p).eigenvalues.min() >= -1e-12;
    }
    outcome(
        sol.converged() && obj_err <= 1e-8 && worst <= 1e-12 && nearest,
        format!("objective error {obj_err:.2e}; 2x2 projection vs closed form {worst:.2e}; nearest-point {nearest}"),
    )
}

fn scaling() -> Outcome {
    let report = run_scaling_benchmark(&ExperimentConfig::scale()).unwrap();
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("L={} {} ms dE={:.1e}", r.sites, r.wall_ms, (r.energy_sdp - r.energy_ref).abs()))
        .collect();
    let all_ok = report.rows.len() == 5
        && report
            .rows
            .iter()
            .all(|r| r.status.is_converged() && (r.energy_sdp - r.energy_ref).abs() <= 1e-4 * r.sites as f64);
    outcome(
        all_ok && report.failures.is_empty(),
        format!("slope {:.2?} (R² {:.3?}); {}", report.slope, report.r_squared, rows.join(", ")),
    )
}

fn main() {
    let start = Instant::now();
    let fig1 = run_fig1_sweep(&ExperimentConfig::fig1()).expect("fig1 sweep");
    let fig1_time = start.elapsed();
    let fig2_cfg = ExperimentConfig::fig2();
    let fig2 = run_fig2_sweep(&fig2_cfg).expect("fig2 sweep");
    assert_eq!(fig2_cfg.levels, ConditionLevel::ALL.to_vec());

    let results = [
        ("t=0 exactness", t0_exactness(&fig1, fig1_time)),
        ("phase-transition crossing", crossing(&fig1)),
        ("map certification", map_certification()),
        ("lower-bound ordering", lower_bounds(&fig2, &fig2_cfg.u_over_v_grid)),
        ("error kink", error_kink(&fig2, &fig2_cfg.u_over_v_grid)),
        ("duality and certificate", duality(&fig1, &fig2)),
        ("dimer exactness", dimer()),
        ("solver unit", solver_unit()),
        ("scaling benchmark", scaling()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("criterion {} {:<26} {}  {}", k + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var_os("V2RDM_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
