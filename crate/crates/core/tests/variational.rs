//! Variational 2-RDM energies against exact diagonalization.

mod common;

use std::sync::Arc;

use common::*;
use v2rdm::fock::{ground_state, FockBasis};
use v2rdm::lattice::{build_extended_hubbard, Boundary, HubbardParams, LatticeSpec};
use v2rdm::maps::BlockKind;
use v2rdm::sdp::SolverOptions;
use v2rdm::variational::{
    assemble, assemble_with, dual_certificate, solve, solve_problem, AssembleOptions, ConditionLevel,
};

fn exact(spec: &LatticeSpec, params: &HubbardParams) -> f64 {
    let op = build_extended_hubbard(spec, params).unwrap();
    ground_state(&op, &Arc::new(FockBasis::new(spec.sites, spec.n_up, spec.n_down).unwrap())).unwrap().0
}

fn slack(e: f64) -> f64 {
    1e-6 * (1.0 + e.abs())
}

#[test]
fn dimer_is_exact() {
    let spec = LatticeSpec::half_filled(2, Boundary::Open).unwrap();
    let res =
        solve(&spec, &HubbardParams::new(1.0, 4.0, 0.0), ConditionLevel::TwoPos, &SolverOptions::default()).unwrap();
    assert!(res.converged());
    assert!((res.energy - (2.0 - 2.0 * 2f64.sqrt())).abs() < 1e-5);
}

#[test]
fn two_electrons_are_exact_at_d_level() {
    // With two particles every PSD D2 of unit trace comes from a mixed state.
    let mut rng = rng(41);
    let mut count = 0;
    while count < 5 {
        let m = random_model(&mut rng, 3);
        if m.spec.n_particles() != 2 {
            continue;
        }
        count += 1;
        let res = solve(&m.spec, &m.params, ConditionLevel::TwoPos, &SolverOptions::default()).unwrap();
        assert!(res.converged());
        assert!(
            (res.energy - m.energies[0]).abs() < 1e-4,
            "{:?} {:?}: {} vs {}",
            m.spec,
            m.params,
            res.energy,
            m.energies[0]
        );
    }
}

#[test]
fn bounds_are_ordered_below_the_exact_energy() {
    let mut rng = rng(42);
    for _ in 0..4 {
        let m = random_model(&mut rng, 3);
        let two = solve(&m.spec, &m.params, ConditionLevel::TwoPos, &SolverOptions::default()).unwrap();
        let t2 = solve(&m.spec, &m.params, ConditionLevel::TwoPosT2, &SolverOptions::default()).unwrap();
        let e = m.energies[0];
        let ctx = format!("{:?} {:?}", m.spec, m.params);
        // the certified bound needs no convergence at all
        for r in [&two, &t2] {
            assert!(r.certified_bound <= e + 1e-9, "certified bound above exact: {ctx}");
            assert!(r.certified_bound <= r.energy + 1e-9, "certified bound above primal: {ctx}");
        }
        if two.converged() {
            assert!(two.energy <= e + slack(e), "2pos above exact: {ctx}");
        }
        if t2.converged() {
            assert!(t2.energy <= e + slack(e), "T2 above exact: {ctx}");
        }
        if two.converged() && t2.converged() {
            assert!(two.energy <= t2.energy + slack(e), "2pos above T2: {ctx}");
        }
    }
}

#[test]
fn t0_ring_is_exact_on_both_sides_of_the_transition() {
    let spec = LatticeSpec::half_filled(4, Boundary::Periodic).unwrap();
    for v in [0.3, 0.5, 0.8] {
        let res =
            solve(&spec, &HubbardParams::new(0.0, 1.0, v), ConditionLevel::TwoPos, &SolverOptions::default()).unwrap();
        assert!(res.converged());
        let reference = (2.0f64).min(4.0 * v);
        assert!((res.energy - reference).abs() < 4e-4, "V={v}: {}", res.energy);
    }
}

#[test]
fn solution_blocks_are_psd_and_traced() {
    let spec = LatticeSpec::half_filled(4, Boundary::Periodic).unwrap();
    let params = HubbardParams::new(1.0, 1.0, 0.5);
    let problem = assemble(&spec, &params, ConditionLevel::TwoPos).unwrap();
    let res = solve_problem(&problem, &SolverOptions::default(), &mut |_| {}).unwrap();
    assert!(res.converged());
    for (name, ev) in &res.min_eigenvalues {
        assert!(*ev > -1e-9, "{name}: {ev}");
    }
    assert!((res.d2.trace() - 6.0).abs() < 1e-5);
    let d1 = &res.solution.x[problem.block(BlockKind::D1).unwrap()];
    assert!((d1.trace() - 4.0).abs() < 1e-5);
    assert!(res.energy <= exact(&spec, &params) + slack(res.energy));
}

#[test]
fn dropping_the_spin_row_only_loosens_the_bound() {
    let spec = LatticeSpec::half_filled(4, Boundary::Periodic).unwrap();
    let params = HubbardParams::new(1.0, 2.0, 0.5);
    let opts = SolverOptions::default();
    let with = assemble_with(&spec, &params, ConditionLevel::TwoPos, &AssembleOptions { spin_row: true }).unwrap();
    let without = assemble_with(&spec, &params, ConditionLevel::TwoPos, &AssembleOptions { spin_row: false }).unwrap();
    assert!(without.sdp.constraints.len() <= with.sdp.constraints.len());
    let a = solve_problem(&with, &opts, &mut |_| {}).unwrap();
    let b = solve_problem(&without, &opts, &mut |_| {}).unwrap();
    assert!(a.converged() && b.converged());
    assert!(b.energy <= a.energy + slack(a.energy));
}

#[test]
fn certificate_reconstructs_the_shifted_hamiltonian() {
    for (spec, params) in [
        (LatticeSpec::half_filled(2, Boundary::Open).unwrap(), HubbardParams::new(1.0, 4.0, 0.0)),
        (LatticeSpec::half_filled(4, Boundary::Periodic).unwrap(), HubbardParams::new(0.0, 1.0, 0.25)),
        (LatticeSpec::half_filled(4, Boundary::Periodic).unwrap(), HubbardParams::new(1.0, 1.0, 0.5)),
    ] {
        let problem = assemble(&spec, &params, ConditionLevel::TwoPos).unwrap();
        let res = solve_problem(&problem, &SolverOptions::default(), &mut |_| {}).unwrap();
        let cert = dual_certificate(&problem, &res.solution).unwrap();
        assert!(cert.is_valid(), "residual {} > {}", cert.residual, cert.tolerance);
        assert!(cert.min_beta() >= -1e-9);
        assert!(!cert.factors.is_empty());
        assert!(cert.total_complementarity().abs() < 1e-4);
    }
}

#[test]
fn inconsistent_requests_are_errors() {
    assert!(LatticeSpec::half_filled(3, Boundary::Periodic).is_err());
    let one = LatticeSpec::new(2, Boundary::Open, 1, 0)
        .and_then(|spec| assemble(&spec, &HubbardParams::new(1.0, 1.0, 0.0), ConditionLevel::TwoPos));
    assert!(matches!(one, Err(v2rdm::Error::TooFewParticles(1))));
}
