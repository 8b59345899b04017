//! The affine maps reproduce the metric matrices extracted directly from
//! wavefunctions.

mod common;

use common::*;
use v2rdm::fock::{extract_d1, extract_d2, extract_g2, extract_q2, extract_t2, MetricMatrices};
use v2rdm::maps::{contract_d2, map_d_to_1hole, map_d_to_g, map_d_to_q, map_d_to_t2};

const TOL: f64 = 1e-10;

#[test]
fn maps_match_extraction_on_random_eigenstates() {
    let mut rng = rng(20);
    for draw in 0..20 {
        let model = random_model(&mut rng, 4);
        let (r, n) = (model.spec.rank(), model.spec.n_particles());
        let q = map_d_to_q(r, n).unwrap();
        let g = map_d_to_g(r, n).unwrap();
        let t2 = map_d_to_t2(r, n).unwrap();
        let q1 = map_d_to_1hole(r, n).unwrap();
        // ground state, first excited state and the top of the spectrum
        let picks = [0, 1.min(model.states.len() - 1), model.states.len() - 1];
        for &k in &picks {
            let psi = &model.states[k];
            let d2 = extract_d2(psi);
            let ctx = format!("draw {draw} ({:?}, {:?}) state {k}", model.spec, model.params);
            assert!(max_abs_diff(&contract_d2(&d2, r, n).unwrap(), &extract_d1(psi)) < TOL, "D1 {ctx}");
            assert!(max_abs_diff(&q.apply(&d2).unwrap(), &extract_q2(psi)) < TOL, "Q2 {ctx}");
            assert!(max_abs_diff(&g.apply(&d2).unwrap(), &extract_g2(psi)) < TOL, "G2 {ctx}");
            assert!(max_abs_diff(&t2.apply(&d2).unwrap(), &extract_t2(psi)) < TOL, "T2 {ctx}");
            let d1 = extract_d1(psi);
            let hole = nalgebra::DMatrix::identity(r, r) - &d1;
            assert!(max_abs_diff(&q1.apply(&d2).unwrap(), &hole) < TOL, "Q1 {ctx}");
        }
    }
}

#[test]
fn t2_identity_on_dimer_and_four_site_ring() {
    use v2rdm::fock::{ground_state, FockBasis};
    use v2rdm::lattice::{build_extended_hubbard, Boundary, HubbardParams, LatticeSpec};
    for (spec, params) in [
        (LatticeSpec::new(2, Boundary::Open, 1, 1).unwrap(), HubbardParams::new(1.0, 4.0, 0.0)),
        (LatticeSpec::half_filled(4, Boundary::Periodic).unwrap(), HubbardParams::new(1.0, 4.0, 0.0)),
    ] {
        let op = build_extended_hubbard(&spec, &params).unwrap();
        let basis = std::sync::Arc::new(FockBasis::new(spec.sites, spec.n_up, spec.n_down).unwrap());
        let (_, psi) = ground_state(&op, &basis).unwrap();
        let m = MetricMatrices::from_wavefunction(&psi, true);
        let mapped = map_d_to_t2(spec.rank(), spec.n_particles()).unwrap().apply(&m.d2).unwrap();
        assert!(max_abs_diff(&mapped, m.t2().unwrap()) < TOL);
        assert!(min_eig(m.t2().unwrap()) > -1e-10);
    }
}

#[test]
fn maps_are_affine() {
    let mut rng = rng(7);
    for _ in 0..5 {
        let model = random_model(&mut rng, 3);
        let (r, n) = (model.spec.rank(), model.spec.n_particles());
        let x = extract_d2(&random_state(&mut rng, &model.basis));
        let y = extract_d2(&random_state(&mut rng, &model.basis));
        let alpha = 0.3;
        let mix = &x * alpha + &y * (1.0 - alpha);
        for map in [map_d_to_q(r, n).unwrap(), map_d_to_g(r, n).unwrap(), map_d_to_t2(r, n).unwrap()] {
            let lhs = map.apply(&mix).unwrap();
            let rhs = map.apply(&x).unwrap() * alpha + map.apply(&y).unwrap() * (1.0 - alpha);
            assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }
}
