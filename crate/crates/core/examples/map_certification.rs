// The affine maps D2 -> Q2, G2, T2 and the 1-RDM, checked against matrices
// read directly off an exact ground state.
//
// Run with `cargo run --example map_certification`.

use std::sync::Arc;

use nalgebra::DMatrix;
use v2rdm::fock::{extract_d1, extract_d2, extract_g2, extract_q2, extract_t2, ground_state, FockBasis};
use v2rdm::lattice::{build_extended_hubbard, Boundary, HubbardParams, LatticeSpec};
use v2rdm::maps::{map_d_to_1rdm, map_d_to_g, map_d_to_q, map_d_to_t2};

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Largest entrywise deviation per map, in the order 1-RDM, Q2, G2, T2.
pub fn run_example() -> v2rdm::Result<Vec<(&'static str, f64)>> {
    let spec = LatticeSpec::half_filled(4, Boundary::Periodic)?;
    let h = build_extended_hubbard(&spec, &HubbardParams::new(1.0, 2.0, 0.5))?;
    let (_, psi) = ground_state(&h, &Arc::new(FockBasis::new(4, 2, 2)?))?;
    let (r, n) = (spec.rank(), spec.n_particles());
    let d2 = extract_d2(&psi);

    let checks = [
        ("D1", map_d_to_1rdm(r, n)?.apply(&d2)?, extract_d1(&psi)),
        ("Q2", map_d_to_q(r, n)?.apply(&d2)?, extract_q2(&psi)),
        ("G2", map_d_to_g(r, n)?.apply(&d2)?, extract_g2(&psi)),
        ("T2", map_d_to_t2(r, n)?.apply(&d2)?, extract_t2(&psi)),
    ];
    let mut out = Vec::new();
    for (name, mapped, direct) in &checks {
        let err = max_abs_diff(mapped, direct);
        println!("{name}: {}x{}  max |map(D2) - direct| = {err:.2e}", direct.nrows(), direct.ncols());
        out.push((*name, err));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
