// A solved program comes with a proof of its bound: the shifted Hamiltonian
// K2 - E·I decomposes into positive multiples of squared operators, one
// family per metric matrix.
//
// Run with `cargo run --example dual_certificate`.

use v2rdm::lattice::{Boundary, HubbardParams, LatticeSpec};
use v2rdm::sdp::SolverOptions;
use v2rdm::variational::{assemble, dual_certificate, solve_problem, ConditionLevel, DualCertificate};

pub fn run_example() -> v2rdm::Result<DualCertificate> {
    let spec = LatticeSpec::half_filled(4, Boundary::Periodic)?;
    let problem = assemble(&spec, &HubbardParams::new(0.0, 1.0, 0.75), ConditionLevel::TwoPos)?;
    let result = solve_problem(&problem, &SolverOptions::default(), &mut |_| {})?;
    let cert = dual_certificate(&problem, &result.solution)?;
    println!("energy {:.8} ({} iterations)", result.energy, result.iterations);
    println!("certificate residual {:.2e}, tolerance {:.2e}", cert.residual, cert.tolerance);
    for (block, c) in &cert.block_complementarity {
        let count = cert.factors.iter().filter(|f| &f.block == block).count();
        println!("  {block:<3} {count:>3} factors, <Z, X> = {c:.2e}");
    }
    println!("smallest beta {:.3e}", cert.min_beta());
    Ok(cert)
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
