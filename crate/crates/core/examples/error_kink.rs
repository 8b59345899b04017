// Away from t = 0 the bound is no longer exact. This prints its error against
// exact diagonalization on both sides of U/V = 2, where the charge-ordered and
// spin-ordered regimes meet.
//
// Run with `cargo run --example error_kink`.

use v2rdm::experiment::{mean_abs_error, run_fig2_sweep, ExperimentConfig, SweepResult};
use v2rdm::variational::ConditionLevel;

pub fn run_example() -> v2rdm::Result<SweepResult> {
    let cfg = ExperimentConfig {
        u_over_v_grid: vec![0.5, 1.0, 1.5, 2.5, 3.0, 4.0],
        levels: vec![ConditionLevel::TwoPos],
        timing: false,
        ..ExperimentConfig::fig2()
    };
    let result = run_fig2_sweep(&cfg)?;
    println!("{:>5} {:>12} {:>12} {:>10}", "U/V", "E_sdp", "E_exact", "error");
    for p in &result.points {
        println!("{:>5} {:>12.7} {:>12.7} {:>10.2e}", p.u_over_v, p.energy_sdp, p.energy_ref, p.error);
    }
    let low = mean_abs_error(&result, ConditionLevel::TwoPos, 0.5, 1.5);
    let high = mean_abs_error(&result, ConditionLevel::TwoPos, 2.5, 4.0);
    println!("mean |error|: U/V <= 1.5 {low:?}, U/V >= 2.5 {high:?}");
    Ok(result)
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
