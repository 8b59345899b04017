// At t = 0 the 2-positivity bound is exact: the solved energy follows
// min(UL/2, VL) through the charge-density-wave transition at V = U/2.
//
// Run with `cargo run --example t0_phase_transition`.

use v2rdm::experiment::{analyze_crossing, run_fig1_sweep, CrossingAnalysis, ExperimentConfig, SweepResult};

pub fn run_example() -> v2rdm::Result<(SweepResult, CrossingAnalysis)> {
    let cfg =
        ExperimentConfig { sites: 4, v_grid: vec![0.3, 0.4, 0.5, 0.6, 0.7], timing: false, ..ExperimentConfig::fig1() };
    let result = run_fig1_sweep(&cfg)?;
    println!("{:>5} {:>12} {:>12} {:>10} {:>6}", "V", "E_sdp", "E_exact", "error", "iters");
    for p in &result.points {
        println!("{:>5} {:>12.7} {:>12.7} {:>10.2e} {:>6}", p.v, p.energy_sdp, p.energy_ref, p.error, p.iters);
    }
    let crossing = analyze_crossing(&result);
    println!("branch switch at V = {:?}, slope kink at V = {:?}", crossing.branch_switch, crossing.kink);
    Ok((result, crossing))
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
