// Cost of the t = 0 program against chain length. Block sizes grow as L²
// and the constraint count as L⁴, so wall time follows a power law.
//
// Run with `cargo run --example scaling`.

use v2rdm::experiment::{run_scaling_benchmark, ExperimentConfig, ScalingReport};

pub fn run_example() -> v2rdm::Result<ScalingReport> {
    let cfg = ExperimentConfig { sites_grid: vec![4, 6, 8], ..ExperimentConfig::scale() };
    let report = run_scaling_benchmark(&cfg)?;
    for r in &report.rows {
        println!(
            "L={:<3} {:>7} ms {:>4} iters  D2 {:>4}  G2 {:>4}  rows {:>7}  E = {:.7} (exact {})",
            r.sites, r.wall_ms, r.iters, r.dim_d2, r.dim_g2, r.rows, r.energy_sdp, r.energy_ref
        );
    }
    if let (Some(s), Some(r2)) = (report.slope, report.r_squared) {
        println!("wall time ~ L^{s:.2} (R² {r2:.3})");
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
