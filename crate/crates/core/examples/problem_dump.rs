// Any assembled program can be written as a plain-text sparse file and read
// back, for inspection or for another solver.
//
// Run with `cargo run --example problem_dump`.

use v2rdm::lattice::{Boundary, HubbardParams, LatticeSpec};
use v2rdm::sdp::{read_problem, write_problem};
use v2rdm::variational::{assemble, ConditionLevel};

/// Size of the dump in bytes.
pub fn run_example() -> v2rdm::Result<usize> {
    let spec = LatticeSpec::half_filled(2, Boundary::Open)?;
    let problem = assemble(&spec, &HubbardParams::new(1.0, 4.0, 0.0), ConditionLevel::TwoPos)?;
    let mut text = Vec::new();
    write_problem(&problem.sdp, &mut text)?;
    let back = read_problem(text.as_slice())?;
    assert_eq!(back, problem.sdp);
    let s = String::from_utf8_lossy(&text);
    for line in s.lines().take(12) {
        println!("{line}");
    }
    println!("... {} lines, {} rows, {} blocks", s.lines().count(), back.constraints.len(), back.layout().len());
    Ok(text.len())
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
