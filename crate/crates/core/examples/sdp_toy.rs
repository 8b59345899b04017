// The boundary-point solver on two programs small enough to solve by hand:
// the smallest eigenvalue of diag(1, 2, 3) and a two-block program whose
// optimum is the smaller of two block minima.
//
// Run with `cargo run --example sdp_toy`.

use nalgebra::{dmatrix, DMatrix};
use v2rdm::sdp::{
    solve_boundary_point, BlockLayout, ConstraintEntry, ConstraintRow, ConstraintSystem, RowTag, SdpProblem,
    SolverOptions,
};

fn diag_row(block: usize, dim: usize) -> Vec<ConstraintEntry> {
    (0..dim).map(|i| ConstraintEntry { block, i, j: i, coef: 1.0 }).collect()
}

/// Objectives of the two programs.
pub fn run_example() -> v2rdm::Result<(f64, f64)> {
    let opts = SolverOptions { tol: 1e-10, ..Default::default() };

    // min Tr(CX), Tr X = 1, X ⪰ 0.
    let mut layout = BlockLayout::new();
    layout.push("X", 3);
    let mut cs = ConstraintSystem::new(layout);
    cs.push(ConstraintRow::new(diag_row(0, 3), 1.0, RowTag::Trace));
    let c = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0, 3.0]);
    let sol = solve_boundary_point(&SdpProblem::new(vec![c], cs)?, &opts)?;
    println!("smallest eigenvalue: {:.10} after {} iterations", sol.primal_objective, sol.iterations);

    // Tr X + Tr Y = 1 over two blocks: the optimum is min(λ_min(A), λ_min(B)).
    let mut layout = BlockLayout::new();
    layout.push("X", 2);
    layout.push("Y", 2);
    let mut cs = ConstraintSystem::new(layout);
    let mut row = diag_row(0, 2);
    row.extend(diag_row(1, 2));
    cs.push(ConstraintRow::new(row, 1.0, RowTag::Trace));
    let a = dmatrix![2.0, 1.0; 1.0, 2.0];
    let b = dmatrix![1.5, -0.5; -0.5, 1.5];
    let two = solve_boundary_point(&SdpProblem::new(vec![a, b], cs)?, &opts)?;
    println!(
        "two blocks: {:.10} (expected 1), residuals {:.1e} {:.1e} {:.1e}",
        two.primal_objective, two.residuals.primal, two.residuals.dual, two.residuals.gap
    );
    Ok((sol.primal_objective, two.primal_objective))
}

#[allow(dead_code)]
fn main() -> v2rdm::Result<()> {
    run_example().map(|_| ())
}
