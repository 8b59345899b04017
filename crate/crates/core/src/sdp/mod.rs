//! Block semidefinite programs and a first-order boundary-point solver.

mod format;
mod problem;
mod psd;
mod solver;

pub use format::{read_problem, write_problem};
pub use problem::{BlockLayout, ConstraintEntry, ConstraintRow, ConstraintSystem, RowTag, SdpProblem};
pub use psd::{components, eigen_components, min_eigenvalue, project_psd, spectral_split};
pub use solver::{
    residuals, solve_boundary_point, solve_boundary_point_from, solve_boundary_point_observed, IterationRecord,
    Residuals, SdpSolution, SolveStatus, SolverOptions,
};
