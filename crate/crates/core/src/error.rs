use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("particle number {0} too small: at least two particles are required")]
    TooFewParticles(usize),

    #[error("operator string of odd length {0} cannot be expressed through the 2-RDM")]
    OddString(usize),

    #[error("operator string of length {0} exceeds the two-body level")]
    StringTooLong(usize),

    #[error("analytic t=0 energy requires an even number of sites, got {0}")]
    OddSites(usize),

    #[error("{0} spin orbitals do not fit in a 64-bit occupation word (at most 31 sites)")]
    BasisOverflow(usize),

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("operator term {0} leaves the (N_up, N_down) sector")]
    SectorViolation(usize),

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:.3e})")]
    LanczosNotConverged { iterations: usize, residual: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("empty positivity condition set")]
    EmptyConditions,

    #[error("inconsistent positivity conditions: {0}")]
    InconsistentConditions(String),

    #[error("malformed problem: {0}")]
    MalformedProblem(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("dual certificate residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    CertificateResidual { residual: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
