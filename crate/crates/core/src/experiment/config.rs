use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Boundary;
use crate::sdp::SolverOptions;
use crate::variational::ConditionLevel;

/// Everything a sweep needs. Serialized as TOML; every field has a default so
/// a config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sites: usize,
    pub boundary: Boundary,
    pub t: f64,
    pub u: f64,
    /// Explicit V values (fig1).
    pub v_grid: Vec<f64>,
    /// U/V ratios (fig2).
    pub u_over_v_grid: Vec<f64>,
    /// Lattice sizes (scaling benchmark).
    pub sites_grid: Vec<usize>,
    pub levels: Vec<ConditionLevel>,
    /// Sector override; half filling when unset.
    pub n_up: Option<usize>,
    pub n_down: Option<usize>,
    /// Impose `<N_up - N_down>` as a constraint row.
    pub spin_row: bool,
    pub solver: SolverOptions,
    /// Start each fig2 point from the solution at the previous U/V.
    pub warm_start: bool,
    pub output_dir: PathBuf,
    /// Measure wall time; when off `wall_ms` is written as 0 so that
    /// identical configs give identical files.
    pub timing: bool,
}

/// Inclusive arithmetic grid, rounded to 12 decimals so that `0.05` steps
/// print as written.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sites: 6,
            boundary: Boundary::Periodic,
            t: 0.0,
            u: 1.0,
            v_grid: linear_grid(0.25, 1.0, 0.05),
            u_over_v_grid: linear_grid(0.5, 4.0, 0.25),
            sites_grid: vec![4, 6, 8, 10, 12],
            levels: vec![ConditionLevel::TwoPos],
            n_up: None,
            n_down: None,
            spin_row: true,
            solver: SolverOptions::default(),
            warm_start: true,
            output_dir: PathBuf::from("results"),
            timing: true,
        }
    }
}

fn strictly_increasing<T: PartialOrd + Copy>(name: &str, grid: &[T]) -> Result<()> {
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// t = 0, U = 1, L = 6, V from 0.25 to 1 in steps of 0.05, 2-positivity.
    pub fn fig1() -> Self {
        Self::default()
    }

    /// t = U = 1, L = 4, U/V from 0.5 to 4 in steps of 0.25, both levels.
    pub fn fig2() -> Self {
        Self { sites: 4, t: 1.0, levels: ConditionLevel::ALL.to_vec(), ..Self::default() }
    }

    /// t = 0, U = 1, V = 0.25, L = 4..12, 2-positivity.
    pub fn scale() -> Self {
        Self { v_grid: vec![0.25], ..Self::default() }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Grid ordering, sector and solver sanity. Empty grids are allowed here;
    /// each experiment checks that its own grid is non-empty.
    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::Config("sites must be at least 2".into()));
        }
        if !(self.t.is_finite() && self.u.is_finite()) {
            return Err(Error::Config("t and U must be finite".into()));
        }
        if self.v_grid.iter().chain(&self.u_over_v_grid).any(|x| !x.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        if self.u_over_v_grid.contains(&0.0) {
            return Err(Error::Config("U/V grid must not contain 0".into()));
        }
        strictly_increasing("v_grid", &self.v_grid)?;
        strictly_increasing("u_over_v_grid", &self.u_over_v_grid)?;
        strictly_increasing("sites_grid", &self.sites_grid)?;
        let mut levels = self.levels.clone();
        levels.sort();
        levels.dedup();
        if levels.len() != self.levels.len() {
            return Err(Error::Config("levels must not repeat".into()));
        }
        if self.n_up.is_some() != self.n_down.is_some() {
            return Err(Error::Config("n_up and n_down must be given together".into()));
        }
        self.solver.validate()
    }

    pub fn require_grid<T>(name: &str, grid: &[T]) -> Result<()> {
        if grid.is_empty() {
            return Err(Error::Config(format!("{name} is empty")));
        }
        Ok(())
    }

    /// Creates the output directory and proves it writable.
    pub fn check_output_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.output_dir)?;
        let probe = self.output_dir.join(format!(".v2rdm-write-check-{}", std::process::id()));
        fs::write(&probe, b"")?;
        fs::remove_file(&probe)?;
        Ok(())
    }
}
