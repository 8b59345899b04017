use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use v2rdm::experiment::{
    analyze_crossing, emit_results, exit_code, run_fig1_sweep, run_fig2_sweep, run_scaling_benchmark, write_atomic,
    ExperimentConfig,
};
use v2rdm::lattice::{Boundary, HubbardParams, LatticeSpec};
use v2rdm::sdp::write_problem;
use v2rdm::variational::{assemble_with, dual_certificate, solve_problem, AssembleOptions, ConditionLevel};

#[derive(Parser)]
#[command(name = "v2rdm", version, about = "Variational 2-RDM bounds for the extended Hubbard chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// t = 0 sweep over V against the analytic energy.
    Fig1(Common),
    /// t = U = 1 sweep over U/V against exact diagonalization.
    Fig2(Common),
    /// Wall time of the t = 0 program against lattice size.
    Scale(Common),
    /// Solve a single point and print its energy and certificate.
    SolveOne(Single),
    /// Write the assembled program of a single point in text form.
    DumpProblem(Single),
}

#[derive(Args)]
struct Common {
    /// TOML config; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    sites: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "U")]
    u: Option<f64>,
    /// Comma-separated V values.
    #[arg(long = "V-grid", value_delimiter = ',')]
    v_grid: Option<Vec<f64>>,
    #[arg(long = "UV-grid", value_delimiter = ',')]
    u_over_v_grid: Option<Vec<f64>>,
    #[arg(long = "L-grid", value_delimiter = ',')]
    sites_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<ConditionLevel>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop the N_up - N_down constraint row.
    #[arg(long)]
    no_spin_row: bool,
    /// Write wall_ms as 0 for reproducible tables.
    #[arg(long)]
    no_timing: bool,
    /// Solve every fig2 point from scratch.
    #[arg(long)]
    cold: bool,
}

#[derive(Args)]
struct Single {
    #[arg(long = "L", default_value_t = 4)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long = "U", default_value_t = 1.0)]
    u: f64,
    #[arg(long = "V", default_value_t = 0.25)]
    v: f64,
    #[arg(long, default_value = "2pos")]
    level: ConditionLevel,
    #[arg(long)]
    open: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    no_spin_row: bool,
    /// JSON-lines iteration log.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, base: ExperimentConfig) -> v2rdm::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => base,
        };
        if let Some(v) = self.sites {
            cfg.sites = v;
        }
        if let Some(v) = self.t {
            cfg.t = v;
        }
        if let Some(v) = self.u {
            cfg.u = v;
        }
        if let Some(v) = &self.v_grid {
            cfg.v_grid = v.clone();
        }
        if let Some(v) = &self.u_over_v_grid {
            cfg.u_over_v_grid = v.clone();
        }
        if let Some(v) = &self.sites_grid {
            cfg.sites_grid = v.clone();
        }
        if let Some(v) = &self.levels {
            cfg.levels = v.clone();
        }
        if let Some(v) = self.tol {
            cfg.solver.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.solver.max_iter = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        cfg.spin_row &= !self.no_spin_row;
        cfg.timing &= !self.no_timing;
        cfg.warm_start &= !self.cold;
        cfg.validate()?;
        cfg.check_output_dir()?;
        Ok(cfg)
    }
}

impl Single {
    fn problem(&self) -> v2rdm::Result<v2rdm::variational::V2rdmProblem> {
        let boundary = if self.open { Boundary::Open } else { Boundary::Periodic };
        let spec = LatticeSpec::half_filled(self.sites, boundary)?;
        let params = HubbardParams::new(self.t, self.u, self.v);
        assemble_with(&spec, &params, self.level, &AssembleOptions { spin_row: !self.no_spin_row })
    }
}

fn fig1(args: &Common) -> v2rdm::Result<i32> {
    let cfg = args.config(ExperimentConfig::fig1())?;
    let result = run_fig1_sweep(&cfg)?;
    let emitted = emit_results(&result, &cfg.output_dir, "fig1")?;
    let crossing = analyze_crossing(&result);
    print!("{}", emitted.summary);
    println!(
        "branch switch at V = {:?}, slope kink at V = {:?} {:?}",
        crossing.branch_switch, crossing.kink, crossing.slopes
    );
    println!("wrote {} and {}", emitted.csv.display(), emitted.json.display());
    Ok(exit_code(&result))
}

fn fig2(args: &Common) -> v2rdm::Result<i32> {
    let cfg = args.config(ExperimentConfig::fig2())?;
    let result = run_fig2_sweep(&cfg)?;
    let emitted = emit_results(&result, &cfg.output_dir, "fig2")?;
    print!("{}", emitted.summary);
    for level in &cfg.levels {
        let lo = v2rdm::experiment::mean_abs_error(&result, *level, 0.5, 1.5);
        let hi = v2rdm::experiment::mean_abs_error(&result, *level, 2.5, 4.0);
        println!("{level}: mean |error| U/V in [0.5, 1.5] = {lo:?}, in [2.5, 4] = {hi:?}");
    }
    println!("wrote {} and {}", emitted.csv.display(), emitted.json.display());
    Ok(exit_code(&result))
}

fn scale(args: &Common) -> v2rdm::Result<i32> {
    let cfg = args.config(ExperimentConfig::scale())?;
    let report = run_scaling_benchmark(&cfg)?;
    let path = cfg.output_dir.join("scale.csv");
    write_atomic(&path, |w| {
        let mut out = csv::Writer::from_writer(w);
        for row in &report.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    })?;
    println!(
        "{:>4} {:>10} {:>7} {:>6} {:>6} {:>6} {:>8} {:>14}",
        "L", "wall_ms", "iters", "D2", "Q2", "G2", "rows", "energy"
    );
    for r in &report.rows {
        println!(
            "{:>4} {:>10} {:>7} {:>6} {:>6} {:>6} {:>8} {:>14.8}",
            r.sites, r.wall_ms, r.iters, r.dim_d2, r.dim_q2, r.dim_g2, r.rows, r.energy_sdp
        );
    }
    match (report.slope, report.r_squared) {
        (Some(s), Some(r2)) => println!("log-log slope {s:.3} (R² {r2:.4})"),
        _ => println!("log-log slope unavailable (timing off or fewer than two sizes)"),
    }
    for f in &report.failures {
        println!("  FAILED {f}");
    }
    println!("wrote {}", path.display());
    Ok(i32::from(!report.failures.is_empty()))
}

fn solve_one(args: &Single) -> v2rdm::Result<i32> {
    let problem = args.problem()?;
    let mut opts = v2rdm::sdp::SolverOptions::default();
    if let Some(v) = args.tol {
        opts.tol = v;
    }
    if let Some(v) = args.max_iter {
        opts.max_iter = v;
    }
    let mut log = match &args.log {
        Some(path) => Some(BufWriter::new(File::create(path)?)),
        None => None,
    };
    let mut log_err = None;
    let result = solve_problem(&problem, &opts, &mut |rec| {
        if let Some(w) = log.as_mut() {
            let line = serde_json::to_string(rec).map_err(io::Error::from).and_then(|s| writeln!(w, "{s}"));
            if let Err(e) = line {
                log_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = log_err {
        return Err(e.into());
    }
    if let Some(mut w) = log {
        w.flush()?;
    }
    println!("energy        {:.10}", result.energy);
    println!("dual energy   {:.10}", result.dual_energy);
    println!("certified     {:.10}", result.certified_bound);
    println!("status        {} after {} iterations", result.status.as_str(), result.iterations);
    println!(
        "residuals     primal {:.2e} dual {:.2e} gap {:.2e}",
        result.residuals.primal, result.residuals.dual, result.residuals.gap
    );
    for (name, ev) in &result.min_eigenvalues {
        println!("min eig {name:<5} {ev:.3e}");
    }
    let cert = dual_certificate(&problem, &result.solution)?;
    println!(
        "certificate   residual {:.2e} (tolerance {:.2e}), {} factors, min beta {:.3e}",
        cert.residual,
        cert.tolerance,
        cert.factors.len(),
        cert.min_beta()
    );
    Ok(i32::from(!result.converged()))
}

fn dump_problem(args: &Single) -> v2rdm::Result<i32> {
    let problem = args.problem()?;
    match &args.out {
        Some(path) => write_atomic(path, |w| write_problem(&problem.sdp, w))?,
        None => write_problem(&problem.sdp, io::stdout().lock())?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fig1(a) => fig1(a),
        Command::Fig2(a) => fig2(a),
        Command::Scale(a) => scale(a),
        Command::SolveOne(a) => solve_one(a),
        Command::DumpProblem(a) => dump_problem(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
