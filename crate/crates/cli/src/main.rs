//! `bqhl`: oracle evolution, direct scattering, clause verification, RH
//! inversion and round-trip comparison, with plot-ready CSV/JSON output.
//!
//! Exit codes: 0 success, 2 assumption violation, 3 numerical failure,
//! 4 input, I/O or schema error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_grid, PartialConfig, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "bqhl", version, about = "Half-line good Boussinesq: direct and inverse scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Evolve the Gaussian datum and write profiles and snapshots.
    Oracle,
    /// Sample r₁…r₄ from profiles on disk and run the assumption scan.
    Direct,
    /// Check the structural clauses on a dataset.
    Verify,
    /// Recover u, v on the interior grid from a dataset.
    Inverse,
    /// Oracle, direct and inverse in one go, compared with the oracle.
    Roundtrip,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON file with any subset of the run settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `.`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Final time of the window.
    #[arg(long = "T", global = true)]
    t_end: Option<f64>,
    /// Right end of the spatial window.
    #[arg(long, global = true)]
    xmax: Option<f64>,
    /// Largest |k| at which r₁…r₄ are computed directly.
    #[arg(long, global = true)]
    kmax: Option<f64>,
    /// Gauss–Legendre nodes on each radial panel of every ray.
    #[arg(long, global = true)]
    nodes_per_panel: Option<usize>,
    /// Radius at which the contour is truncated.
    #[arg(long, global = true)]
    rtrunc: Option<f64>,
    /// Smallest directly sampled radius; the origin panels lie inside it.
    #[arg(long, global = true)]
    rmin: Option<f64>,
    /// Relative tolerance of the spectral ODE solves.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Interior grid as "nx,nt".
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,
    /// Gaussian datum: u₀ = a·exp(−((x − c)/w)²), v₀ = −v_coeff·u₀′.
    #[arg(long, global = true, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long, global = true)]
    center: Option<f64>,
    #[arg(long, global = true)]
    width: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    v_coeff: Option<f64>,
    /// Oracle time step (default T/400).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Number of evenly spaced oracle snapshots to write.
    #[arg(long, global = true)]
    snapshots: Option<usize>,
    /// Grid points re-solved on the doubled mesh during `roundtrip`.
    #[arg(long, global = true)]
    self_check: Option<usize>,
    /// Condition estimate above which a solve is rejected.
    #[arg(long, global = true)]
    cond_limit: Option<f64>,
    /// Directory holding initial.csv, boundary.csv and final.csv.
    #[arg(long, global = true)]
    profiles: Option<PathBuf>,
    /// Dataset JSON (default `<out>/dataset.json`).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
}

impl Common {
    fn partial(self) -> PartialConfig {
        PartialConfig {
            t_end: self.t_end,
            x_max: self.xmax,
            k_max: self.kmax,
            nodes_per_panel: self.nodes_per_panel,
            r_trunc: self.rtrunc,
            r_min: self.rmin,
            tol: self.tol,
            grid: self.grid,
            amplitude: self.amplitude,
            center: self.center,
            width: self.width,
            v_coeff: self.v_coeff,
            dt: self.dt,
            snapshots: self.snapshots,
            self_check: self.self_check,
            cond_limit: self.cond_limit,
            profiles: self.profiles,
            dataset: self.dataset,
            out: self.out,
        }
    }
}

fn run(cli: Cli) -> bqhl::Result<()> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.common.config {
        cfg.apply(RunConfig::load(path)?);
    }
    cfg.apply(cli.common.partial());
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    match cli.command {
        Command::Oracle => commands::oracle(&cfg),
        Command::Direct => commands::direct(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Inverse => commands::inverse(&cfg),
        Command::Roundtrip => commands::roundtrip(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
