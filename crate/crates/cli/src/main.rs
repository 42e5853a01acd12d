//! Command-line front end: reproducible self-expander experiments.
//!
//! Subcommands: solve, flow, density, spectrum, decay-fit, check-all.
//! Exit codes: 0 = pass, 2 = solver/domain failure (including failed
//! checks), 3 = I/O failure. Angles are radians, with `pi` literals allowed
//! (`pi`, `2pi/3`, `-pi/6`, `0.75pi`).

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "expanders", version, about = "Equivariant Lagrangian self-expander laboratory")]
struct Cli {
    /// Optional JSON config file; explicit flags win over config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the expander boundary value problem by shooting.
    Solve {
        /// Asymptotic ray directions "a,b" (radians; pi literals allowed).
        #[arg(long)]
        rays: Option<String>,
        /// Arc-length step of the returned profile.
        #[arg(long)]
        step_size: Option<f64>,
        /// Truncation radius.
        #[arg(long)]
        r_max: Option<f64>,
        /// Shooting tolerance on the asymptotic angles.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Flow a desingularized cone and compare with the shooting solution.
    Flow {
        #[arg(long)]
        rays: Option<String>,
        /// Final flow time (the profile is rescaled back to the t = 1/2 slice).
        #[arg(long)]
        t_end: Option<f64>,
        /// Spatial resolution.
        #[arg(long)]
        ds: Option<f64>,
        /// dt = dt_factor · ds².
        #[arg(long)]
        dt_factor: Option<f64>,
        /// Waist radius of the desingularizing neck.
        #[arg(long)]
        desing_radius: Option<f64>,
        /// Number of snapshot profiles to write.
        #[arg(long)]
        snapshots: Option<usize>,
    },
    /// Gaussian density sweep and monotonicity check of a stored profile.
    Density {
        /// Input profile CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Lattice size per axis of the center grid.
        #[arg(long)]
        grid_n: Option<usize>,
        /// Extent of the center grid.
        #[arg(long)]
        grid_extent: Option<f64>,
    },
    /// Spectral diagnostics of the linearized operator on a stored profile.
    Spectrum {
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Highest Fourier mode (inclusive).
        #[arg(long)]
        max_mode: Option<u32>,
        /// Operator grid spacing.
        #[arg(long)]
        h: Option<f64>,
        /// Operator truncation radius.
        #[arg(long)]
        r_trunc: Option<f64>,
    },
    /// Fit the Gaussian decay rate of a stored profile's tail.
    DecayFit {
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Run the built-in verification suite end to end.
    CheckAll {
        /// Include the long flow cross-check.
        #[arg(long, default_value_t = false)]
        full: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let file_config = match config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let result = match cli.command {
        Command::Solve { rays, step_size, r_max, tolerance } => commands::solve(
            &out,
            &file_config,
            rays.as_deref(),
            step_size,
            r_max,
            tolerance,
        ),
        Command::Flow { rays, t_end, ds, dt_factor, desing_radius, snapshots } => commands::flow(
            &out,
            &file_config,
            rays.as_deref(),
            t_end,
            ds,
            dt_factor,
            desing_radius,
            snapshots,
        ),
        Command::Density { profile, grid_n, grid_extent } => {
            commands::density(&out, &file_config, profile.as_deref(), grid_n, grid_extent)
        }
        Command::Spectrum { profile, max_mode, h, r_trunc } => {
            commands::spectrum(&out, &file_config, profile.as_deref(), max_mode, h, r_trunc)
        }
        Command::DecayFit { profile } => commands::decay_fit(&out, &file_config, profile.as_deref()),
        Command::CheckAll { full } => commands::check_all(&out, full),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
