//! `robinopt`: optimal Robin parameters, sweeps, heat content and
//! verification suites from the command line.

mod commands;
mod domain_spec;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "robinopt", version, about = "Optimal Robin boundary parameters on planar domains")]
pub struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format; each command has its own default.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MeshArgs {
    /// Domain: disk:R, annulus:R,r, rect:a,b, square, ngon:n,R, lshape[:a], mesh:PATH.
    #[arg(long, default_value = "disk:1")]
    pub domain: String,
    /// Interior element size.
    #[arg(long, default_value_t = 0.02)]
    pub h: f64,
    /// Boundary-layer width for grading; by default derived from mu.
    #[arg(long)]
    pub boundary_layer: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal sigma_mu and Lambda_mu for one constraint value.
    #[command(allow_negative_numbers = true)]
    Optimize {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        mu: f64,
        /// Root tolerance; default 1e-10 (1 + |mu|).
        #[arg(long)]
        tol: Option<f64>,
        /// Write the boundary profile of sigma_mu as CSV to this file.
        #[arg(long)]
        sigma_profile: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Lambda_mu over an evenly spaced grid of mu values.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        mu_min: f64,
        #[arg(long)]
        mu_max: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        tol: Option<f64>,
        /// Worker threads.
        #[arg(long, env = "ROBINOPT_JOBS")]
        jobs: Option<usize>,
        /// Fill the wall_seconds column.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Heat content Q(t) for unit initial data and zero boundary values.
    HeatContent {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["t_min", "t_max"])]
        times: Vec<f64>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of log-spaced times between t_min and t_max.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run verification suites.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[arg(long, value_parser = ["optimality", "asymptotic", "heat", "blowup", "all"], default_value = "all")]
        suite: String,
        /// Domain string as for the other commands.
        #[arg(long, default_value = "disk:1")]
        domain: String,
        /// Interior element size.
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        /// Constraint value for the optimality suite.
        #[arg(long, default_value_t = -10.0)]
        mu: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        /// Constraint values for the asymptotic suite.
        #[arg(long, value_delimiter = ',')]
        mu_grid: Vec<f64>,
        #[arg(long, default_value_t = -1.0)]
        blowup_mu: f64,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Corner coefficient c(alpha) of the polygonal expansions.
    CornerCoeff {
        /// Interior angle in radians.
        #[arg(long, required_unless_present = "degrees")]
        alpha: Option<f64>,
        /// Interior angle in degrees.
        #[arg(long, conflicts_with = "alpha")]
        degrees: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form reference values.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// F(s) on the disk.
    #[command(allow_negative_numbers = true)]
    DiskF {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        s: f64,
    },
    /// Lambda_mu on the disk.
    #[command(allow_negative_numbers = true)]
    DiskLambda {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Principal eigenvalue of the disk with constant Robin parameter sigma.
    #[command(allow_negative_numbers = true)]
    DiskRobin {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// F(s) on the ball in dimension N.
    #[command(allow_negative_numbers = true)]
    BallF {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        s: f64,
    },
    /// Two-term expansion of Lambda_mu as mu -> -inf.
    Predict {
        #[arg(long, default_value = "disk:1")]
        domain: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
