mod commands;
mod definition;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spraylab::expr::DEFAULT_SEED;
use spraylab::involutivity::BasisChoice;
use spraylab::metrizability::{POSITIVITY_MARGIN, RANK_REL_TOL};
use spraylab::spray::DEFAULT_ISOTROPY_TOL;

use commands::{GeodesicArgs, Outcome, Settings};
use report::{InputInfo, Report, Sampling, Tolerances};

/// Spray geometry, projective metrizability and involutivity checks.
#[derive(Parser, Debug)]
#[command(name = "spraylab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON definition {"dim", "G", "F"?, "theta"?, "name"?}
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    input: Option<PathBuf>,
    /// flat2, flat3, anderson-thompson, yang(0.5), yang(0.5,3), riemannian
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Basis {
    Shifted,
    Unshifted,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Connection, Jacobi endomorphism, curvature, classification and identities.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Check the metrizability conditions for a candidate F or theta.
    Metrizable {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "theta")]
        finsler: Option<String>,
        /// Components of theta, comma separated or repeated.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        theta: Vec<String>,
    },
    /// Symbol dimensions and Cartan's test at random points.
    Involutivity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n_points: usize,
        #[arg(long, value_enum, default_value_t = Basis::Shifted)]
        basis: Basis,
    },
    /// Integrate a geodesic, optionally comparing with another spray.
    Geodesics {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        y0: Option<Vec<f64>>,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Preset name or definition file.
        #[arg(long)]
        compare: Option<String>,
        /// Trace output; `.json` extension writes JSON, anything else CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        compare_trace: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<definition::Loaded> {
    match (&common.input, &common.preset) {
        (Some(path), _) => definition::from_file(path),
        (None, Some(name)) => definition::from_preset(name),
        (None, None) => bail!("one of --input or --preset is required"),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (name, common) = match &cli.command {
        Command::Analyze { common } => ("analyze", common),
        Command::Metrizable { common, .. } => ("metrizable", common),
        Command::Involutivity { common, .. } => ("involutivity", common),
        Command::Geodesics { common, .. } => ("geodesics", common),
    };
    let input = load(common)?;
    let set = Settings { seed: common.seed, samples: common.samples, tol: common.tol };
    let outcome: Outcome = match &cli.command {
        Command::Analyze { .. } => commands::analyze(&input, &set)?,
        Command::Metrizable { finsler, theta, .. } => commands::metrizable(&input, &set, finsler.as_deref(), theta)?,
        Command::Involutivity { n_points, basis, .. } => {
            let basis = match basis {
                Basis::Shifted => BasisChoice::Shifted,
                Basis::Unshifted => BasisChoice::Unshifted,
            };
            commands::involutivity(&input, &set, *n_points, basis)?
        }
        Command::Geodesics { x0, y0, t_end, steps, compare, trace, compare_trace, .. } => {
            let args = GeodesicArgs {
                x0: x0.clone(),
                y0: y0.clone(),
                t_end: *t_end,
                steps: *steps,
                compare: compare.clone(),
                trace: trace.clone(),
                compare_trace: compare_trace.clone(),
            };
            commands::geodesics(&input, &set, &args)?
        }
    };
    let report = Report {
        schema: report::SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        command: name,
        input: InputInfo {
            source: input.source.clone(),
            name: input.name(),
            dim: input.spray.dim(),
            sha256: input.digest(),
        },
        sampling: Sampling { seed: common.seed, requested: common.samples, probe: name != "involutivity" },
        tolerances: Tolerances {
            zero: common.tol,
            isotropy: DEFAULT_ISOTROPY_TOL,
            rank_relative: RANK_REL_TOL,
            positivity_margin: POSITIVITY_MARGIN,
            trace: outcome.trace_tol,
        },
        pass: outcome.pass,
        result: outcome.result,
    };
    let body = match common.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(&outcome.summary),
    };
    match &common.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
