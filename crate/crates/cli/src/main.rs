use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use hessfit_cli::{exit_code, run};
use hessfit_core::config::{
    parse_subcommand_config, EstimateConfig, MomentsConfig, Params, QueryPoint, RunConfig, Subcommand,
};
use hessfit_core::{Error, Result};

/// Hessian estimation on sampled manifolds.
///
/// Exit status: 0 on success, 2 for invalid input or configuration,
/// 3 for numerical failures.
#[derive(Parser)]
#[command(name = "hessfit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Sample a point cloud from a model; writes CSV plus `<stem>.meta.json`
    /// (and `<stem>.f.csv` when the config names a field).
    Sample {
        #[command(flatten)]
        config: ConfigArg,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate value, gradient and Hessian at one point.
    Estimate(EstimateArgs),
    /// Compare every moment closed form against quadrature and Monte Carlo.
    Moments(MomentsArgs),
    /// Block-wise Gram deviation table across a grid of scales.
    Gram {
        #[command(flatten)]
        config: ConfigArg,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Error-versus-scale study; writes `<prefix>_raw.csv` and `<prefix>_report.json`.
    Converge {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out_prefix: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// JSON config: the parameter object, or a full run document.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Cloud CSV (header x1..xp).
    #[arg(long)]
    cloud: PathBuf,
    /// Single-column CSV of function values.
    #[arg(long, conflicts_with = "field")]
    fvals: Option<PathBuf>,
    /// Catalog field evaluated on the cloud (needs the cloud's sidecar).
    #[arg(long)]
    field: Option<String>,
    /// Query point as comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "z_index", required_unless_present = "z_index")]
    z: Option<String>,
    /// Query point as a row index of the cloud.
    #[arg(long)]
    z_index: Option<usize>,
    #[arg(long)]
    eps: f64,
    /// Intrinsic dimension; defaults to the cloud's model.
    #[arg(long)]
    dim: Option<usize>,
    /// Output JSON; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    d: usize,
    /// Truncation depth of the ball, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn read_config(sub: Subcommand, path: &PathBuf, out: PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_subcommand_config(sub, &text)?;
    cfg.output = Some(out);
    Ok(cfg)
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::validation("z", format!("`{s}`: {e}"))))
        .collect()
}

fn build(cli: Cli) -> Result<RunConfig> {
    match cli.command {
        Command::Sample { config, out } => read_config(Subcommand::Sample, &config.config, out),
        Command::Gram { config, out } => read_config(Subcommand::Gram, &config.config, out),
        Command::Converge { config, out_prefix } => read_config(Subcommand::Converge, &config.config, out_prefix),
        Command::Estimate(a) => {
            let z = match (a.z, a.z_index) {
                (Some(z), _) => QueryPoint::Point(parse_point(&z)?),
                (None, Some(i)) => QueryPoint::Index(i),
                (None, None) => return Err(Error::validation("z", "give --z or --z-index")),
            };
            let c = EstimateConfig {
                cloud: a.cloud,
                fvals: a.fvals,
                field: a.field,
                z,
                eps: a.eps,
                dim: a.dim,
            };
            c.validate()?;
            Ok(RunConfig {
                subcommand: Subcommand::Estimate,
                params: Params::Estimate(c),
                output: a.out,
            })
        }
        Command::Moments(a) => {
            let c = MomentsConfig {
                d: a.d,
                delta: a.delta,
                eps: a.eps,
                mc_samples: a.mc_samples,
                seed: a.seed,
            };
            c.validate()?;
            Ok(RunConfig {
                subcommand: Subcommand::Moments,
                params: Params::Moments(c),
                output: a.report,
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = build(Cli::parse()).and_then(|cfg| run(&cfg));
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
