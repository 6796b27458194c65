use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lyapunov_irregular::experiments::{
    cmd_bounds, cmd_irregular, cmd_scan, cmd_spectrum, cmd_verify, Experiment, ExperimentError, Outcome, Overrides,
};

/// Lyapunov spectra and certified Lyapunov-irregular points for locally
/// constant matrix cocycles over subshifts of finite type.
#[derive(Parser, Debug)]
#[command(name = "lyirr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true, default_value = "lyirr.toml")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of construction levels K.
    #[arg(long, global = true)]
    levels: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Window length for `scan`.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Horizon for the O_n membership check.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Resource caps as `key=value` (max_block, max_window, horizon).
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_cap)]
    caps: Vec<(String, String)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov spectrum and Λ_i of every configured measure.
    Spectrum,
    /// Build and certify an irregular point, writing a witness file.
    Irregular,
    /// Re-certify a witness file from scratch.
    Verify {
        /// Witness file; defaults to `<out>/witness.json`.
        witness: Option<PathBuf>,
    },
    /// Density evidence over all legal cylinders of one window length.
    Scan,
    /// Lyapunov-metric, cone and norm-estimate instance checks.
    Bounds,
}

fn parse_cap(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected key=value, got {s:?}")),
    }
}

fn run(cli: Cli) -> Result<Outcome, ExperimentError> {
    let c = cli.common;
    let overrides = Overrides {
        out: c.out,
        levels: c.levels,
        tau: c.tau,
        epsilon: c.epsilon,
        window: c.window,
        horizon: c.horizon,
        seed: c.seed,
        caps: c.caps,
    };
    let exp = Experiment::load(&c.config, &overrides)?;
    match cli.command {
        Command::Spectrum => cmd_spectrum(&exp),
        Command::Irregular => cmd_irregular(&exp),
        Command::Verify { witness } => {
            let path = witness.unwrap_or_else(|| exp.out_dir.join("witness.json"));
            cmd_verify(&exp, &path)
        }
        Command::Scan => cmd_scan(&exp),
        Command::Bounds => cmd_bounds(&exp),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
