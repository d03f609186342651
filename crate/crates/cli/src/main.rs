//! `defect-cert`: generate window data, certify witnesses and run the
//! zero-defect decision from the command line.

mod commands;
mod config;
mod inputs;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Format;
use config::{Mode, Settings};

#[derive(Parser)]
#[command(name = "defect-cert", version, about = "Zero-defect certification from window sums")]
struct Cli {
    /// Arithmetic: exact integers, floating point, or residues mod --prime.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Prime modulus for certificates and modular evaluation.
    #[arg(long, global = true)]
    prime: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (a directory for `synth`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute window sums from parameters, a sequence or a preset.
    Windows(WindowsArgs),
    /// Jacobian rank certificate for a parameter point.
    Witness(WitnessArgs),
    /// Recover nodes and amplitudes from window sums.
    Reconstruct(ReconstructArgs),
    /// Decide zero / nonzero / inconclusive from window sums.
    Certify(CertifyArgs),
    /// Write fixture files: case-a, case-b, case-c or collision.
    Synth(SynthArgs),
}

#[derive(Args)]
struct WindowsArgs {
    /// JSON with "pi" or "initial"/"recurrence".
    #[arg(long)]
    params: Option<PathBuf>,
    /// Flat parameter vector y_0..y_d, q_1..q_d.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pi: Option<Vec<String>>,
    /// CSV sequence with header n,y_n.
    #[arg(long)]
    sequence: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "W")]
    w: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "W")]
    w: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pi: Option<Vec<String>>,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Draw random integer points until one is nonsingular.
    #[arg(long)]
    search: bool,
    #[arg(long, default_value_t = 5)]
    bound: i64,
    #[arg(long, default_value_t = 100)]
    max_trials: usize,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Windows as JSON {"W","K","sums"} or CSV k,S_k.
    input: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "W")]
    w: Option<usize>,
}

#[derive(Args)]
struct CertifyArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "W")]
    w: Option<usize>,
    /// Bound on the window perturbation.
    #[arg(long)]
    noise_eps: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    label: String,
    #[arg(long = "W")]
    w: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
}

fn run(cli: Cli) -> Result<u8> {
    let settings = Settings::resolve(cli.mode, cli.prime, cli.seed, cli.out, cli.config.as_deref())?;
    match cli.command {
        Command::Windows(a) => commands::windows(
            &settings,
            commands::WindowsRequest {
                params: a.params,
                pi: a.pi,
                sequence: a.sequence,
                preset: a.preset,
                w: a.w,
                k: a.k,
                format: a.format,
            },
        ),
        Command::Witness(a) => commands::witness(
            &settings,
            commands::WitnessRequest {
                d: a.d,
                w: a.w,
                pi: a.pi,
                params: a.params,
                search: a.search,
                bound: a.bound,
                max_trials: a.max_trials,
            },
        ),
        Command::Reconstruct(a) => commands::reconstruct(&settings, a.input, a.d, a.w),
        Command::Certify(a) => commands::certify(
            &settings,
            commands::CertifyRequest { input: a.input, d: a.d, w: a.w, noise_eps: a.noise_eps, eps0: a.eps0 },
        ),
        Command::Synth(a) => {
            commands::synth(&settings, commands::SynthRequest { label: a.label, w: a.w, k: a.k, d: a.d })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEFECT_CERT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_ERROR)
        }
    }
}
