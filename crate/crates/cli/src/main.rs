//! `tfatom synth|analyze|render|curve`
//!
//! Exit status: 0 success, 2 bad input or I/O failure, 3 iteration cap hit
//! (output still written), 4 invalid frame.

mod analyze;
mod config;
mod error;
mod render;
mod signal_io;
mod solution;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tfatom::signal::gen_test_signal;
use tfatom::TestSignal;

use config::{Method, RunConfig, WindowChoice};
use error::{CliError, CliResult};
use signal_io::{Generator, Sidecar};

#[derive(Parser)]
#[command(name = "tfatom", version, about = "Sparse off-grid time-frequency analysis")]
struct Cli {
    /// Worker threads for the per-window solver updates.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Reserved; all solvers start from zero.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test signal.
    Synth(SynthArgs),
    /// Estimate a time-frequency representation.
    Analyze(AnalyzeArgs),
    /// Render a solution as a PGM image.
    Render(RenderArgs),
    /// Write descending |c|² curves of one or more solutions as CSV.
    Curve(CurveArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Sin,
    ChirpLin,
    ChirpQuad,
    Mix,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    length: usize,
    /// Sinusoid frequency.
    #[arg(long, default_value_t = 0.1)]
    freq: f64,
    /// Chirp start frequency (0.05 linear, 0.4 quadratic).
    #[arg(long)]
    f0: Option<f64>,
    /// Chirp end frequency when no rate is given (0.35 linear, 0.1 quadratic).
    #[arg(long)]
    f1: Option<f64>,
    /// Linear chirp rate in cycles/sample².
    #[arg(long)]
    rate: Option<f64>,
    /// Quadratic chirp curvature in cycles/sample³.
    #[arg(long)]
    curvature: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long)]
    sample_rate: Option<f64>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// TOML file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Signal file (float64 pairs) or 16-bit mono WAV.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_enum)]
    window: Option<WindowChoice>,
    #[arg(long)]
    winlen: Option<usize>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    hop: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Sets both residual tolerances.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    primal_tol: Option<f64>,
    #[arg(long)]
    dual_tol: Option<f64>,
    #[arg(long)]
    rank_tol: Option<f64>,
}

impl AnalyzeArgs {
    fn into_config(self) -> (Option<PathBuf>, RunConfig) {
        let config = RunConfig {
            method: self.method,
            window: self.window,
            winlen: self.winlen,
            bandwidth: self.bandwidth,
            hop: self.hop,
            channels: self.channels,
            rho: self.rho,
            max_iters: self.max_iters,
            tol: self.tol,
            primal_tol: self.primal_tol,
            dual_tol: self.dual_tol,
            rank_tol: self.rank_tol,
            input: self.input,
            output: self.output,
        };
        (self.config, config)
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 1024)]
    bins: usize,
    #[arg(long, default_value_t = -80.0, allow_hyphen_values = true)]
    floor: f64,
    /// Also write the dB matrix as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, short, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

fn with_amplitude(mut sig: TestSignal, amp: f64) -> TestSignal {
    match &mut sig {
        TestSignal::Sinusoid { amplitude, .. }
        | TestSignal::LinearChirp { amplitude, .. }
        | TestSignal::QuadraticChirp { amplitude, .. } => *amplitude = amp,
        TestSignal::Mixture(parts) => {
            for p in parts.iter_mut() {
                *p = with_amplitude(p.clone(), amp);
            }
        }
    }
    sig
}

fn test_signal(args: &SynthArgs) -> TestSignal {
    let n = args.length;
    let sig = match args.kind {
        Kind::Sin => TestSignal::sinusoid(args.freq),
        Kind::ChirpLin => {
            let f0 = args.f0.unwrap_or(0.05);
            match args.rate {
                Some(rate) => TestSignal::LinearChirp {
                    f0,
                    rate,
                    amplitude: 1.0,
                },
                None => TestSignal::linear_sweep(f0, args.f1.unwrap_or(0.35), n),
            }
        }
        Kind::ChirpQuad => {
            let f0 = args.f0.unwrap_or(0.4);
            match args.curvature {
                Some(curvature) => TestSignal::QuadraticChirp {
                    f0,
                    curvature,
                    amplitude: 1.0,
                },
                None => TestSignal::quadratic_sweep(f0, args.f1.unwrap_or(0.1), n),
            }
        }
        // chirp flags do not apply to the mixture
        Kind::Mix => match TestSignal::default_mixture(n) {
            TestSignal::Mixture(mut parts) => {
                parts[0] = TestSignal::sinusoid(args.freq);
                TestSignal::Mixture(parts)
            }
            other => other,
        },
    };
    with_amplitude(sig, args.amplitude)
}

fn synth(args: &SynthArgs) -> CliResult<()> {
    let kind = test_signal(args);
    let mut signal = gen_test_signal(&kind, args.length).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(rate) = args.sample_rate {
        signal = signal
            .with_sample_rate(rate)
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let name = match args.kind {
        Kind::Sin => "sin",
        Kind::ChirpLin => "chirp-lin",
        Kind::ChirpQuad => "chirp-quad",
        Kind::Mix => "mix",
    };
    let sidecar = Sidecar {
        length: args.length,
        sample_rate: args.sample_rate,
        generator: Some(Generator {
            kind: name.into(),
            components: signal_io::components(&kind),
        }),
    };
    signal_io::write_signal(&args.output, &signal, &sidecar)
}

fn analyze(args: AnalyzeArgs) -> CliResult<ExitCode> {
    let (config_path, flags) = args.into_config();
    let base = match config_path {
        Some(path) => RunConfig::load(&path)?,
        None => RunConfig::default(),
    };
    let settings = flags.over(base).resolve()?;
    Ok(if analyze::run(&settings)? {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn dispatch(cli: Cli) -> CliResult<ExitCode> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Synth(args) => synth(&args).map(|_| ExitCode::SUCCESS),
        Command::Analyze(args) => analyze(args),
        Command::Render(args) => render::render(
            &args.input,
            &args.output,
            args.bins,
            args.floor,
            args.csv.as_deref(),
        )
        .map(|_| ExitCode::SUCCESS),
        Command::Curve(args) => render::curve(&args.input, &args.output).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("tfatom: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
