use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavedens::harness::{self, ExperimentConfig, FitRequest, WaveletConfig};
use wavedens::{Error, Family, FitOptions, Method};

#[derive(Parser, Debug)]
#[command(name = "wavedens", version, about = "Wavelet density estimation experiments")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; RAYON_NUM_THREADS is used when absent.
    #[arg(long, global = true, env = "WAVEDENS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write simulated samples and a manifest.
    Simulate,
    /// Fit one sample file.
    Fit(FitArgs),
    /// Monte-Carlo risk reports.
    Benchmark,
    /// Covariance decay profiles over the LSV parameter grid.
    DiagnoseDecay,
    /// Dump tabulated scaling function and wavelet.
    Tables(TableArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Single-column CSV of observations.
    #[arg(long)]
    sample: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Threshold constant for the theoretical methods, overriding the config.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    hi: f64,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    vanishing_moments: Option<u32>,
    #[arg(long)]
    depth: Option<u32>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    })
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(cli: &Cli, required: bool, fallback: &str) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if required => return Err(Failure::Config("this command needs --config".into())),
        None => ExperimentConfig::from_json(&format!("{{\"experiment\":\"{fallback}\"}}"))?,
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate => {
            let cfg = load_config(cli, true, "simulate")?;
            let manifest = harness::cmd_simulate(&cfg, &cfg.output_dir)?;
            println!("wrote {} samples to {}", manifest.files.len(), cfg.output_dir.display());
        }
        Command::Fit(args) => {
            let cfg = load_config(cli, false, "fit")?;
            let k_const = args.k.unwrap_or(cfg.k_const);
            if !(k_const > 0.0 && k_const.is_finite()) {
                return Err(Failure::Config(format!("--k {k_const} must be positive")));
            }
            let req = FitRequest {
                sample: args.sample.clone(),
                method: args.method,
                support: (args.lo, args.hi),
                options: FitOptions {
                    grid_points: args.grid_points.unwrap_or(cfg.grid_points),
                    k_const,
                    dependence_b: cfg.dependence_b,
                    ..FitOptions::default()
                },
                wavelet: cfg.wavelet.clone(),
            };
            for path in harness::cmd_fit(&req, &cfg.output_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Benchmark => {
            let cfg = load_config(cli, true, "benchmark")?;
            harness::cmd_benchmark(&cfg, &cfg.output_dir)?;
            println!("{}", cfg.output_dir.join("benchmark.json").display());
        }
        Command::DiagnoseDecay => {
            let cfg = load_config(cli, false, "diagnose-decay")?;
            for s in harness::cmd_diagnose_decay(&cfg, &cfg.output_dir)? {
                let slope = s.slope.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
                println!("{}\t{}\tslope {}", s.process, s.class, slope);
            }
        }
        Command::Tables(args) => {
            let cfg = load_config(cli, false, "tables")?;
            let wavelet = WaveletConfig {
                family: args.family.unwrap_or(cfg.wavelet.family),
                vanishing_moments: args.vanishing_moments.unwrap_or(cfg.wavelet.vanishing_moments),
                depth: args.depth.unwrap_or(cfg.wavelet.depth),
            };
            let path = harness::cmd_tables(&wavelet, &cfg.output_dir)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
