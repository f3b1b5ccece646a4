use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anytime_bench::commands::{
    self, cs_kind, interval_kind, method, CertifyConfig, CoverageConfig, ThresholdsConfig,
    WidthConfig,
};
use anytime_bench::BenchError;
use anytime_core::cert::CertMode;
use anytime_core::decision::{SweepConfig, DEFAULT_CAP};

/// Seeded experiments for anytime-valid Bernoulli estimation. Output is CSV.
#[derive(Parser, Debug)]
#[command(name = "anytime-bench", version)]
struct Cli {
    /// Master seed; every trial derives its own substream from it.
    #[arg(long, global = true, env = "ANYTIME_SEED", default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: one per core). Output does not depend on it.
    #[arg(long, global = true, env = "ANYTIME_THREADS")]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Coverage of one-sided Clopper-Pearson and randomized intervals.
    Coverage(CoverageArgs),
    /// Running interval of each confidence sequence on a shared stream.
    Width(WidthArgs),
    /// Sequential threshold decisions over a grid of thresholds.
    Decide(DecideArgs),
    /// Randomized-smoothing certification against a synthetic oracle.
    Certify(CertifyArgs),
    /// Head-count thresholds of the betting sequence.
    Thresholds(ThresholdsArgs),
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    /// Comma-separated p values (default: 0.01, 0.02, ..., 0.99).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Monte Carlo trials per point; 0 reports only exact coverage.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, value_delimiter = ',', default_value = "cp,rcp")]
    kinds: Vec<String>,
}

#[derive(Args, Debug)]
struct WidthArgs {
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 65536)]
    horizon: u64,
    #[arg(long, value_delimiter = ',', default_value = "betting,union")]
    kinds: Vec<String>,
    /// Which of the seed's streams to follow.
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Args, Debug)]
struct DecideArgs {
    /// True mean of the stream.
    #[arg(long, default_value_t = 0.91)]
    q: f64,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    /// Comma-separated thresholds (default: 0, 0.02, ..., 1).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "sprt,betting,union,horvath"
    )]
    methods: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// One row per (method, threshold) instead of per trial.
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Class probabilities of the oracle, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.1")]
    probs: Vec<f64>,
    /// Class certified in binary mode.
    #[arg(long, default_value_t = 0)]
    target: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    /// Multiclass mode with this share of alpha for the top class.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 100)]
    warmup: u64,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Debug)]
struct ThresholdsArgs {
    #[arg(long, default_value_t = 0.91)]
    p: f64,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    n_max: u64,
}

fn parse_all<T>(
    names: &[String],
    f: impl Fn(&str) -> Result<T, BenchError>,
) -> Result<Vec<T>, BenchError> {
    names.iter().map(|s| f(s.trim())).collect()
}

fn run(cli: Cli) -> Result<String, BenchError> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Coverage(a) => {
            let d = CoverageConfig::default();
            commands::coverage(&CoverageConfig {
                n: a.n,
                alpha: a.alpha,
                p_grid: a.p.unwrap_or(d.p_grid),
                trials: a.trials,
                kinds: parse_all(&a.kinds, interval_kind)?,
                seed,
            })
        }
        Cmd::Width(a) => commands::width(&WidthConfig {
            p: a.p,
            alpha: a.alpha,
            horizon: a.horizon,
            kinds: parse_all(&a.kinds, cs_kind)?,
            seed,
            stream: a.stream,
        }),
        Cmd::Decide(a) => {
            let d = SweepConfig::figure(a.trials, seed);
            let cfg = SweepConfig {
                p_grid: a.p.unwrap_or(d.p_grid),
                q: a.q,
                alpha: a.alpha,
                methods: parse_all(&a.methods, method)?,
                cap: a.cap,
                ..d
            };
            commands::decide(&cfg, a.summary)
        }
        Cmd::Certify(a) => {
            let d = CertifyConfig::default();
            let mode = match a.lambda {
                Some(lambda) => CertMode::Multiclass {
                    lambda,
                    warmup: a.warmup,
                },
                None => CertMode::Binary,
            };
            let methods = match (a.methods, mode) {
                (Some(m), _) => parse_all(&m, method)?,
                (None, CertMode::Binary) => d.methods,
                (None, CertMode::Multiclass { .. }) => {
                    parse_all(&["union".into(), "betting".into()], method)?
                }
            };
            let cfg = CertifyConfig {
                probs: a.probs,
                target: a.target,
                sigma: a.sigma,
                radii: a.radii,
                alpha: a.alpha,
                mode,
                methods,
                trials: a.trials,
                cap: a.cap,
                seed,
            };
            commands::certify(&cfg, a.summary)
        }
        Cmd::Thresholds(a) => commands::thresholds(&ThresholdsConfig {
            p: a.p,
            alpha: a.alpha,
            n_max: a.n_max,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out.clone();
    let csv = match run(cli) {
        Ok(csv) => csv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match out {
        Some(path) => std::fs::write(path, csv),
        None => std::io::stdout().lock().write_all(csv.as_bytes()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
