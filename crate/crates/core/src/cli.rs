//! Command-line experiment runner.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Parser;

use crate::channel::ScenarioConfig;
use crate::evaluation::{
    run_experiment_with, Algorithm, ExperimentReport, Sweep, SweepParam, TrialOutcome,
};

pub const CSV_HEADER: &str =
    "sweep_param,sweep_value,algorithm,mean_snr_loss_db,trials,invalid_count,seed";

#[derive(Debug, Parser)]
#[command(
    name = "onebit-csit",
    about = "Monte Carlo evaluation of one-bit feedback channel estimation for FDD massive MIMO",
    version
)]
struct Args {
    /// BTS antennas
    #[arg(long = "M", default_value_t = 128)]
    m: usize,
    /// antennas per user
    #[arg(long = "N", default_value_t = 2)]
    n: usize,
    /// users
    #[arg(long = "K", default_value_t = 10)]
    k: usize,
    /// pilot symbols
    #[arg(long = "T", default_value_t = 64)]
    t: usize,
    /// individual sparsity parameter
    #[arg(long = "s", default_value_t = 10)]
    s: usize,
    /// joint sparsity parameter
    #[arg(long = "c", default_value_t = 6)]
    c: usize,
    #[arg(long = "snr-db", default_value_t = 15.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// gradient step size
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
    /// channel realizations per sweep point
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// sweep one parameter, e.g. T=32,64,96,128
    #[arg(long)]
    sweep: Option<String>,
    /// comma-separated subset of biht,jbiht,jbiht-oracle,genie-ls
    #[arg(long, default_value = "biht,jbiht,jbiht-oracle,genie-ls")]
    algos: String,
    /// CSV output path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// per-trial diagnostics on stderr
    #[arg(long)]
    verbose: bool,
    /// worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// A fully validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: ScenarioConfig,
    pub sweep: Sweep,
    pub out: Option<PathBuf>,
    pub verbose: bool,
    pub algorithms: Vec<Algorithm>,
    pub jobs: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags; carries the message to print. `Help` and `--version` land
    /// here too with `is_info` set.
    Usage {
        message: String,
        is_info: bool,
    },
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage { message, .. } => f.write_str(message.trim_end()),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage {
        message: message.into(),
        is_info: false,
    }
}

pub fn parse_sweep(text: &str) -> Result<Sweep, CliError> {
    let (name, list) = text.split_once('=').ok_or_else(|| {
        usage(format!(
            "malformed sweep '{text}', expected <param>=<v1,v2,...>"
        ))
    })?;
    let param: SweepParam = name.trim().parse().map_err(|e| usage(format!("{e}")))?;
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| usage(format!("malformed sweep value '{v}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("sweep values must be strictly increasing"));
    }
    for &v in &values {
        param
            .apply(&ScenarioConfig::default(), v)
            .map_err(|e| usage(format!("{e}")))?;
    }
    Ok(Sweep::new(param, values))
}

pub fn parse_algorithms(text: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut algos = Vec::new();
    for id in text.split(',').map(str::trim) {
        let a: Algorithm = id.parse().map_err(|e| usage(format!("{e}")))?;
        if !algos.contains(&a) {
            algos.push(a);
        }
    }
    if algos.is_empty() {
        return Err(usage("--algos must name at least one algorithm"));
    }
    // Fixed output order regardless of how they were listed.
    algos.sort();
    Ok(algos)
}

/// Parses a full argument vector, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<RunSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let is_info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
        CliError::Usage {
            message: e.render().to_string(),
            is_info,
        }
    })?;
    let config = ScenarioConfig {
        m: args.m,
        n: args.n,
        k: args.k,
        t: args.t,
        s: args.s,
        c: args.c,
        snr_db: args.snr_db,
        mu: args.mu,
        max_iter: args.max_iter,
        trials: args.trials,
        seed: args.seed,
    };
    config.validate().map_err(|e| usage(format!("{e}")))?;
    if config.max_iter == 0 {
        return Err(usage("--max-iter must be at least 1"));
    }
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let sweep = match &args.sweep {
        Some(text) => parse_sweep(text)?,
        None => Sweep::single(&config),
    };
    Ok(RunSpec {
        config,
        sweep,
        out: args.out,
        verbose: args.verbose,
        algorithms: parse_algorithms(&args.algos)?,
        jobs: args.jobs,
    })
}

/// Writes the report as CSV, one row per (sweep value, algorithm).
pub fn write_csv<W: Write>(report: &ExperimentReport, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for point in &report.points {
        let trials = if report.sweep_param == SweepParam::Trials {
            point.value as usize
        } else {
            report.config.trials
        };
        for &alg in &report.algorithms {
            let (mean, invalid) = match point.get(alg) {
                Some(s) => (s.mean_loss_db, s.invalid_count),
                None => (f64::NAN, trials),
            };
            writeln!(
                w,
                "{},{:.6},{},{:.6},{},{},{}",
                report.sweep_param.name(),
                point.value,
                alg.id(),
                mean,
                trials,
                invalid,
                report.seed()
            )?;
        }
    }
    w.flush()
}

pub fn emit_csv(report: &ExperimentReport, path: Option<&std::path::Path>) -> io::Result<()> {
    match path {
        Some(p) => write_csv(report, BufWriter::new(File::create(p)?)),
        None => write_csv(report, io::stdout().lock()),
    }
}

fn describe_trial(point: usize, trial: usize, outcome: &TrialOutcome) -> String {
    let mut line = format!("point {point} trial {trial} seed {:#018x}", outcome.seed);
    for o in &outcome.outcomes {
        match (&o.error, o.mean_loss_db) {
            (Some(e), _) => line.push_str(&format!(" | {}: error ({e})", o.algorithm)),
            (None, Some(m)) => line.push_str(&format!(
                " | {}: {m:.3} dB, {} it{}",
                o.algorithm,
                o.iterations,
                if o.consistent { ", consistent" } else { "" }
            )),
            (None, None) => line.push_str(&format!(" | {}: no finite loss", o.algorithm)),
        }
    }
    line
}

/// Executes a parsed run. Returns whether every requested point produced a
/// valid row for every algorithm.
pub fn execute(spec: &RunSpec) -> Result<bool, CliError> {
    let verbose = spec.verbose;
    let report = run_experiment_with(
        &spec.config,
        &spec.sweep,
        &spec.algorithms,
        spec.jobs,
        |p, i, outcome| {
            if verbose {
                eprintln!("{}", describe_trial(p, i, outcome));
            }
        },
    )
    .map_err(|e| usage(format!("{e}")))?;
    for point in &report.points {
        if let Some(e) = &point.error {
            eprintln!("{}={}: skipped ({e})", report.sweep_param, point.value);
        }
    }
    emit_csv(&report, spec.out.as_deref()).map_err(CliError::Io)?;
    Ok(report.is_complete())
}
