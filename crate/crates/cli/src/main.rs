use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use irs_mmse::channel::SystemConfig;
use irs_mmse::csv::{write_rows, CsvRow};
use irs_mmse::estimator::{EstimatorKind, PilotMode};
use irs_mmse::mc::{run_point_with, run_sweep_with, Axis, Execution, PointOptions, SweepSpec};
use irs_mmse::validate;

const SEED_ENV: &str = "IRS_MMSE_SEED";

#[derive(Parser)]
#[command(name = "irs-mmse", version, about = "Monte Carlo study of MMSE channel estimation through an IRS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter and write one CSV row per value.
    Sweep(SweepArgs),
    /// Run a single configuration.
    Point(PointArgs),
    /// Check the numerical kernels against quadrature oracles.
    Validate {
        /// Reduced grids.
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    M1,
    Snr,
    V,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::M1 => Axis::IrsElements,
            AxisArg::Snr => Axis::SnrDb,
            AxisArg::V => Axis::Amplitude,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Mmse,
    Asymptotic,
    Conditional,
    Posterior,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Mmse => EstimatorKind::Mmse,
            EstimatorArg::Asymptotic => EstimatorKind::Asymptotic,
            EstimatorArg::Conditional => EstimatorKind::Conditional,
            EstimatorArg::Posterior => EstimatorKind::Posterior,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PilotArg {
    Shortcut,
    Dft,
}

#[derive(Args)]
struct Common {
    /// JSON system config; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Unit path gains, so the channel scale is v².
    #[arg(long)]
    normalized: bool,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Master seed; overrides $IRS_MMSE_SEED and the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "mmse")]
    estimator: EstimatorArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on worker threads. Does not change results.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Draw new user positions every trial.
    #[arg(long)]
    resample_geometry: bool,
    #[arg(long, value_enum, default_value = "shortcut")]
    pilot: PilotArg,
    /// Number of BS antennas.
    #[arg(long)]
    antennas: Option<usize>,
    /// Number of users.
    #[arg(long)]
    users: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Comma list (1,2,4) or inclusive range start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    /// IRS elements when not swept.
    #[arg(long)]
    m1: Option<usize>,
    /// SNR in dB when not swept.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<f64>,
    /// Scattering amplitude when not swept.
    #[arg(long)]
    v: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[command(flatten)]
    common: Common,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number '{s}' in --values"))
    };
    match parts.len() {
        1 => text.split(',').map(num).collect(),
        3 => {
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                return Err(format!("bad range '{text}': need start <= stop and step > 0"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // keep 0.1:1:0.1 on clean decimals
            Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => Err(format!("bad --values '{text}'")),
    }
}

fn base_config(
    common: &Common,
    m1: Option<usize>,
    snr: Option<f64>,
    v: Option<f64>,
) -> Result<SystemConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => SystemConfig::load(path).map_err(usage)?,
        None => SystemConfig::default(),
    };
    if let Ok(text) = std::env::var(SEED_ENV) {
        config.master_seed = text
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}='{text}' is not a u64")))?;
    }
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    config.normalized |= common.normalized;
    if let Some(n) = common.antennas {
        config.num_bs_antennas = n;
    }
    if let Some(n) = common.users {
        config.num_users = n;
    }
    if let Some(m1) = m1 {
        config.num_irs_elements = m1;
    }
    if let Some(snr) = snr {
        config.set_snr_db(snr);
    }
    if let Some(v) = v {
        config.scattering_amplitude = v;
    }
    config.validate().map_err(usage)?;
    Ok(config)
}

fn execution(common: &Common) -> Execution {
    Execution::with_workers(common.workers.map(|w| w as usize))
}

fn pilot(common: &Common) -> PilotMode {
    match common.pilot {
        PilotArg::Shortcut => PilotMode::Shortcut,
        PilotArg::Dft => PilotMode::Dft,
    }
}

fn emit(common: &Common, rows: &[CsvRow]) -> Result<(), Failure> {
    let result = match &common.out {
        Some(path) => File::create(path).and_then(|f| write_rows(BufWriter::new(f), rows)),
        None => write_rows(io::stdout().lock(), rows),
    };
    result.map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let common = &args.common;
    let axis: Axis = args.axis.into();
    let spec = SweepSpec {
        axis,
        values: parse_values(&args.values).map_err(Failure::Usage)?,
        trials: common.trials,
        base_config: base_config(common, args.m1, args.snr, args.v)?,
        estimator_kind: common.estimator.into(),
        resample_geometry: common.resample_geometry,
        pilot: pilot(common),
    };
    spec.validate().map_err(usage)?;
    for &v in &spec.values {
        axis.apply(&spec.base_config, v).map_err(usage)?;
    }
    let results = run_sweep_with(&spec, execution(common)).map_err(usage)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(record) => rows.push(CsvRow::from_record(axis.name(), &record)),
            Err(f) => failures.push(f.to_string()),
        }
    }
    emit(common, &rows)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(failures.join("\n")))
    }
}

fn point(args: PointArgs) -> Result<(), Failure> {
    let common = &args.common;
    let config = base_config(common, args.m1, args.snr, args.v)?;
    if common.trials < 2 {
        return Err(Failure::Usage("need at least 2 trials".into()));
    }
    let options = PointOptions {
        resample_geometry: common.resample_geometry,
        pilot: pilot(common),
        point_index: 0,
    };
    let record = run_point_with(&config, common.estimator.into(), common.trials, options, execution(common))
        .map_err(|e| Failure::Numeric(format!("point: {e}")))?;
    emit(common, &[CsvRow::from_record("point", &record)])
}

fn run_validate(fast: bool) -> Result<(), Failure> {
    let checks = validate::run(fast);
    let mut out = io::stdout().lock();
    for c in &checks {
        let _ = writeln!(out, "{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Numeric(format!("{failed} of {} checks failed", checks.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Point(args) => point(args),
        Command::Validate { fast } => run_validate(fast),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
