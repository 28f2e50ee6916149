//! Seeded Monte Carlo harness for the estimation MSE.
//!
//! Each trial draws its randomness from streams keyed by
//! `(master_seed, point, trial, purpose)`, per-trial results are gathered in
//! trial order and summed with compensation, so a run gives the same bits
//! on any number of workers.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::channel::{synthesize_channel, PathLossProfile, SystemConfig};
use crate::error::{domain, Error, Result};
use crate::estimator::{
    asymptotic_estimate, build_pilot_block, conditional_mmse, mmse_estimate, mse_bounds,
    posterior_estimate, EstimatorKind, EstimatorOutput, PilotMode,
};
use crate::rng::{stream, Purpose};
use crate::Complex64;

/// Point index reserved for the shared user drop of fixed-geometry runs.
const FIXED_GEOMETRY_POINT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    IrsElements,
    SnrDb,
    Amplitude,
}

impl Axis {
    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Axis::IrsElements => "m1",
            Axis::SnrDb => "snr",
            Axis::Amplitude => "v",
        }
    }

    /// `config` with this axis set to `value`.
    pub fn apply(self, config: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut out = config.clone();
        match self {
            Axis::IrsElements => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::Config(format!(
                        "M1 must be a positive integer, got {value}"
                    )));
                }
                out.num_irs_elements = value as usize;
            }
            Axis::SnrDb => out.set_snr_db(value),
            Axis::Amplitude => out.scattering_amplitude = value,
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m1" | "irs_elements" => Ok(Axis::IrsElements),
            "snr" | "snr_db" => Ok(Axis::SnrDb),
            "v" | "amplitude" => Ok(Axis::Amplitude),
            _ => Err(Error::Config(format!("unknown axis '{s}'"))),
        }
    }
}

/// How trials of a point are scheduled. Results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over trials; `workers` caps the thread count.
    #[cfg(feature = "parallel")]
    Parallel { workers: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel { workers: None }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Parallel with at most `workers` threads when available, else sequential.
    pub fn with_workers(workers: Option<usize>) -> Self {
        #[cfg(feature = "parallel")]
        {
            if workers == Some(1) {
                Execution::Sequential
            } else {
                Execution::Parallel { workers }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Execution::Sequential
        }
    }

    fn map<T, F>(self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => {
                use rayon::prelude::*;
                let run = || (0..n).into_par_iter().map(&f).collect();
                match workers {
                    None => run(),
                    Some(k) => rayon::ThreadPoolBuilder::new()
                        .num_threads(k.max(1))
                        .build()
                        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
                        .install(run),
                }
            }
        }
    }
}

/// Per-point options beyond the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointOptions {
    /// Draw new user positions every trial instead of once per run.
    pub resample_geometry: bool,
    pub pilot: PilotMode,
    /// Index of the point within its sweep; part of every stream key.
    pub point_index: u64,
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseRecord {
    pub axis_value: f64,
    pub mse_empirical: f64,
    pub mse_stderr: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub mse_asymptotic: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base_config: SystemConfig,
    pub estimator_kind: EstimatorKind,
    pub resample_geometry: bool,
    pub pilot: PilotMode,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::Config("sweep values must be strictly monotone".into()));
        }
        if self.trials < 2 {
            return Err(Error::Config("need at least 2 trials per point".into()));
        }
        self.base_config.validate()
    }
}

/// A sweep point that could not be computed.
#[derive(Debug)]
pub struct PointFailure {
    pub axis_value: f64,
    pub error: Error,
}

impl fmt::Display for PointFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "point {}: {}", self.axis_value, self.error)
    }
}

/// `(1/(N·M)) Σ |ĝ − g|²`.
pub fn empirical_mse(truth: &Array2<Complex64>, estimate: &Array2<Complex64>) -> Result<f64> {
    if truth.dim() != estimate.dim() {
        return Err(Error::Shape {
            expected: truth.dim(),
            actual: estimate.dim(),
        });
    }
    if truth.is_empty() {
        return Err(domain("empirical_mse", "empty channel matrix"));
    }
    let sq = truth.iter().zip(estimate).map(|(g, e)| (e - g).norm_sqr());
    Ok(compensated_sum(sq) / truth.len() as f64)
}

/// Neumaier summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Mean and standard error of the mean.
fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let ss = compensated_sum(xs.iter().map(|x| (x - mean).powi(2)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

struct TrialOutcome {
    mse: f64,
    bounds: Option<(f64, f64)>,
}

fn estimate(
    kind: EstimatorKind,
    config: &SystemConfig,
    profile: &PathLossProfile,
    scales: &[f64],
    block: &crate::estimator::PilotBlock,
) -> Result<EstimatorOutput> {
    let (v, m1) = (config.scattering_amplitude, config.num_irs_elements);
    match kind {
        EstimatorKind::Conditional => conditional_mmse(block, profile, v, scales),
        EstimatorKind::Mmse => mmse_estimate(block, profile, v, m1),
        EstimatorKind::Asymptotic => asymptotic_estimate(block, profile, v, m1),
        EstimatorKind::Posterior => posterior_estimate(block, profile, v, m1),
    }
}

fn point_bounds(config: &SystemConfig, profile: &PathLossProfile) -> Result<(f64, f64)> {
    let b = mse_bounds(
        profile,
        config.scattering_amplitude,
        config.num_irs_elements,
        config.noise_variance(),
    )?;
    Ok((b.aggregate_lower, b.aggregate_upper))
}

/// Monte Carlo estimate of the per-coefficient MSE at one configuration,
/// with default options and scheduling.
pub fn run_point(config: &SystemConfig, kind: EstimatorKind, trials: usize) -> Result<MseRecord> {
    run_point_with(config, kind, trials, PointOptions::default(), Execution::default())
}

pub fn run_point_with(
    config: &SystemConfig,
    kind: EstimatorKind,
    trials: usize,
    options: PointOptions,
    execution: Execution,
) -> Result<MseRecord> {
    if trials < 2 {
        return Err(domain("run_point", "need at least 2 trials"));
    }
    config.validate()?;
    let seed = config.master_seed;
    let noise_variance = config.noise_variance();
    let fixed = if options.resample_geometry {
        None
    } else {
        let mut rng = stream(seed, FIXED_GEOMETRY_POINT, 0, Purpose::Geometry);
        let profile = PathLossProfile::draw(config, &mut rng)?;
        let bounds = point_bounds(config, &profile)?;
        Some((profile, bounds))
    };

    let outcomes = execution.map(trials, |t| {
        let t = t as u64;
        let drawn;
        let profile = match &fixed {
            Some((p, _)) => p,
            None => {
                let mut rng = stream(seed, options.point_index, t, Purpose::Geometry);
                drawn = PathLossProfile::draw(config, &mut rng)?;
                &drawn
            }
        };
        let mut rng = stream(seed, options.point_index, t, Purpose::Channel);
        let channel = synthesize_channel(config, profile, &mut rng);
        let mut rng = stream(seed, options.point_index, t, Purpose::Noise);
        let block = build_pilot_block(&channel.g, noise_variance, options.pilot, &mut rng)?;
        let out = estimate(kind, config, profile, &channel.scale_factors(), &block)?;
        let bounds = match fixed {
            Some(_) => None,
            None => Some(point_bounds(config, profile)?),
        };
        Ok(TrialOutcome {
            mse: empirical_mse(&channel.g, &out.estimate)?,
            bounds,
        })
    })?;

    let mse: Vec<f64> = outcomes.iter().map(|o| o.mse).collect();
    let (mse_empirical, mse_stderr) = mean_and_stderr(&mse);
    let (lower_bound, upper_bound) = match fixed {
        Some((_, b)) => b,
        None => {
            let n = trials as f64;
            let lo = compensated_sum(outcomes.iter().filter_map(|o| o.bounds).map(|b| b.0));
            let hi = compensated_sum(outcomes.iter().filter_map(|o| o.bounds).map(|b| b.1));
            (lo / n, hi / n)
        }
    };
    Ok(MseRecord {
        axis_value: 0.0,
        mse_empirical,
        mse_stderr,
        lower_bound,
        upper_bound,
        mse_asymptotic: upper_bound,
        trials,
        seed,
    })
}

/// One record per axis value, in order. A failed point yields its error and
/// the remaining points still run.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<std::result::Result<MseRecord, PointFailure>>> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(
    spec: &SweepSpec,
    execution: Execution,
) -> Result<Vec<std::result::Result<MseRecord, PointFailure>>> {
    spec.validate()?;
    Ok(spec
        .values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let options = PointOptions {
                resample_geometry: spec.resample_geometry,
                pilot: spec.pilot,
                point_index: i as u64,
            };
            spec.axis
                .apply(&spec.base_config, value)
                .and_then(|cfg| run_point_with(&cfg, spec.estimator_kind, spec.trials, options, execution))
                .map(|r| MseRecord {
                    axis_value: value,
                    ..r
                })
                .map_err(|error| PointFailure {
                    axis_value: value,
                    error,
                })
        })
        .collect())
}
