//! Pilot model, shrinkage estimators of the equivalent channel, and their
//! analytic mean-square-error bounds.
//!
//! With unitary pilots the decorrelated observation is `Ỹ = G + Φ̃`. Every
//! estimator here is row-wise scalar shrinkage `ĝᵢ = wᵢ ỹᵢ`:
//!
//! | kind          | weight `wᵢ`                                   |
//! |---------------|-----------------------------------------------|
//! | `Conditional` | `c aᵢ² / (c aᵢ² + σ²)` for a known scale `aᵢ` |
//! | `Mmse`        | `M₁ z^{M₁} Γ(−M₁, z) e^{z}`, `z = σ²/c`      |
//! | `Asymptotic`  | `M₁c / (M₁c + σ²)`                            |
//! | `Posterior`   | `E[c a² / (c a² + σ²) | ỹᵢ]`                  |
//!
//! where `c = β₁,ᵢβ₂v²`. The `Mmse` weight is the conditional weight
//! averaged over the scale prior `p_A`; `Posterior` averages it over the
//! scale posterior instead and is the exact conditional mean.

mod posterior;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;

pub use posterior::{posterior_estimate, posterior_weight};

use crate::channel::PathLossProfile;
use crate::error::{domain, Error, Result};
use crate::rng::complex_normal;
use crate::specfun::log_scaled_upper_gamma;
use crate::Complex64;

/// Above `z > ASYMPTOTIC_Z · M₁` the weight is taken from its two-term
/// large-`z` expansion.
const ASYMPTOTIC_Z: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotMode {
    /// Unitary DFT pilot matrix; `Y = PG + Φ`, `Ỹ = Pᴴ Y`.
    Dft,
    /// `P = I`; draws `Ỹ = G + Φ̃` directly. Statistically identical.
    #[default]
    Shortcut,
}

/// Received pilots and their decorrelated form.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    pub pilot: Array2<Complex64>,
    pub received: Array2<Complex64>,
    pub observation: Array2<Complex64>,
    pub noise_variance: f64,
}

impl PilotBlock {
    pub fn num_users(&self) -> usize {
        self.observation.nrows()
    }
}

/// Unitary `N × N` DFT matrix.
pub fn dft_matrix(n: usize) -> Array2<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(j, k)| {
        Complex64::from_polar(s, -TAU * ((j * k) % n) as f64 / n as f64)
    })
}

pub fn build_pilot_block<R: Rng + ?Sized>(
    g: &Array2<Complex64>,
    noise_variance: f64,
    mode: PilotMode,
    rng: &mut R,
) -> Result<PilotBlock> {
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(domain(
            "build_pilot_block",
            format!("noise variance must be finite and >= 0, got {noise_variance}"),
        ));
    }
    let (n, m) = g.dim();
    let noise = Array2::from_shape_simple_fn((n, m), || complex_normal(rng, noise_variance));
    Ok(match mode {
        PilotMode::Dft => {
            let pilot = dft_matrix(n);
            let received = pilot.dot(g) + &noise;
            let observation = pilot.t().mapv(|p| p.conj()).dot(&received);
            PilotBlock {
                pilot,
                received,
                observation,
                noise_variance,
            }
        }
        PilotMode::Shortcut => {
            let received = g + &noise;
            PilotBlock {
                pilot: Array2::eye(n),
                observation: received.clone(),
                received,
                noise_variance,
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Conditional,
    Mmse,
    Asymptotic,
    Posterior,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Conditional,
        EstimatorKind::Mmse,
        EstimatorKind::Asymptotic,
        EstimatorKind::Posterior,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Conditional => "conditional",
            EstimatorKind::Mmse => "mmse",
            EstimatorKind::Asymptotic => "asymptotic",
            EstimatorKind::Posterior => "posterior",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutput {
    pub estimate: Array2<Complex64>,
    pub weights: Vec<f64>,
    pub kind: EstimatorKind,
}

impl EstimatorOutput {
    /// Row `i` of the estimate is `weights[i]` times row `i` of `observation`.
    pub fn shrink(observation: &Array2<Complex64>, weights: Vec<f64>, kind: EstimatorKind) -> Self {
        let mut estimate = observation.clone();
        for (mut row, &w) in estimate.rows_mut().into_iter().zip(&weights) {
            row.mapv_inplace(|y| y * w);
        }
        Self {
            estimate,
            weights,
            kind,
        }
    }
}

fn check_profile(block: &PilotBlock, profile: &PathLossProfile) -> Result<()> {
    if profile.num_users() != block.num_users() {
        return Err(Error::Shape {
            expected: (block.num_users(), 1),
            actual: (profile.num_users(), 1),
        });
    }
    Ok(())
}

fn check_scale(func: &'static str, c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(domain(func, format!("channel scale must be finite and >= 0, got {c}")));
    }
    Ok(())
}

/// Wiener weight `s / (s + σ²)` for signal power `s`, with `0/0 → 0`.
fn wiener(signal: f64, noise_variance: f64) -> f64 {
    if signal == 0.0 {
        0.0
    } else {
        signal / (signal + noise_variance)
    }
}

/// Shrinkage given the per-user scales `a`.
pub fn conditional_mmse(
    block: &PilotBlock,
    profile: &PathLossProfile,
    amplitude: f64,
    a: &[f64],
) -> Result<EstimatorOutput> {
    check_profile(block, profile)?;
    if a.len() != block.num_users() {
        return Err(Error::Shape {
            expected: (block.num_users(), 1),
            actual: (a.len(), 1),
        });
    }
    let weights = profile
        .channel_scales(amplitude)
        .iter()
        .zip(a)
        .map(|(&c, &ai)| {
            check_scale("conditional_mmse", c)?;
            if !(ai >= 0.0 && ai.is_finite()) {
                return Err(domain("conditional_mmse", format!("scale must be >= 0, got {ai}")));
            }
            Ok(wiener(c * ai * ai, block.noise_variance))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimatorOutput::shrink(
        &block.observation,
        weights,
        EstimatorKind::Conditional,
    ))
}

/// Prior-averaged shrink weight `∫ c a²/(c a² + σ²) p_A(a) da`
/// `= M₁ z^{M₁} Γ(−M₁, z) e^{z}` with `z = σ²/c`.
pub fn mmse_weight(num_irs_elements: usize, channel_scale: f64, noise_variance: f64) -> Result<f64> {
    if num_irs_elements < 1 {
        return Err(domain("mmse_weight", "M1 must be >= 1"));
    }
    if !(channel_scale > 0.0 && channel_scale.is_finite()) {
        return Err(domain(
            "mmse_weight",
            format!("channel scale must be finite and > 0, got {channel_scale}"),
        ));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(domain(
            "mmse_weight",
            format!("noise variance must be finite and >= 0, got {noise_variance}"),
        ));
    }
    if noise_variance == 0.0 {
        return Ok(1.0);
    }
    let m1 = num_irs_elements as f64;
    let z = noise_variance / channel_scale;
    if !z.is_finite() {
        return Err(domain("mmse_weight", "noise-to-channel ratio overflows"));
    }
    let w = if z > ASYMPTOTIC_Z * m1 {
        m1 / z * (1.0 - (m1 + 1.0) / z)
    } else {
        m1 * log_scaled_upper_gamma(-m1, z)?.exp()
    };
    Ok(w.min(1.0))
}

/// Per-user weight, with a zero channel mapping to a zero weight.
fn mmse_weight_or_zero(m1: usize, c: f64, noise_variance: f64) -> Result<f64> {
    check_scale("mmse_estimate", c)?;
    if c == 0.0 {
        Ok(0.0)
    } else {
        mmse_weight(m1, c, noise_variance)
    }
}

/// Channel estimate with prior-averaged weights.
pub fn mmse_estimate(
    block: &PilotBlock,
    profile: &PathLossProfile,
    amplitude: f64,
    num_irs_elements: usize,
) -> Result<EstimatorOutput> {
    check_profile(block, profile)?;
    let weights = profile
        .channel_scales(amplitude)
        .into_iter()
        .map(|c| mmse_weight_or_zero(num_irs_elements, c, block.noise_variance))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimatorOutput::shrink(&block.observation, weights, EstimatorKind::Mmse))
}

/// Linear MMSE under the Gaussian approximation `gᵢ ~ CN(0, M₁c I)`.
pub fn asymptotic_estimate(
    block: &PilotBlock,
    profile: &PathLossProfile,
    amplitude: f64,
    num_irs_elements: usize,
) -> Result<EstimatorOutput> {
    check_profile(block, profile)?;
    let m1 = num_irs_elements as f64;
    let weights = profile
        .channel_scales(amplitude)
        .into_iter()
        .map(|c| {
            check_scale("asymptotic_estimate", c)?;
            Ok(wiener(m1 * c, block.noise_variance))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimatorOutput::shrink(
        &block.observation,
        weights,
        EstimatorKind::Asymptotic,
    ))
}

/// Per-coefficient MSE bounds and their user averages.
#[derive(Debug, Clone, PartialEq)]
pub struct MseBounds {
    pub per_user_lower: Vec<f64>,
    pub per_user_upper: Vec<f64>,
    pub aggregate_lower: f64,
    pub aggregate_upper: f64,
    /// MSE of the asymptotic estimator; equals `aggregate_upper`.
    pub aggregate_asymptotic: f64,
}

/// Lower bound `σ² · w_mmse` (the average MSE of the scale-aware
/// estimator) and upper bound `M₁cσ²/(M₁c + σ²)` (the linear MMSE), per user.
pub fn mse_bounds(
    profile: &PathLossProfile,
    amplitude: f64,
    num_irs_elements: usize,
    noise_variance: f64,
) -> Result<MseBounds> {
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(domain(
            "mse_bounds",
            format!("noise variance must be finite and >= 0, got {noise_variance}"),
        ));
    }
    let m1 = num_irs_elements as f64;
    let scales = profile.channel_scales(amplitude);
    let per_user_lower = scales
        .iter()
        .map(|&c| Ok(noise_variance * mmse_weight_or_zero(num_irs_elements, c, noise_variance)?))
        .collect::<Result<Vec<_>>>()?;
    let per_user_upper: Vec<f64> = scales
        .iter()
        .map(|&c| noise_variance * wiener(m1 * c, noise_variance))
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let aggregate_lower = mean(&per_user_lower);
    let aggregate_upper = mean(&per_user_upper);
    Ok(MseBounds {
        per_user_lower,
        per_user_upper,
        aggregate_lower,
        aggregate_upper,
        aggregate_asymptotic: aggregate_upper,
    })
}

/// Expected per-coefficient MSE of a fixed row weight `w` applied to
/// `ỹ = g + φ` with `E|g|² = M₁c`: `(1 − w)² M₁c + w² σ²`.
pub fn linear_weight_mse(weight: f64, num_irs_elements: usize, channel_scale: f64, noise_variance: f64) -> f64 {
    let p = num_irs_elements as f64 * channel_scale;
    (1.0 - weight).powi(2) * p + weight * weight * noise_variance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use approx::assert_relative_eq;

    fn unit_profile(n: usize) -> PathLossProfile {
        PathLossProfile::normalized(n)
    }

    fn block(n: usize, m: usize, noise_variance: f64, seed: u64) -> PilotBlock {
        let mut rng = stream(seed, 0, 0, Purpose::Noise);
        let g = Array2::from_shape_simple_fn((n, m), || complex_normal(&mut rng, 1.0));
        build_pilot_block(&g, noise_variance, PilotMode::Shortcut, &mut rng).unwrap()
    }

    #[test]
    fn dft_pilot_is_unitary() {
        for n in [1, 2, 5, 20] {
            let p = dft_matrix(n);
            let gram = p.t().mapv(|x| x.conj()).dot(&p);
            for ((i, j), v) in gram.indexed_iter() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v - target).norm() < 1e-12, "n={n}");
            }
        }
        assert_eq!(dft_matrix(1)[[0, 0]], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn noiseless_dft_recovers_channel() {
        let mut rng = stream(3, 0, 0, Purpose::Channel);
        let g = Array2::from_shape_simple_fn((6, 4), || complex_normal(&mut rng, 1.0));
        let b = build_pilot_block(&g, 0.0, PilotMode::Dft, &mut rng).unwrap();
        for (a, e) in b.observation.iter().zip(g.iter()) {
            assert!((a - e).norm() < 1e-13);
        }
        assert!(build_pilot_block(&g, -1.0, PilotMode::Dft, &mut rng).is_err());
    }

    #[test]
    fn single_user_pilot_is_trivial() {
        let mut rng = stream(3, 0, 1, Purpose::Noise);
        let g = Array2::from_elem((1, 3), Complex64::new(0.5, -0.5));
        let b = build_pilot_block(&g, 1.0, PilotMode::Dft, &mut rng).unwrap();
        assert_eq!(b.pilot[[0, 0]], Complex64::new(1.0, 0.0));
        for (y, yt) in b.received.iter().zip(b.observation.iter()) {
            assert!((y - yt).norm() < 1e-15);
        }
    }

    #[test]
    fn conditional_weights() {
        let b = block(3, 2, 0.0, 1);
        let out = conditional_mmse(&b, &unit_profile(3), 1.0, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(out.weights, vec![1.0; 3]);
        assert_eq!(out.estimate, b.observation);

        let b = block(2, 2, 4.0, 2);
        let out = conditional_mmse(&b, &unit_profile(2), 1.0, &[2.0, 0.0]).unwrap();
        assert_relative_eq!(out.weights[0], 0.5);
        assert_eq!(out.weights[1], 0.0);
        assert!(out.estimate.row(1).iter().all(|z| z.norm() == 0.0));
        assert!(conditional_mmse(&b, &unit_profile(2), 1.0, &[1.0]).is_err());
    }

    #[test]
    fn mmse_weight_anchors() {
        assert_eq!(mmse_weight(3, 1.0, 0.0).unwrap(), 1.0);
        // e·Γ(−1, 1), mpmath
        assert_relative_eq!(mmse_weight(1, 1.0, 1.0).unwrap(), 0.403_652_637_676_805_9, max_relative = 1e-13);
        let w10 = mmse_weight(10, 1.0, 1.0).unwrap();
        assert!(w10 > 0.85 && w10 < 10.0 / 11.0, "{w10}");
        assert!(mmse_weight(3, 0.0, 1.0).is_err());
        assert!(mmse_weight(3, -1.0, 1.0).is_err());
        assert!(mmse_weight(3, 1.0, -1.0).is_err());
        assert!(mmse_weight(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mmse_weight_large_z_branch_is_continuous() {
        for m1 in [1usize, 10, 64] {
            let z_switch = ASYMPTOTIC_Z * m1 as f64;
            let below = mmse_weight(m1, 1.0, z_switch * 0.999_999).unwrap();
            let above = mmse_weight(m1, 1.0, z_switch * 1.000_001).unwrap();
            assert_relative_eq!(below, above, max_relative = 1e-5);
            // physical magnitudes: c ~ 1e-17, σ² = 1
            let w = mmse_weight(m1, 2.5e-17, 1.0).unwrap();
            assert_relative_eq!(w, m1 as f64 * 2.5e-17, max_relative = 1e-12);
        }
    }

    #[test]
    fn estimators_zero_channel_and_noiseless() {
        let b = block(2, 3, 1.0, 5);
        let out = mmse_estimate(&b, &unit_profile(2), 0.0, 4).unwrap();
        assert_eq!(out.weights, vec![0.0, 0.0]);
        assert!(out.estimate.iter().all(|z| z.norm() == 0.0));
        let out = asymptotic_estimate(&b, &unit_profile(2), 0.0, 4).unwrap();
        assert_eq!(out.weights, vec![0.0, 0.0]);

        let b = block(2, 3, 0.0, 6);
        assert_eq!(mmse_estimate(&b, &unit_profile(2), 1.0, 4).unwrap().estimate, b.observation);
        assert_eq!(asymptotic_estimate(&b, &unit_profile(2), 1.0, 4).unwrap().weights, vec![1.0; 2]);
    }

    #[test]
    fn mmse_estimate_single_user() {
        let b = block(1, 2, 1.0, 7);
        let out = mmse_estimate(&b, &unit_profile(1), 1.0, 1).unwrap();
        for (e, y) in out.estimate.iter().zip(b.observation.iter()) {
            assert!((e - y * 0.403_652_637_676_805_9).norm() < 1e-13 * y.norm());
        }
        assert_eq!(out.kind, EstimatorKind::Mmse);
    }

    #[test]
    fn asymptotic_weights() {
        let b = block(1, 1, 1.0, 8);
        let out = asymptotic_estimate(&b, &unit_profile(1), 1.0, 10).unwrap();
        assert_relative_eq!(out.weights[0], 10.0 / 11.0);
        let mut prev = 0.0;
        for m1 in 1..200 {
            let w = asymptotic_estimate(&b, &unit_profile(1), 1.0, m1).unwrap().weights[0];
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn bounds_anchors() {
        let p = unit_profile(1);
        let b = mse_bounds(&p, 1.0, 1, 1.0).unwrap();
        assert_relative_eq!(b.aggregate_lower, 0.403_652_637_676_805_9, max_relative = 1e-13);
        assert_eq!(b.aggregate_upper, 0.5);
        assert_eq!(b.aggregate_asymptotic, b.aggregate_upper);

        let b = mse_bounds(&p, 1.0, 5, 0.0).unwrap();
        assert_eq!((b.aggregate_lower, b.aggregate_upper), (0.0, 0.0));

        let b = mse_bounds(&p, 1.0, 10, 1.0).unwrap();
        assert_relative_eq!(b.aggregate_upper, 10.0 / 11.0);
        assert!(b.aggregate_lower > 0.85 && b.aggregate_lower < 10.0 / 11.0);

        let b = mse_bounds(&p, 0.0, 10, 1.0).unwrap();
        assert_eq!((b.aggregate_lower, b.aggregate_upper), (0.0, 0.0));
    }

    #[test]
    fn bounds_average_over_users() {
        let p = PathLossProfile {
            beta1: vec![0.5, 1.0, 4.0],
            beta2: 1.0,
            user_distances: vec![],
        };
        let b = mse_bounds(&p, 1.0, 3, 0.7).unwrap();
        for (lo, hi) in b.per_user_lower.iter().zip(&b.per_user_upper) {
            assert!(lo < hi);
        }
        assert_relative_eq!(b.aggregate_upper, b.per_user_upper.iter().sum::<f64>() / 3.0);
        assert_relative_eq!(b.aggregate_lower, b.per_user_lower.iter().sum::<f64>() / 3.0);
    }

    #[test]
    fn prior_averaged_weight_is_worse_than_linear_mmse_as_a_linear_rule() {
        // Both are fixed row weights; the LMMSE weight minimizes the quadratic.
        for m1 in [1usize, 2, 4, 8, 16] {
            let w = mmse_weight(m1, 1.0, 1.0).unwrap();
            let mse = linear_weight_mse(w, m1, 1.0, 1.0);
            let upper = mse_bounds(&unit_profile(1), 1.0, m1, 1.0).unwrap().aggregate_upper;
            assert!(mse > upper, "m1={m1}");
            assert_relative_eq!(linear_weight_mse(m1 as f64 / (m1 as f64 + 1.0), m1, 1.0, 1.0), upper, max_relative = 1e-14);
        }
    }

    #[test]
    fn kind_parses() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.as_str().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("bayes".parse::<EstimatorKind>().is_err());
    }
}
