//! Exact conditional-mean shrinkage.
//!
//! Given the row energy `r² = ‖ỹᵢ‖²`, the posterior of `u = a²` is
//! proportional to
//!
//! `u^{M₁−1} e^{−u} (cu + σ²)^{−M} exp(−r² / (cu + σ²))`
//!
//! and the estimate is `E[cu/(cu + σ²) | ỹᵢ] · ỹᵢ`.

use crate::channel::PathLossProfile;
use crate::error::{domain, Result};
use crate::specfun::{integrate_half_line, QuadratureSpec};

use super::{check_profile, check_scale, EstimatorKind, EstimatorOutput, PilotBlock};

const MODE_GRID: usize = 160;

/// Posterior-mean shrink weight for one row with energy `row_energy`.
pub fn posterior_weight(
    num_irs_elements: usize,
    num_bs_antennas: usize,
    channel_scale: f64,
    noise_variance: f64,
    row_energy: f64,
) -> Result<f64> {
    if num_irs_elements < 1 || num_bs_antennas < 1 {
        return Err(domain("posterior_weight", "M1 and M must be >= 1"));
    }
    check_scale("posterior_weight", channel_scale)?;
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(domain("posterior_weight", format!("bad noise variance {noise_variance}")));
    }
    if !(row_energy >= 0.0 && row_energy.is_finite()) {
        return Err(domain("posterior_weight", format!("bad row energy {row_energy}")));
    }
    if channel_scale == 0.0 {
        return Ok(0.0);
    }
    if noise_variance == 0.0 {
        return Ok(1.0);
    }
    let m1 = num_irs_elements as f64;
    let m = num_bs_antennas as f64;
    let z = noise_variance / channel_scale;
    let rho = row_energy / noise_variance;
    // q = 1 + u/z, computed so that it stays accurate when z is huge
    let log_kernel = |u: f64| {
        let lq = (u / z).ln_1p();
        (m1 - 1.0) * u.ln() - u - m * lq - rho * (-lq).exp()
    };

    let hi = 1e3 + 10.0 * m1 + 4.0 * rho * m1;
    let peak = (0..MODE_GRID)
        .map(|k| {
            let u = 1e-12 * (hi / 1e-12).powf(k as f64 / (MODE_GRID - 1) as f64);
            log_kernel(u)
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let spec = QuadratureSpec::default().with_relative_tolerance(1e-9);
    let mass = integrate_half_line(|u| (log_kernel(u) - peak).exp(), &spec)?.value;
    let first = integrate_half_line(|u| (log_kernel(u) - peak).exp() * (u / (u + z)), &spec)?.value;
    if !(mass > 0.0) {
        return Err(domain("posterior_weight", "posterior mass underflowed"));
    }
    Ok((first / mass).clamp(0.0, 1.0))
}

/// Row-wise posterior-mean estimate.
pub fn posterior_estimate(
    block: &PilotBlock,
    profile: &PathLossProfile,
    amplitude: f64,
    num_irs_elements: usize,
) -> Result<EstimatorOutput> {
    check_profile(block, profile)?;
    let m = block.observation.ncols();
    let weights = profile
        .channel_scales(amplitude)
        .into_iter()
        .zip(block.observation.rows())
        .map(|(c, row)| {
            let energy = row.iter().map(|y| y.norm_sqr()).sum();
            posterior_weight(num_irs_elements, m, c, block.noise_variance, energy)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimatorOutput::shrink(
        &block.observation,
        weights,
        EstimatorKind::Posterior,
    ))
}
