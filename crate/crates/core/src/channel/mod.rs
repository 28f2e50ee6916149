//! System geometry, path loss, and synthesis of the equivalent BS→user channel.
//!
//! The channel is `G = diag(√β₁) H₁ V √β₂ H₂` with `V = v·diag(e^{jθ})`.
//! It can be drawn either by forming that product explicitly or through its
//! Gaussian scale mixture representation `gᵢ = aᵢ v √(β₁,ᵢβ₂) xᵢ`,
//! `aᵢ² ~ Gamma(M₁, 1)`. Both constructions have the same row marginals.

mod config;

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

pub use config::{snr_db_to_noise_variance, SystemConfig};

use crate::error::{domain, Result};
use crate::rng::complex_normal;
use crate::Complex64;

/// Per-user and BS-side linear power gains.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossProfile {
    pub beta1: Vec<f64>,
    pub beta2: f64,
    /// Empty in normalized units.
    pub user_distances: Vec<f64>,
}

impl PathLossProfile {
    /// All gains equal to one.
    pub fn normalized(num_users: usize) -> Self {
        Self {
            beta1: vec![1.0; num_users],
            beta2: 1.0,
            user_distances: Vec::new(),
        }
    }

    /// Gains for users at the given distances from the IRS.
    pub fn from_distances(config: &SystemConfig, user_distances: Vec<f64>) -> Result<Self> {
        let beta1 = user_distances
            .iter()
            .map(|&d| {
                path_loss_db(
                    d,
                    config.ref_distance_irs_user,
                    config.ref_loss_irs_user,
                    config.exponent_irs_user,
                )
                .map(path_loss_linear)
            })
            .collect::<Result<Vec<_>>>()?;
        let beta2 = path_loss_linear(path_loss_db(
            config.bs_irs_distance,
            config.ref_distance_bs_irs,
            config.ref_loss_bs_irs,
            config.exponent_bs_irs,
        )?);
        Ok(Self {
            beta1,
            beta2,
            user_distances,
        })
    }

    /// Normalized profile, or a fresh user drop when the config is physical.
    pub fn draw<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<Self> {
        if config.normalized {
            Ok(Self::normalized(config.num_users))
        } else {
            Self::from_distances(config, sample_user_positions(config, rng))
        }
    }

    pub fn num_users(&self) -> usize {
        self.beta1.len()
    }

    /// `β₁,ᵢ β₂ v²` for every user.
    pub fn channel_scales(&self, amplitude: f64) -> Vec<f64> {
        self.beta1
            .iter()
            .map(|b1| b1 * self.beta2 * amplitude * amplitude)
            .collect()
    }
}

/// IRS-to-user distances, uniform over the annulus area between
/// `min_user_distance` and `cell_radius` (density ∝ d).
pub fn sample_user_positions<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<f64> {
    let r2_min = config.min_user_distance * config.min_user_distance;
    let r2_max = config.cell_radius * config.cell_radius;
    (0..config.num_users)
        .map(|_| {
            let u: f64 = rng.random();
            (r2_min + u * (r2_max - r2_min)).sqrt()
        })
        .collect()
}

/// Log-distance path loss in dB: `loss_ref + 10·exponent·log₁₀(d/d_ref)`.
pub fn path_loss_db(distance: f64, ref_distance: f64, ref_loss: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0 && ref_distance > 0.0) || !distance.is_finite() || !ref_distance.is_finite()
    {
        return Err(domain(
            "path_loss_db",
            format!("distances must be positive, got d={distance}, d_ref={ref_distance}"),
        ));
    }
    Ok(ref_loss + 10.0 * exponent * (distance / ref_distance).log10())
}

/// A positive dB loss as a linear power gain, `10^(−loss/10)`.
pub fn path_loss_linear(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// One draw of the small-scale fading, IRS phases, and resulting channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// IRS → users, `N × M₁`.
    pub h1: Array2<Complex64>,
    /// BS → IRS, `M₁ × M`.
    pub h2: Array2<Complex64>,
    pub theta: Array1<f64>,
    /// Equivalent channel, `N × M`.
    pub g: Array2<Complex64>,
}

impl ChannelRealization {
    /// Forms `diag(√β₁) H₁ V √β₂ H₂` with `V = v·diag(e^{jθ})`.
    pub fn compose(
        h1: Array2<Complex64>,
        h2: Array2<Complex64>,
        theta: Array1<f64>,
        profile: &PathLossProfile,
        amplitude: f64,
    ) -> Self {
        let mut reflected = h1.clone();
        for (mut col, &t) in reflected.columns_mut().into_iter().zip(theta.iter()) {
            let phase = Complex64::from_polar(amplitude, t);
            col.mapv_inplace(|h| h * phase);
        }
        let mut g = reflected.dot(&h2);
        for (mut row, &b1) in g.rows_mut().into_iter().zip(&profile.beta1) {
            let s = (b1 * profile.beta2).sqrt();
            row.mapv_inplace(|x| x * s);
        }
        Self { h1, h2, theta, g }
    }

    /// `‖h₁,ᵢ‖` per user: the scale factor of row `i` in its Gaussian
    /// scale-mixture form, since `gᵢ | h₁,ᵢ ~ CN(0, β₁,ᵢβ₂v²‖h₁,ᵢ‖² I)`.
    pub fn scale_factors(&self) -> Vec<f64> {
        self.h1
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<Complex64> {
    Array2::from_shape_simple_fn((rows, cols), || complex_normal(rng, 1.0))
}

/// Draws `H₁`, `H₂` (i.i.d. `CN(0,1)`) and `θ` (uniform on `[0, 2π)`), then forms `G`.
pub fn synthesize_channel<R: Rng + ?Sized>(
    config: &SystemConfig,
    profile: &PathLossProfile,
    rng: &mut R,
) -> ChannelRealization {
    debug_assert_eq!(profile.num_users(), config.num_users);
    let (n, m1, m) = (
        config.num_users,
        config.num_irs_elements,
        config.num_bs_antennas,
    );
    let h1 = complex_gaussian_matrix(rng, n, m1);
    let h2 = complex_gaussian_matrix(rng, m1, m);
    let theta = Array1::from_shape_simple_fn(m1, || rng.random::<f64>() * TAU);
    ChannelRealization::compose(h1, h2, theta, profile, config.scattering_amplitude)
}

/// A channel drawn through its Gaussian scale mixture form.
#[derive(Debug, Clone, PartialEq)]
pub struct GsmRealization {
    /// Per-user scale, `aᵢ² ~ Gamma(M₁, 1)`.
    pub a: Array1<f64>,
    pub x: Array2<Complex64>,
    pub g: Array2<Complex64>,
}

pub fn synthesize_gsm<R: Rng + ?Sized>(
    config: &SystemConfig,
    profile: &PathLossProfile,
    rng: &mut R,
) -> GsmRealization {
    debug_assert_eq!(profile.num_users(), config.num_users);
    let (n, m) = (config.num_users, config.num_bs_antennas);
    let gamma = Gamma::new(config.num_irs_elements as f64, 1.0).expect("shape >= 1");
    let a = Array1::from_shape_simple_fn(n, || gamma.sample(rng).sqrt());
    let x = complex_gaussian_matrix(rng, n, m);
    let v = config.scattering_amplitude;
    let mut g = x.clone();
    for ((mut row, &ai), &b1) in g.rows_mut().into_iter().zip(a.iter()).zip(&profile.beta1) {
        let s = ai * v * (b1 * profile.beta2).sqrt();
        row.mapv_inplace(|z| z * s);
    }
    GsmRealization { a, x, g }
}
