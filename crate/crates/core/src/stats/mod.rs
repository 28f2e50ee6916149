//! Closed-form laws of the equivalent channel.
//!
//! For composite scale `c = β₁,ᵢβ₂v²`, a single entry `g` of `G` has
//! characteristic function `(1 + c|t|²/4)^{−M₁}` and density
//!
//! ```text
//! p(g) = 2|g|^{M₁−1} / (π Γ(M₁) c^{(M₁+1)/2}) · K_{M₁−1}(2|g|/√c)
//! ```
//!
//! and a full row `gᵢ ∈ ℂ^M` has the isotropic density
//!
//! ```text
//! p(gᵢ) = 2‖gᵢ‖^{M₁−M} / (π^M Γ(M₁) c^{(M+M₁)/2}) · K_{M₁−M}(2‖gᵢ‖/√c).
//! ```
//!
//! All densities are evaluated in log space.

mod cdf;
pub mod gof;

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

pub use cdf::RadialCdf;

use crate::error::{domain, Result};
use crate::rng::complex_normal;
use crate::specfun::{ln_gamma, log_bessel_k};
use crate::Complex64;

/// Law of one row (or entry) of the equivalent channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselKChannelDist {
    num_irs_elements: usize,
    channel_scale: f64,
    num_bs_antennas: usize,
}

impl BesselKChannelDist {
    pub fn new(num_irs_elements: usize, channel_scale: f64, num_bs_antennas: usize) -> Result<Self> {
        if num_irs_elements < 1 || num_bs_antennas < 1 {
            return Err(domain(
                "BesselKChannelDist",
                "element and antenna counts must be >= 1",
            ));
        }
        if !(channel_scale > 0.0 && channel_scale.is_finite()) {
            return Err(domain(
                "BesselKChannelDist",
                format!("channel scale must be finite and > 0, got {channel_scale}"),
            ));
        }
        Ok(Self {
            num_irs_elements,
            channel_scale,
            num_bs_antennas,
        })
    }

    pub fn num_irs_elements(&self) -> usize {
        self.num_irs_elements
    }

    pub fn channel_scale(&self) -> f64 {
        self.channel_scale
    }

    pub fn num_bs_antennas(&self) -> usize {
        self.num_bs_antennas
    }

    /// Characteristic function of one entry at `t = t1 + j·t2`.
    pub fn charfun(&self, t1: f64, t2: f64) -> f64 {
        let base = 1.0 + 0.25 * self.channel_scale * (t1 * t1 + t2 * t2);
        base.powi(-(self.num_irs_elements as i32))
    }

    /// Log density of one entry at `g1 + j·g2`.
    pub fn log_pdf_entry(&self, g1: f64, g2: f64) -> Result<f64> {
        let r = g1.hypot(g2);
        let m1 = self.num_irs_elements as f64;
        let ln_c = self.channel_scale.ln();
        if !r.is_finite() {
            return Err(domain("log_pdf_entry", "non-finite point"));
        }
        if r == 0.0 {
            if self.num_irs_elements == 1 {
                return Err(domain(
                    "log_pdf_entry",
                    "density is singular at the origin when M1 = 1",
                ));
            }
            // lim r→0 of the density is 1 / (π c (M₁ − 1)).
            return Ok(-PI.ln() - ln_c - (m1 - 1.0).ln());
        }
        let x = 2.0 * r / self.channel_scale.sqrt();
        Ok(LN_2 + (m1 - 1.0) * r.ln() - PI.ln() - ln_gamma(m1) - 0.5 * (m1 + 1.0) * ln_c
            + log_bessel_k(m1 - 1.0, x)?)
    }

    /// Log density of a full row at any point with `‖gᵢ‖ = row_norm`.
    pub fn log_pdf_row(&self, row_norm: f64) -> Result<f64> {
        if !(row_norm > 0.0 && row_norm.is_finite()) {
            return Err(domain(
                "log_pdf_row",
                format!("row norm must be finite and > 0, got {row_norm}"),
            ));
        }
        let m1 = self.num_irs_elements as f64;
        let m = self.num_bs_antennas as f64;
        let x = 2.0 * row_norm / self.channel_scale.sqrt();
        Ok(LN_2 + (m1 - m) * row_norm.ln()
            - m * PI.ln()
            - ln_gamma(m1)
            - 0.5 * (m + m1) * self.channel_scale.ln()
            + log_bessel_k(m1 - m, x)?)
    }

    /// Density of `|g|` for one entry (polar reduction of the entry density).
    pub fn entry_radial_density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        2.0 * PI * r * self.log_pdf_entry(r, 0.0).map_or(0.0, f64::exp)
    }

    /// Density of `‖gᵢ‖`: the row density times the surface measure
    /// `2π^M r^{2M−1} / Γ(M)` of the sphere in `ℂ^M`.
    pub fn row_radial_density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let m = self.num_bs_antennas as f64;
        let log_surface = LN_2 + m * PI.ln() + (2.0 * m - 1.0) * r.ln() - ln_gamma(m);
        self.log_pdf_row(r)
            .map_or(0.0, |lp| (lp + log_surface).exp())
    }

    /// One entry drawn through the scale mixture `a √c x`.
    pub fn sample_entry<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let gamma = Gamma::new(self.num_irs_elements as f64, 1.0).expect("shape >= 1");
        let a2: f64 = gamma.sample(rng);
        complex_normal(rng, a2 * self.channel_scale)
    }
}

/// `ln p_A(a)` for the scale prior `p_A(a) = 2a^{2M₁−1} e^{−a²} / Γ(M₁)`.
pub fn log_pdf_scale(num_irs_elements: usize, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(domain("log_pdf_scale", format!("a must be > 0, got {a}")));
    }
    if num_irs_elements < 1 {
        return Err(domain("log_pdf_scale", "M1 must be >= 1"));
    }
    let m1 = num_irs_elements as f64;
    Ok(LN_2 + (2.0 * m1 - 1.0) * a.ln() - a * a - ln_gamma(m1))
}

/// Largest deviation between the empirical characteristic function of
/// `samples` and the closed form, over the given `(t1, t2)` probes.
pub fn empirical_charfun_check(
    samples: &[Complex64],
    dist: &BesselKChannelDist,
    probes: &[(f64, f64)],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("empirical_charfun_check", "no samples"));
    }
    let n = samples.len() as f64;
    let worst = probes
        .iter()
        .map(|&(t1, t2)| {
            let (re, im) = samples.iter().fold((0.0, 0.0), |(re, im), g| {
                let phase = t1 * g.re + t2 * g.im;
                (re + phase.cos(), im + phase.sin())
            });
            let empirical = Complex64::new(re / n, im / n);
            (empirical - dist.charfun(t1, t2)).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}
