use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full parameterization of one experiment.
///
/// Distances are in meters, losses in dB (positive numbers are losses).
/// Exactly one of `snr_db` and `noise_variance` must be present; an SNR maps
/// to `σ² = 10^(−snr_db/10)` under unit-energy pilots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub num_bs_antennas: usize,
    pub num_irs_elements: usize,
    pub num_users: usize,
    pub cell_radius: f64,
    pub min_user_distance: f64,
    pub bs_irs_distance: f64,
    pub ref_distance_irs_user: f64,
    pub ref_distance_bs_irs: f64,
    pub ref_loss_irs_user: f64,
    pub ref_loss_bs_irs: f64,
    pub exponent_irs_user: f64,
    pub exponent_bs_irs: f64,
    pub scattering_amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
    pub master_seed: u64,
    /// Bypass geometry: every path gain is 1, so `β₁,ᵢβ₂v² = v²`.
    #[serde(default)]
    pub normalized: bool,
}

impl Default for SystemConfig {
    /// 20 users in a 500–1000 m annulus around the IRS, 20 BS antennas,
    /// 10 IRS elements, BS 100 m from the IRS, 30 dB loss at 1 m,
    /// exponents 2 (IRS→user) and 2.8 (BS→IRS), unit amplitude, 0 dB SNR.
    fn default() -> Self {
        Self {
            num_bs_antennas: 20,
            num_irs_elements: 10,
            num_users: 20,
            cell_radius: 1000.0,
            min_user_distance: 500.0,
            bs_irs_distance: 100.0,
            ref_distance_irs_user: 1.0,
            ref_distance_bs_irs: 1.0,
            ref_loss_irs_user: 30.0,
            ref_loss_bs_irs: 30.0,
            exponent_irs_user: 2.0,
            exponent_bs_irs: 2.8,
            scattering_amplitude: 1.0,
            snr_db: Some(0.0),
            noise_variance: None,
            master_seed: 1,
            normalized: false,
        }
    }
}

impl SystemConfig {
    /// Defaults in normalized units with the given dimensions, `σ² = 1`, `v = 1`.
    pub fn normalized(num_irs_elements: usize, num_users: usize, num_bs_antennas: usize) -> Self {
        Self {
            num_irs_elements,
            num_users,
            num_bs_antennas,
            normalized: true,
            snr_db: None,
            noise_variance: Some(1.0),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.num_bs_antennas < 1 || self.num_irs_elements < 1 || self.num_users < 1 {
            return fail("antenna, element and user counts must all be >= 1".into());
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.min_user_distance) || !(self.min_user_distance <= self.cell_radius) {
            return fail(format!(
                "need 0 < min_user_distance ({}) <= cell_radius ({})",
                self.min_user_distance, self.cell_radius
            ));
        }
        for (name, v) in [
            ("bs_irs_distance", self.bs_irs_distance),
            ("ref_distance_irs_user", self.ref_distance_irs_user),
            ("ref_distance_bs_irs", self.ref_distance_bs_irs),
            ("exponent_irs_user", self.exponent_irs_user),
            ("exponent_bs_irs", self.exponent_bs_irs),
        ] {
            if !positive(v) {
                return fail(format!("{name} must be > 0, got {v}"));
            }
        }
        if !self.ref_loss_irs_user.is_finite() || !self.ref_loss_bs_irs.is_finite() {
            return fail("reference losses must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.scattering_amplitude) {
            return fail(format!(
                "scattering_amplitude must lie in [0, 1], got {}",
                self.scattering_amplitude
            ));
        }
        match (self.snr_db, self.noise_variance) {
            (Some(s), None) if !s.is_nan() => Ok(()),
            (None, Some(n)) if n >= 0.0 && n.is_finite() => Ok(()),
            (Some(_), Some(_)) | (None, None) => {
                fail("exactly one of snr_db and noise_variance must be given".into())
            }
            _ => fail("snr_db must be a number and noise_variance must be finite and >= 0".into()),
        }
    }

    /// `σ²`, derived from whichever of `snr_db` / `noise_variance` is set.
    pub fn noise_variance(&self) -> f64 {
        match (self.noise_variance, self.snr_db) {
            (Some(n), _) => n,
            (None, Some(s)) => snr_db_to_noise_variance(s),
            (None, None) => panic!("config has neither snr_db nor noise_variance"),
        }
    }

    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.snr_db = Some(snr_db);
        self.noise_variance = None;
    }

    pub fn set_noise_variance(&mut self, noise_variance: f64) {
        self.snr_db = None;
        self.noise_variance = Some(noise_variance);
    }
}

/// Unit-energy pilots: `σ² = 10^(−snr_db/10)`.
pub fn snr_db_to_noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
