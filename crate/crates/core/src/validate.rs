//! Oracle checks of the numerical kernels against direct quadrature.
//!
//! Every check reports the worst error it saw next to its tolerance.

use std::f64::consts::PI;
use std::fmt;

use crate::error::Result;
use crate::estimator::mmse_weight;
use crate::specfun::{
    integrate, integrate_half_line, ln_gamma, log_bessel_k, log_scaled_upper_gamma,
    upper_incomplete_gamma, QuadratureSpec,
};
use crate::stats::BesselKChannelDist;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub achieved: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Number of grid cases, or the error that aborted the check.
    pub note: String,
}

impl CheckResult {
    fn from_errors(name: &str, tolerance: f64, errors: Result<Vec<f64>>) -> Self {
        match errors {
            Ok(errs) => {
                let achieved = errs.iter().copied().fold(0.0, f64::max);
                let finite = errs.iter().all(|e| e.is_finite());
                Self {
                    name: name.to_string(),
                    achieved,
                    tolerance,
                    passed: finite && achieved <= tolerance,
                    note: format!("{} cases", errs.len()),
                }
            }
            Err(e) => Self {
                name: name.to_string(),
                achieved: f64::INFINITY,
                tolerance,
                passed: false,
                note: e.to_string(),
            },
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} err {:.3e} tol {:.1e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.achieved,
            self.tolerance,
            self.note
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn oracle_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_relative_tolerance(1e-13)
}

/// `Γ(a, z)` as `z^{a−1} e^{−z} ∫₀^∞ (1 + s/z)^{a−1} e^{−s} ds`, returned as
/// the scaled value `z^{−a} e^{z} Γ(a, z)`.
pub fn scaled_upper_gamma_by_quadrature(a: f64, z: f64) -> Result<f64> {
    let v = integrate_half_line(|s| ((a - 1.0) * (s / z).ln_1p() - s).exp(), &oracle_spec())?;
    Ok(v.value / z)
}

/// `e^{x} K_ν(x) = ∫₀^∞ e^{−x(cosh t − 1)} cosh(νt) dt`.
pub fn scaled_bessel_k_by_quadrature(order: f64, x: f64) -> Result<f64> {
    let f = |t: f64| {
        let e = -x * (t.cosh() - 1.0);
        0.5 * ((e + order * t).exp() + (e - order * t).exp())
    };
    // the integrand is negligible beyond cosh t − 1 = (ν·t + 750)/x
    let mut hi = 1.0;
    while -x * (f64::cosh(hi) - 1.0) + order * hi > -750.0 {
        hi *= 1.5;
    }
    Ok(integrate(f, 0.0, hi, &oracle_spec())?.value)
}

/// Prior-averaged weight `∫ u/(u + z) · u^{M₁−1} e^{−u}/Γ(M₁) du`.
pub fn mmse_weight_by_quadrature(num_irs_elements: usize, z: f64) -> Result<f64> {
    let m1 = num_irs_elements as f64;
    let lg = ln_gamma(m1);
    let f = |u: f64| ((m1 - 1.0) * u.ln() - u - lg).exp() * (u / (u + z));
    Ok(integrate_half_line(f, &oracle_spec())?.value)
}

/// `Γ(−1, 1)` against `∫₁^∞ t^{−2} e^{−t} dt`.
pub fn gamma_anchor() -> CheckResult {
    let errs = (|| {
        let oracle = integrate_half_line(|s| (-(1.0 + s)).exp() / (1.0 + s).powi(2), &oracle_spec())?.value;
        Ok(vec![rel(upper_incomplete_gamma(-1.0, 1.0)?, oracle)])
    })();
    CheckResult::from_errors("gamma anchor", 1e-8, errs)
}

/// `K₀(1)` against `∫₀^∞ e^{−cosh t} dt`.
pub fn bessel_anchor() -> CheckResult {
    let errs = (|| {
        let oracle = integrate(|t: f64| (-t.cosh()).exp(), 0.0, 40.0, &oracle_spec())?.value;
        Ok(vec![rel(log_bessel_k(0.0, 1.0)?.exp(), oracle)])
    })();
    CheckResult::from_errors("bessel anchor", 1e-8, errs)
}

/// `z S(a+1, z) = a S(a, z) + 1` for the scaled gamma `S`.
pub fn gamma_recurrence(fast: bool) -> CheckResult {
    let step = if fast { 1.25 } else { 0.25 };
    let errs = (|| {
        let mut out = Vec::new();
        for z in [0.01, 0.3, 1.0, 2.5, 40.0, 1e4] {
            let mut a = -25.0;
            while a <= 10.0 {
                let s0 = log_scaled_upper_gamma(a, z)?.exp();
                let s1 = log_scaled_upper_gamma(a + 1.0, z)?.exp();
                let scale = (z * s1).abs().max((a * s0).abs()).max(1.0);
                out.push((z * s1 - a * s0 - 1.0).abs() / scale);
                a += step;
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("gamma recurrence", 1e-12, errs)
}

/// `K_{ν+1}(x) = K_{ν−1}(x) + (2ν/x) K_ν(x)`, checked in ratio form.
pub fn bessel_recurrence(fast: bool) -> CheckResult {
    let step = if fast { 2.3 } else { 0.35 };
    let errs = (|| {
        let mut out = Vec::new();
        for x in [1e-4, 0.05, 0.7, 1.0, 3.0, 25.0, 400.0] {
            let mut nu = 0.0;
            while nu <= 60.0 {
                let up = log_bessel_k(nu + 1.0, x)?;
                let r_down = (log_bessel_k(nu - 1.0, x)? - up).exp();
                let r_mid = (log_bessel_k(nu, x)? - up).exp();
                out.push((r_down + 2.0 * nu / x * r_mid - 1.0).abs());
                nu += step;
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("bessel recurrence", 1e-12, errs)
}

/// `K_ν(x)` against its integral representation.
pub fn bessel_oracle_grid(fast: bool) -> CheckResult {
    let orders: &[f64] = if fast {
        &[0.0, 1.0, 2.3, 10.0]
    } else {
        &[0.0, 0.5, 1.0, 1.5, 2.3, 5.0, 7.7, 10.0, 20.0]
    };
    let xs = [0.05, 0.4, 1.0, 1.9, 2.1, 5.0, 30.0, 300.0];
    let errs = (|| {
        let mut out = Vec::new();
        for &nu in orders {
            for &x in &xs {
                let oracle = scaled_bessel_k_by_quadrature(nu, x)?;
                out.push(rel((log_bessel_k(nu, x)? + x).exp(), oracle));
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("bessel oracle grid", 1e-9, errs)
}

/// `Γ(a, z)` against its integral representation.
pub fn gamma_oracle_grid(fast: bool) -> CheckResult {
    let orders: &[f64] = if fast {
        &[-10.0, -1.0, 0.0, 2.5]
    } else {
        &[-20.0, -10.0, -3.5, -1.0, -0.3, 0.0, 0.5, 1.0, 2.5, 7.5]
    };
    let zs = [0.01, 0.3, 1.0, 3.0, 20.0, 500.0];
    let errs = (|| {
        let mut out = Vec::new();
        for &a in orders {
            for &z in &zs {
                let oracle = scaled_upper_gamma_by_quadrature(a, z)?;
                out.push(rel(log_scaled_upper_gamma(a, z)?.exp(), oracle));
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("gamma oracle grid", 1e-9, errs)
}

/// Closed-form shrink weight against direct quadrature over the scale prior.
pub fn weight_oracle_grid(fast: bool) -> CheckResult {
    let m1s: Vec<usize> = if fast { vec![1, 2, 5, 10, 20] } else { (1..=20).collect() };
    let errs = (|| {
        let mut out = Vec::new();
        for &m1 in &m1s {
            for z in [1e-3, 0.1, 1.0, 10.0, 1e3, 1e6] {
                let oracle = mmse_weight_by_quadrature(m1, z)?;
                out.push(rel(mmse_weight(m1, 1.0, z)?, oracle));
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("weight oracle grid", 1e-8, errs)
}

/// Entry and row densities integrate to one.
pub fn density_normalization(fast: bool) -> CheckResult {
    let m1s: &[usize] = if fast { &[1, 4] } else { &[1, 2, 5, 10, 20] };
    let spec = QuadratureSpec::default().with_relative_tolerance(1e-10);
    let errs = (|| {
        let mut out = Vec::new();
        for &m1 in m1s {
            for m in [1, 4] {
                for c in [0.5, 1.0, 2.0] {
                    let d = BesselKChannelDist::new(m1, c, m)?;
                    let entry = integrate_half_line(|r| d.entry_radial_density(r), &spec)?.value;
                    let row = integrate_half_line(|r| d.row_radial_density(r), &spec)?.value;
                    out.push((entry - 1.0).abs());
                    out.push((row - 1.0).abs());
                }
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("density normalization", 1e-6, errs)
}

/// Characteristic function at the origin and a Hankel-transform spot check
/// of the entry density: `∫ 2πr p(r) dr` weighted by `J₀(ωr)` equals the
/// characteristic function at radius `ω`.
pub fn charfun_consistency() -> CheckResult {
    let spec = QuadratureSpec::default().with_relative_tolerance(1e-10);
    let errs = (|| {
        let mut out = Vec::new();
        for (m1, c) in [(1usize, 1.0), (3, 0.5), (8, 2.0)] {
            let d = BesselKChannelDist::new(m1, c, 1)?;
            out.push((d.charfun(0.0, 0.0) - 1.0).abs());
            for w in [0.3, 1.0, 2.5] {
                let j0 = |x: f64| {
                    integrate(|t: f64| (x * t.sin()).cos(), 0.0, PI, &spec).map_or(f64::NAN, |i| i.value / PI)
                };
                let v = integrate_half_line(
                    |r| match d.entry_radial_density(r) {
                        p if p > 0.0 => p * j0(w * r),
                        _ => 0.0,
                    },
                    &QuadratureSpec::default().with_relative_tolerance(1e-8),
                )?;
                out.push((v.value - d.charfun(w, 0.0)).abs());
            }
        }
        Ok(out)
    })();
    CheckResult::from_errors("charfun consistency", 1e-7, errs)
}

/// All checks, in report order.
pub fn run(fast: bool) -> Vec<CheckResult> {
    let mut out = vec![
        gamma_anchor(),
        bessel_anchor(),
        gamma_recurrence(fast),
        bessel_recurrence(fast),
        gamma_oracle_grid(fast),
        bessel_oracle_grid(fast),
        weight_oracle_grid(fast),
        density_normalization(fast),
    ];
    if !fast {
        out.push(charfun_consistency());
    }
    out
}
