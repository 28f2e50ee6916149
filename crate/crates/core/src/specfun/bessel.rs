//! Modified Bessel function of the second kind, `K_ν(x)`, for real order.
//!
//! Order is reduced to `μ = ν − n` with `|μ| ≤ 1/2`. `K_μ` and `K_{μ+1}` come
//! from Temme's series for `x < 2` or Steed's continued fraction for `x ≥ 2`,
//! and the result is carried to order `ν` by forward recurrence, which is
//! stable for `K`. Values are tracked as `mantissa · e^{log_scale}` so large
//! orders at small `x` and large `x` at any order stay representable.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const RESCALE_AT: f64 = 1e250;

/// Taylor coefficients of `1/Γ(z)` about zero, `c_1..c_28`.
const RGAMMA_TAYLOR: [f64; 28] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
];

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ))` as used by Temme's series.
///
/// `gam1 = (1/Γ(1−μ) − 1/Γ(1+μ)) / 2μ`, `gam2 = (1/Γ(1−μ) + 1/Γ(1+μ)) / 2`,
/// both taken from the even/odd split of the `1/Γ` Taylor series so there is
/// no cancellation as `μ → 0`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut odd = 0.0;
    let mut even = 0.0;
    for pair in RGAMMA_TAYLOR.chunks_exact(2).rev() {
        odd = odd * mu2 + pair[0];
        even = even * mu2 + pair[1];
    }
    let gam1 = -even;
    let gam2 = odd;
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// `(K_μ(x), K_{μ+1}(x))` for `|μ| ≤ 1/2`, `0 < x < 2`.
fn temme_series(mu: f64, x: f64) -> Result<(f64, f64)> {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            return Ok((sum, sum1 * 2.0 / x));
        }
    }
    Err(Error::Convergence {
        method: "Bessel K Temme series",
        estimate: sum,
        error_bound: f64::NAN,
    })
}

/// `(e^x K_μ(x), e^x K_{μ+1}(x))` for `|μ| ≤ 1/2`, `x ≥ 2`.
fn steed_fraction(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            method: "Bessel K continued fraction",
            estimate: s,
            error_bound: f64::NAN,
        });
    }
    h *= a1;
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let k1 = kmu * (mu + x + 0.5 - h) / x;
    Ok((kmu, k1))
}

/// `K_ν(x) = mantissa · e^{log_scale}`.
fn bessel_k_parts(order: f64, x: f64) -> Result<(f64, f64)> {
    if !order.is_finite() || !x.is_finite() {
        return Err(domain(
            "bessel_k",
            format!("non-finite argument (order={order}, x={x})"),
        ));
    }
    if x <= 0.0 {
        return Err(domain("bessel_k", format!("x must be > 0, got {x}")));
    }
    let nu = order.abs();
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut kmu, mut k1, mut log_scale) = if x < 2.0 {
        let (a, b) = temme_series(mu, x)?;
        (a, b, 0.0)
    } else {
        let (a, b) = steed_fraction(mu, x)?;
        (a, b, -x)
    };
    let two_over_x = 2.0 / x;
    let mut m = mu;
    for _ in 0..steps as usize {
        m += 1.0;
        let factor = m * two_over_x;
        if k1 > RESCALE_AT / factor.max(1.0) {
            kmu /= k1;
            log_scale += k1.ln();
            k1 = 1.0;
        }
        let next = factor * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok((kmu, log_scale))
}

/// `K_ν(x)` for real `ν` and `x > 0`. Symmetric in the sign of `ν`.
pub fn bessel_k(order: f64, x: f64) -> Result<f64> {
    let (m, s) = bessel_k_parts(order, x)?;
    Ok(m * s.exp())
}

/// `ln K_ν(x)`, finite wherever `K_ν(x)` is positive even if it is not representable.
pub fn log_bessel_k(order: f64, x: f64) -> Result<f64> {
    let (m, s) = bessel_k_parts(order, x)?;
    Ok(m.ln() + s)
}
