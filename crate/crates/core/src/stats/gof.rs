//! Goodness-of-fit statistics used by the distribution checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};

/// Asymptotic Kolmogorov critical coefficient `c(α) = sqrt(−ln(α/2) / 2)`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt()
}

/// One-sample critical value for sample size `n` at level `alpha`.
pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    ks_coefficient(alpha) / (n as f64).sqrt()
}

/// Two-sample critical value at level `alpha`.
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// `sup |F_n − F|` for a sample against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("ks_one_sample", "no samples"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max))
}

/// `sup |F_n − G_m|` between two samples.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(domain("ks_two_sample", "no samples"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Pearson chi-square test of `samples` against a continuous CDF, using
/// `bins` equiprobable bins bounded by the given quantile function.
/// Returns `(statistic, critical value at level alpha)`.
pub fn chi_square_equiprobable<Q: Fn(f64) -> f64>(
    samples: &[f64],
    quantile: Q,
    bins: usize,
    alpha: f64,
) -> Result<(f64, f64)> {
    if bins < 2 || samples.len() < 5 * bins {
        return Err(domain(
            "chi_square_equiprobable",
            "need at least 2 bins and 5 expected counts per bin",
        ));
    }
    let edges: Vec<f64> = (1..bins).map(|k| quantile(k as f64 / bins as f64)).collect();
    let mut counts = vec![0usize; bins];
    for &x in samples {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64)
        .expect("positive dof")
        .inverse_cdf(1.0 - alpha);
    Ok((stat, critical))
}
