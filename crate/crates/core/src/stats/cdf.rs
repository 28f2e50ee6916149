use crate::error::{domain, Result};
use crate::specfun::{integrate, QuadratureSpec};

use super::BesselKChannelDist;

const GRID_POINTS: usize = 2048;

/// CDF of a radial law, tabulated by quadrature of its density on a
/// log-spaced grid and read back through cubic Hermite interpolation with
/// the density itself as the slope.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct RadialCdf {
    r: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
}

impl RadialCdf {
    /// Tabulate `∫₀^r density` on `[lo, hi]`; the mass below `lo` is taken
    /// as zero.
    pub fn from_density<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(domain("RadialCdf", format!("bad grid range [{lo}, {hi}]")));
        }
        let spec = QuadratureSpec::default().with_relative_tolerance(1e-11);
        let ratio = (hi / lo).ln() / (GRID_POINTS - 2) as f64;
        let mut r = Vec::with_capacity(GRID_POINTS);
        r.push(0.0);
        r.extend((0..GRID_POINTS - 1).map(|i| lo * (ratio * i as f64).exp()));
        let mut f = Vec::with_capacity(GRID_POINTS);
        f.extend([0.0, 0.0]);
        let mut acc = 0.0;
        for w in r[1..].windows(2) {
            acc += integrate(&density, w[0], w[1], &spec)?.value;
            f.push(acc);
        }
        let mut slope: Vec<f64> = r.iter().map(|&x| if x > 0.0 { density(x) } else { 0.0 }).collect();
        limit_slopes(&r, &f, &mut slope);
        Ok(Self { r, f, slope })
    }

    /// Radial CDF of `|g|` for a single entry.
    pub fn for_entry(dist: &BesselKChannelDist) -> Result<Self> {
        let s = dist.channel_scale().sqrt();
        let m = dist.num_irs_elements() as f64;
        Self::from_density(|r| dist.entry_radial_density(r), 1e-7 * s, s * (2.0 * m.sqrt() + 40.0))
    }

    /// Radial CDF of `‖gᵢ‖` for a full row.
    pub fn for_row(dist: &BesselKChannelDist) -> Result<Self> {
        let s = dist.channel_scale().sqrt();
        let mm = (dist.num_irs_elements() * dist.num_bs_antennas()) as f64;
        Self::from_density(|r| dist.row_radial_density(r), 1e-7 * s, s * (2.0 * mm.sqrt() + 40.0))
    }

    /// Total tabulated mass; 1 up to quadrature and truncation error.
    pub fn total(&self) -> f64 {
        *self.f.last().expect("nonempty grid")
    }

    pub fn grid(&self) -> &[f64] {
        &self.r
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let last = self.r.len() - 1;
        if r >= self.r[last] {
            return self.f[last];
        }
        let j = self.r.partition_point(|&x| x <= r) - 1;
        let h = self.r[j + 1] - self.r[j];
        let t = (r - self.r[j]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let rise = h01 * (self.f[j + 1] - self.f[j]) + h * (h10 * self.slope[j] + h11 * self.slope[j + 1]);
        self.f[j] + rise.max(0.0)
    }

    /// Smallest tabulated-interpolant radius with `cdf(r) ≥ p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, *self.r.last().expect("nonempty grid"));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Fritsch–Carlson limiter: rescales endpoint slopes where the cubic
/// would overshoot, so the interpolant stays monotone.
fn limit_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    for i in 0..x.len() - 1 {
        let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if delta <= 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        let (a, b) = (d[i] / delta, d[i + 1] / delta);
        let norm = a.hypot(b);
        if norm > 3.0 {
            d[i] = 3.0 * a / norm * delta;
            d[i + 1] = 3.0 * b / norm * delta;
        }
    }
}
