use irs_mmse::channel::{synthesize_channel, synthesize_gsm, PathLossProfile, SystemConfig};
use irs_mmse::rng::{stream, Purpose};
use irs_mmse::specfun::{ln_gamma, log_bessel_k};
use irs_mmse::stats::gof::{
    chi_square_equiprobable, ks_critical_one_sample, ks_critical_two_sample, ks_one_sample,
    ks_two_sample,
};
use irs_mmse::stats::{empirical_charfun_check, BesselKChannelDist, RadialCdf};
use irs_mmse::Complex64;

const N: usize = 100_000;
const ALPHA: f64 = 0.01;

fn config(m1: usize, n: usize, m: usize, v: f64) -> SystemConfig {
    let mut c = SystemConfig::normalized(m1, n, m);
    c.scattering_amplitude = v;
    c
}

/// Closed-form CDF of `|g|`: `1 − x^{M₁} K_{M₁}(x) / (2^{M₁−1} Γ(M₁))`, `x = 2r/√c`.
fn entry_cdf(m1: usize, c: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let m = m1 as f64;
    let x = 2.0 * r / c.sqrt();
    let log_tail = m * x.ln() + log_bessel_k(m, x).unwrap() - (m - 1.0) * std::f64::consts::LN_2 - ln_gamma(m);
    1.0 - log_tail.exp()
}

fn product_draws(cfg: &SystemConfig, seed: u64, n: usize) -> Vec<ndarray::Array2<Complex64>> {
    let profile = PathLossProfile::normalized(cfg.num_users);
    let mut rng = stream(seed, 0, 0, Purpose::Test);
    (0..n).map(|_| synthesize_channel(cfg, &profile, &mut rng).g).collect()
}

fn gsm_draws(cfg: &SystemConfig, seed: u64, n: usize) -> Vec<ndarray::Array2<Complex64>> {
    let profile = PathLossProfile::normalized(cfg.num_users);
    let mut rng = stream(seed, 0, 1, Purpose::Test);
    (0..n).map(|_| synthesize_gsm(cfg, &profile, &mut rng).g).collect()
}

fn row_norm(g: &ndarray::Array2<Complex64>, i: usize) -> f64 {
    g.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn entry_modulus_follows_closed_form() {
    let v = 0.8;
    for m1 in [1usize, 2, 5, 10] {
        let cfg = config(m1, 1, 1, v);
        let samples: Vec<f64> = product_draws(&cfg, 10 + m1 as u64, N)
            .iter()
            .map(|g| g[[0, 0]].norm())
            .collect();
        let d = ks_one_sample(&samples, |r| entry_cdf(m1, v * v, r)).unwrap();
        assert!(d < ks_critical_one_sample(ALPHA, N), "m1={m1}: D={d}");

        let dist = BesselKChannelDist::new(m1, v * v, 1).unwrap();
        let table = RadialCdf::for_entry(&dist).unwrap();
        let (stat, crit) = chi_square_equiprobable(&samples, |p| table.quantile(p), 50, ALPHA).unwrap();
        assert!(stat < crit, "m1={m1}: chi2={stat} crit={crit}");
    }
}

#[test]
fn row_norm_follows_row_law() {
    for (m1, m) in [(1usize, 2usize), (3, 4), (6, 2)] {
        let cfg = config(m1, 1, m, 1.0);
        let samples: Vec<f64> = product_draws(&cfg, 1000 + 10 * m1 as u64 + m as u64, N).iter().map(|g| row_norm(g, 0)).collect();
        let dist = BesselKChannelDist::new(m1, 1.0, m).unwrap();
        let table = RadialCdf::for_row(&dist).unwrap();
        let d = ks_one_sample(&samples, |r| table.cdf(r)).unwrap();
        assert!(d < ks_critical_one_sample(ALPHA, N), "m1={m1} m={m}: D={d}");
        let (stat, crit) = chi_square_equiprobable(&samples, |p| table.quantile(p), 40, ALPHA).unwrap();
        assert!(stat < crit, "m1={m1} m={m}: chi2={stat} crit={crit}");
    }
}

#[test]
fn scale_mixture_sampler_matches_product_construction() {
    for m1 in [1usize, 2, 5] {
        for m in [1usize, 4] {
            let cfg = config(m1, 1, m, 1.0);
            let seed = 100 + 10 * m1 as u64 + m as u64;
            let product = product_draws(&cfg, seed, N);
            let gsm = gsm_draws(&cfg, seed, N);
            let crit = ks_critical_two_sample(ALPHA, N, N);

            let a: Vec<f64> = product.iter().map(|g| g[[0, 0]].norm()).collect();
            let b: Vec<f64> = gsm.iter().map(|g| g[[0, 0]].norm()).collect();
            let d = ks_two_sample(&a, &b).unwrap();
            assert!(d < crit, "entry m1={m1} m={m}: D={d}");

            let a: Vec<f64> = product.iter().map(|g| row_norm(g, 0)).collect();
            let b: Vec<f64> = gsm.iter().map(|g| row_norm(g, 0)).collect();
            let d = ks_two_sample(&a, &b).unwrap();
            assert!(d < crit, "row m1={m1} m={m}: D={d}");
        }
    }
}

#[test]
fn empirical_characteristic_function() {
    for m1 in [1usize, 3] {
        let cfg = config(m1, 1, 1, 1.0);
        let samples: Vec<Complex64> = product_draws(&cfg, 30 + m1 as u64, N).iter().map(|g| g[[0, 0]]).collect();
        let dist = BesselKChannelDist::new(m1, 1.0, 1).unwrap();
        let probes = [(0.3, 0.0), (0.0, 0.8), (1.0, -1.0), (2.0, 0.5), (-3.0, 1.5)];
        let worst = empirical_charfun_check(&samples, &dist, &probes).unwrap();
        assert!(worst < 5.0 / (N as f64).sqrt(), "m1={m1}: {worst}");
    }
}

/// `|mean| ≤ 3 · SE` for a complex sample mean.
fn assert_zero_mean(xs: &[Complex64], what: &str) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<Complex64>() / n;
    let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(mean.norm() <= 3.0 * se, "{what}: |mean|={} se={se}", mean.norm());
}

#[test]
fn entries_are_centered_and_uncorrelated() {
    let cfg = config(2, 2, 2, 1.0);
    let draws = product_draws(&cfg, 40, N);
    let pick = |f: &dyn Fn(&ndarray::Array2<Complex64>) -> Complex64| draws.iter().map(f).collect::<Vec<_>>();
    assert_zero_mean(&pick(&|g| g[[0, 0]]), "E[g11]");
    assert_zero_mean(&pick(&|g| g[[1, 1]]), "E[g22]");
    assert_zero_mean(&pick(&|g| g[[0, 0]] * g[[0, 1]].conj()), "E[g11 g12*]");
    assert_zero_mean(&pick(&|g| g[[0, 0]] * g[[0, 1]]), "E[g11 g12]");
    assert_zero_mean(&pick(&|g| g[[0, 0]] * g[[1, 0]].conj()), "E[g11 g21*]");
    assert_zero_mean(&pick(&|g| g[[0, 1]] * g[[1, 0]].conj()), "E[g12 g21*]");
}

#[test]
fn row_energies_share_the_bs_link() {
    // uncorrelated but not independent: both rows see the same H₂
    let cfg = config(2, 2, 2, 1.0);
    let draws = product_draws(&cfg, 41, N);
    let e: Vec<(f64, f64)> = draws.iter().map(|g| (row_norm(g, 0).powi(2), row_norm(g, 1).powi(2))).collect();
    let n = e.len() as f64;
    let (ma, mb) = (e.iter().map(|p| p.0).sum::<f64>() / n, e.iter().map(|p| p.1).sum::<f64>() / n);
    let cov = e.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum::<f64>() / n;
    let va = e.iter().map(|p| (p.0 - ma).powi(2)).sum::<f64>() / n;
    let vb = e.iter().map(|p| (p.1 - mb).powi(2)).sum::<f64>() / n;
    let corr = cov / (va * vb).sqrt();
    assert!(corr > 10.0 / n.sqrt(), "corr={corr}");
}

#[test]
fn entry_law_approaches_gaussian_for_many_elements() {
    // M₁ = 64, c = 1/M₁: unit-variance entry vs CN(0, 1), whose modulus CDF is 1 − e^{−r²}
    let m1 = 64;
    let c = 1.0 / m1 as f64;
    let d = (1..=5000)
        .map(|k| {
            let r = k as f64 * 1e-3;
            (entry_cdf(m1, c, r) - (1.0 - (-r * r).exp())).abs()
        })
        .fold(0.0, f64::max);
    assert!(d <= 0.01, "KS distance {d}");
    assert!(d > 0.0);
}

#[test]
fn replay_is_independent_of_threads() {
    let cfg = config(3, 4, 2, 1.0);
    let profile = PathLossProfile::normalized(4);
    let draw = |t: u64| {
        let mut rng = stream(9, 0, t, Purpose::Channel);
        let a = synthesize_channel(&cfg, &profile, &mut rng).g;
        let b = synthesize_gsm(&cfg, &profile, &mut rng).g;
        (a, b)
    };
    let sequential: Vec<_> = (0..64).map(draw).collect();
    let threaded: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|w| s.spawn(move || (0..16).map(|k| draw(w * 16 + k)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(sequential, threaded);
}
