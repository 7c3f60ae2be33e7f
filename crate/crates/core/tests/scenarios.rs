use sysrisk::scenarios::{
    apply_marginal, beta_cdf, beta_inverse_cdf, generate, norm_cdf, sample_equicorrelated_normals,
    CopulaSpec, MarginalSpec,
};

const M: usize = 100_000;

fn copula(n_firms: usize, rho: f64, seed: u64) -> CopulaSpec {
    CopulaSpec {
        n_firms,
        pairwise_correlation: rho,
        n_scenarios: M,
        seed,
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    for (rank, i) in order.into_iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn independent_factors_are_uncorrelated() {
    let z = sample_equicorrelated_normals(&copula(3, 0.0, 5)).unwrap();
    let col = |i: usize| z.iter().map(|s| s[i]).collect::<Vec<_>>();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = pearson(&col(i), &col(j));
        assert!(c.abs() < 0.05, "corr({i},{j}) = {c}");
    }
}

#[test]
fn equicorrelation_is_reproduced() {
    let z = sample_equicorrelated_normals(&copula(4, 0.8, 9)).unwrap();
    let col = |i: usize| z.iter().map(|s| s[i]).collect::<Vec<_>>();
    for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
        let c = pearson(&col(i), &col(j));
        assert!((c - 0.8).abs() < 0.02, "corr({i},{j}) = {c}");
    }
}

#[test]
fn spearman_matches_gaussian_copula() {
    let mu = sysrisk::scenarios::norm_inv(0.75).unwrap();
    let margins = vec![
        MarginalSpec::ShiftedLognormal { mu, sigma: 1.0, b: -1.0 },
        MarginalSpec::ScaledBeta { scale: 0.7, shift: 0.2, alpha: 2.0, beta: 5.0 },
        MarginalSpec::ScaledBeta { scale: 1.0, shift: 0.0, alpha: 2.0, beta: 5.0 },
    ];
    for rho in [0.5, 0.8] {
        let x = generate(&copula(3, rho, 21), &margins).unwrap();
        let target = 6.0 / std::f64::consts::PI * (rho / 2.0).asin();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let s = pearson(&ranks(&x.firm(i)), &ranks(&x.firm(j)));
            assert!((s - target).abs() < 0.03, "rho {rho}: spearman({i},{j}) = {s} vs {target}");
        }
    }
}

#[test]
fn margins_pass_kolmogorov_smirnov() {
    let mu = sysrisk::scenarios::norm_inv(0.75).unwrap();
    let margins = [
        MarginalSpec::ShiftedLognormal { mu, sigma: 1.0, b: -1.0 },
        MarginalSpec::ScaledBeta { scale: 1.0, shift: 0.0, alpha: 2.0, beta: 5.0 },
        MarginalSpec::ScaledBeta { scale: 350.0 / 500.0, shift: 0.2, alpha: 2.0, beta: 5.0 },
    ];
    let band = 1.63 / (M as f64).sqrt();
    for (seed, margin) in margins.iter().enumerate() {
        let z = sample_equicorrelated_normals(&copula(1, 0.5, 100 + seed as u64)).unwrap();
        let x = apply_marginal(&z, std::slice::from_ref(margin)).unwrap();
        let d = ks_distance(&x.firm(0), |v| margin.cdf(v));
        assert!(d < band, "{margin:?}: KS distance {d} >= {band}");
    }
}

#[test]
fn generation_is_bit_identical_per_seed() {
    let margins = vec![MarginalSpec::ScaledBeta { scale: 1.0, shift: 0.0, alpha: 2.0, beta: 5.0 }; 5];
    let spec = CopulaSpec { n_firms: 5, pairwise_correlation: 0.5, n_scenarios: 1000, seed: 77 };
    let a = generate(&spec, &margins).unwrap();
    let b = generate(&spec, &margins).unwrap();
    for s in 0..1000 {
        for (x, y) in a.scenario(s).iter().zip(b.scenario(s)) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    let other = generate(&CopulaSpec { seed: 78, ..spec }, &margins).unwrap();
    assert_ne!(a.scenario(0), other.scenario(0));
}

#[test]
fn transforms_at_the_median() {
    let mu = sysrisk::scenarios::norm_inv(0.75).unwrap();
    let lognormal = MarginalSpec::ShiftedLognormal { mu, sigma: 1.0, b: -1.0 };
    assert!((lognormal.transform(0.0).unwrap() - (mu.exp() - 1.0)).abs() < 1e-14);
    let beta = MarginalSpec::ScaledBeta { scale: 1.0, shift: 0.0, alpha: 2.0, beta: 5.0 };
    assert!((beta.transform(0.0).unwrap() - 0.26445).abs() < 1e-4);
    assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Beta quantile by bisection on a quadrature CDF (integer shapes >= 1).
fn beta_quantile_oracle(u: f64, a: f64, b: f64) -> f64 {
    let pdf = move |x: f64| x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0);
    let total = simpson(&pdf, 0.0, 1.0, 1e-15, 50);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if simpson(&pdf, 0.0, mid, 1e-15, 50) / total < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn beta_inverse_matches_quadrature_oracle() {
    for &(a, b) in &[(2.0, 5.0), (2.0, 2.0), (3.0, 1.5)] {
        for &u in &[0.01, 0.1, 0.26, 0.5, 0.74, 0.9, 0.99] {
            let x = beta_inverse_cdf(u, a, b).unwrap();
            let oracle = beta_quantile_oracle(u, a, b);
            assert!((x - oracle).abs() < 1e-8, "Beta({a},{b}) at {u}: {x} vs {oracle}");
            assert!((beta_cdf(x, a, b) - u).abs() < 1e-10);
        }
    }
    let median = beta_quantile_oracle(0.5, 2.0, 5.0);
    assert!((median - 0.26445).abs() < 1e-5);
    assert!((beta_inverse_cdf(0.5, 2.0, 5.0).unwrap() - median).abs() < 1e-6);
}

#[test]
fn beta_inverse_is_monotone() {
    let mut prev = -1.0;
    for i in 0..=1000 {
        let x = beta_inverse_cdf(i as f64 / 1000.0, 2.0, 5.0).unwrap();
        assert!(x >= prev, "not monotone at {i}");
        prev = x;
    }
    assert_eq!(beta_inverse_cdf(0.0, 2.0, 5.0).unwrap(), 0.0);
    assert_eq!(beta_inverse_cdf(1.0, 2.0, 5.0).unwrap(), 1.0);
    assert!(beta_inverse_cdf(1.5, 2.0, 5.0).is_err());
}

#[test]
fn scenario_dump_has_long_format() {
    let margins = vec![MarginalSpec::ScaledBeta { scale: 1.0, shift: 0.0, alpha: 2.0, beta: 5.0 }; 2];
    let spec = CopulaSpec { n_firms: 2, pairwise_correlation: 0.5, n_scenarios: 3, seed: 1 };
    let x = generate(&spec, &margins).unwrap();
    let mut buf = Vec::new();
    x.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "firm_id,scenario_id,value");
    assert_eq!(lines.len(), 7);
}
