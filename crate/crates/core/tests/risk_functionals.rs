use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sysrisk::acceptance::{
    avar, is_acceptable, oce_rho, ubsr, ubsr_bisection, value_at_risk, AcceptanceSpec, Criterion,
    LossFn, SampleVector, Utility,
};

fn sv(v: Vec<f64>) -> SampleVector {
    SampleVector::new(v).unwrap()
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion::Avar { lambda: 0.1 },
        Criterion::Avar { lambda: 0.37 },
        Criterion::Ubsr { loss: LossFn::Exp, z: 0.5 },
        Criterion::Ubsr { loss: LossFn::Power { p: 2.0 }, z: 0.5 },
        Criterion::Oce { utility: Utility::Log1p },
        Criterion::Oce { utility: Utility::Exponential },
        Criterion::Entropic { level: 0.9 },
    ]
}

fn rho(c: &Criterion, v: &[f64]) -> f64 {
    AcceptanceSpec::new(c.clone(), 0.0).risk(&sv(v.to_vec())).unwrap()
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-8.0..8.0f64, 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cash_invariance(v in samples()) {
        for c in criteria() {
            let base = rho(&c, &v);
            for t in -5..=5 {
                let t = t as f64;
                let shifted: Vec<f64> = v.iter().map(|x| x + t).collect();
                let r = rho(&c, &shifted);
                prop_assert!((r - (base - t)).abs() < 1e-8, "{:?}: t={} {} vs {}", c, t, r, base - t);
            }
        }
    }

    #[test]
    fn monotonicity(v in samples(), bumps in prop::collection::vec(0.0..3.0f64, 40)) {
        let larger: Vec<f64> = v.iter().zip(&bumps).map(|(x, b)| x + b).collect();
        for c in criteria() {
            prop_assert!(rho(&c, &larger) <= rho(&c, &v) + 1e-9, "{:?}", c);
            let spec = AcceptanceSpec::new(c.clone(), -rho(&c, &v));
            if is_acceptable(&sv(v.clone()), &spec).unwrap() {
                prop_assert!(is_acceptable(&sv(larger.clone()), &spec).unwrap());
            }
        }
    }

    #[test]
    fn avar_dominates_var(v in samples(), lambda in 0.01..0.99f64) {
        let s = sv(v);
        prop_assert!(avar(&s, lambda).unwrap() >= value_at_risk(&s, lambda).unwrap() - 1e-12);
    }

    #[test]
    fn avar_is_convex(pairs in prop::collection::vec((-8.0..8.0f64, -8.0..8.0f64), 1..40), alpha in 0.0..1.0f64, lambda in 0.01..0.99f64) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        let lhs = avar(&sv(mix), lambda).unwrap();
        let rhs = alpha * avar(&sv(a), lambda).unwrap() + (1.0 - alpha) * avar(&sv(b), lambda).unwrap();
        prop_assert!(lhs <= rhs + 1e-8);
    }

    #[test]
    fn exp_shortfall_closed_form_matches_bisection(v in samples(), z in 0.05..5.0f64) {
        let s = sv(v);
        let closed = ubsr(&s, LossFn::Exp, z).unwrap();
        let bisect = ubsr_bisection(&s, LossFn::Exp, z).unwrap();
        prop_assert!((closed - bisect).abs() < 1e-8);
    }
}

#[test]
fn oce_with_linear_utility_equals_avar() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let n = rng.random_range(1..60);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let lambda = rng.random_range(0.01..0.99);
        let s = sv(v);
        let a = avar(&s, lambda).unwrap();
        let o = oce_rho(&s, Utility::AvarLinear { lambda }).unwrap();
        assert!((a - o).abs() < 1e-6, "case {case}: avar {a} vs oce {o}");
    }
}

#[test]
fn log_oce_matches_dense_grid_scan() {
    let s = sv(vec![0.0, 2.0]);
    let r = oce_rho(&s, Utility::Log1p).unwrap();
    // eta ranges over (-inf, 1); the objective is concave so a wide grid suffices.
    let n = 1_000_000;
    let (lo, hi) = (-5.0, 1.0 - 1e-9);
    let best = (0..=n)
        .map(|i| {
            let eta = lo + (hi - lo) * i as f64 / n as f64;
            eta + 0.5 * ((1.0 - eta).ln() + (3.0 - eta).ln())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((r + best).abs() < 1e-9, "{r} vs {}", -best);
}

#[test]
fn shifted_log_criterion_accepts_down_to_the_shift() {
    let spec = AcceptanceSpec::new(Criterion::Oce { utility: Utility::Log1p }, -10.0);
    assert!(is_acceptable(&sv(vec![-10.0; 5]), &spec).unwrap());
    assert!(is_acceptable(&sv(vec![-9.5; 5]), &spec).unwrap());
    assert!(!is_acceptable(&sv(vec![-10.001; 5]), &spec).unwrap());
}

#[test]
fn entropic_level_threshold() {
    let spec = AcceptanceSpec::new(Criterion::Entropic { level: 0.9 }, 0.0);
    assert!(is_acceptable(&sv(vec![0.9; 3]), &spec).unwrap());
    assert!(is_acceptable(&sv(vec![1.2; 3]), &spec).unwrap());
    assert!(!is_acceptable(&sv(vec![0.899; 3]), &spec).unwrap());
}

#[test]
fn avar_brute_force_examples() {
    assert_eq!(avar(&sv(vec![-1.0; 4]), 0.5).unwrap(), 1.0);
    assert_eq!(avar(&sv(vec![1.0, 2.0, 3.0, 4.0]), 0.25).unwrap(), -1.0);
    assert_eq!(avar(&sv(vec![-2.0, 0.0, 2.0, 4.0]), 0.5).unwrap(), 1.0);
    // Rockafellar-Uryasev minimum over r, scanned on the sample points.
    let v: Vec<f64> = vec![3.0, -1.5, 0.25, 7.0, -4.0, 2.0, 1.0];
    for lambda in [0.1, 0.3, 0.5, 0.8] {
        let ru = v
            .iter()
            .map(|&m| {
                let r = -m;
                r + v.iter().map(|x: &f64| (-x - r).max(0.0)).sum::<f64>() / (v.len() as f64 * lambda)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((avar(&sv(v.clone()), lambda).unwrap() - ru).abs() < 1e-12);
    }
}
