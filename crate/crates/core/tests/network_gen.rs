use sysrisk::network_gen::{sample_network, three_tier_preset, two_tier_preset, NetworkGenSpec};

#[test]
fn a1_edge_counts_follow_the_binomial() {
    let trials = 100.0 * 99.0;
    let mean = 0.1 * trials;
    let sd = (trials * 0.1 * 0.9_f64).sqrt();
    let mut total = 0.0;
    for seed in 0..50 {
        let net = sample_network(&two_tier_preset("A1", seed).unwrap()).unwrap();
        let count = net.firm_edge_count() as f64;
        assert!((count - mean).abs() <= 3.0 * sd, "seed {seed}: {count} edges");
        total += count;
    }
    let avg = total / 50.0;
    assert!((avg - mean).abs() <= 3.0 * sd / 50f64.sqrt(), "average {avg}");
}

#[test]
fn weights_follow_group_pairs() {
    let spec = two_tier_preset("B4", 9).unwrap();
    let net = sample_network(&spec).unwrap();
    let group = |i: usize| if i <= 10 { 0 } else { 1 };
    for i in 1..=100 {
        assert_eq!(net.nominal(i, i), 0.0);
        assert_eq!(net.nominal(0, i), 0.0);
        assert_eq!(net.nominal(i, 0), spec.w_society[group(i)]);
        for j in 1..=100 {
            let v = net.nominal(i, j);
            if v != 0.0 {
                assert_eq!(v, spec.w[group(i)][group(j)]);
            }
        }
    }
    assert_eq!(net.promised_to_society(), 190.0);
}

#[test]
fn three_tier_obligations_are_in_units_of_1_over_480() {
    let net = sample_network(&three_tier_preset(4)).unwrap();
    assert_eq!(net.n_firms(), 300);
    assert!((net.promised_to_society() - 1.0).abs() < 1e-12);
    // q for small-to-small links is zero
    for i in 101..=300 {
        for j in 101..=300 {
            assert_eq!(net.nominal(i, j), 0.0);
        }
    }
}

#[test]
fn extreme_probabilities() {
    let base = NetworkGenSpec {
        group_sizes: vec![2, 3],
        q: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        w: vec![vec![4.0, 3.0], vec![2.0, 1.0]],
        w_society: vec![5.0, 6.0],
        seed: 1,
    };
    let full = sample_network(&base).unwrap();
    assert_eq!(full.firm_edge_count(), 5 * 4);
    let empty = sample_network(&NetworkGenSpec { q: vec![vec![0.0; 2]; 2], ..base.clone() }).unwrap();
    assert_eq!(empty.firm_edge_count(), 0);
    assert_eq!(empty.promised_to_society(), 2.0 * 5.0 + 3.0 * 6.0);
    for i in 1..=5 {
        assert!((empty.relative(i, 0) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn seeds_are_deterministic_and_distinct() {
    let a = sample_network(&two_tier_preset("C3", 17).unwrap()).unwrap();
    let b = sample_network(&two_tier_preset("C3", 17).unwrap()).unwrap();
    let c = sample_network(&two_tier_preset("C3", 18).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
