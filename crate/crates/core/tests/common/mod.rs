//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Nominal obligations over society + `n` firms: each firm-to-node link
/// present with probability 0.6, amount uniform in `[0.1, 5)`.
pub fn random_nominal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut nominal = vec![vec![0.0; n + 1]; n + 1];
    for i in 1..=n {
        for j in 0..=n {
            if i != j && rng.random_bool(0.6) {
                nominal[i][j] = rng.random_range(0.1..5.0);
            }
        }
    }
    nominal
}

/// Eisenberg-Noe payments without fire sales, iterated upward from zero.
pub fn least_fixed_point(nominal: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let size = nominal.len();
    let pbar: Vec<f64> = nominal.iter().map(|r| r.iter().sum()).collect();
    let rel = |i: usize, j: usize| if pbar[i] > 0.0 { nominal[i][j] / pbar[i] } else { 0.0 };
    let mut p = vec![0.0; size];
    p[0] = pbar[0];
    for _ in 0..1_000_000 {
        let mut next = p.clone();
        let mut change: f64 = 0.0;
        for i in 1..size {
            let inflow: f64 = (0..size).filter(|&j| j != i).map(|j| rel(j, i) * p[j]).sum();
            next[i] = pbar[i].min(x[i - 1] + inflow);
            change = change.max((next[i] - p[i]).abs());
        }
        p = next;
        if change < 1e-15 {
            break;
        }
    }
    p
}
