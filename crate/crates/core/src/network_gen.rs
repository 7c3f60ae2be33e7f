//! Grouped random liability networks.
//!
//! Firms are partitioned into groups; a link from a firm in group `a` to a
//! distinct firm in group `b` exists independently with probability
//! `q[a][b]` and carries obligation `w[a][b]`. Every firm owes the society
//! its group's `w_society` with certainty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clearing::{build_relative, LiabilityNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGenSpec {
    pub group_sizes: Vec<usize>,
    /// Link probabilities, `q[from_group][to_group]`.
    pub q: Vec<Vec<f64>>,
    /// Obligation per link, `w[from_group][to_group]`.
    pub w: Vec<Vec<f64>>,
    /// Obligation of each firm in a group to the society.
    pub w_society: Vec<f64>,
    pub seed: u64,
}

impl NetworkGenSpec {
    pub fn validate(&self) -> Result<()> {
        let l = self.group_sizes.len();
        if l == 0 || self.group_sizes.contains(&0) {
            return Err(Error::Config("network groups must be non-empty".into()));
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == l && m.iter().all(|r| r.len() == l);
        if !square(&self.q) || !square(&self.w) || self.w_society.len() != l {
            return Err(Error::Config(format!("q, w and w_society must be sized for {l} groups")));
        }
        if self.q.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("link probabilities must lie in [0,1]".into()));
        }
        if self
            .w
            .iter()
            .flatten()
            .chain(&self.w_society)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::Config("obligation sizes must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn n_firms(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Samples one network. Links are drawn row-major over ordered firm pairs
/// `(i, j)`, `i != j`, one uniform draw per pair, so a seed reproduces the
/// same network everywhere.
pub fn sample_network(spec: &NetworkGenSpec) -> Result<LiabilityNetwork> {
    spec.validate()?;
    let n = spec.n_firms();
    let group_of: Vec<usize> = spec
        .group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &size)| std::iter::repeat_n(g, size))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut nominal = vec![vec![0.0; n + 1]; n + 1];
    for i in 1..=n {
        let gi = group_of[i - 1];
        nominal[i][0] = spec.w_society[gi];
        for j in 1..=n {
            if i == j {
                continue;
            }
            let gj = group_of[j - 1];
            let u: f64 = rng.random();
            if u < spec.q[gi][gj] {
                nominal[i][j] = spec.w[gi][gj];
            }
        }
    }
    build_relative(&nominal)?.with_groups(spec.group_sizes.clone())
}

/// Two-tier scenarios: 10 large and 90 small firms.
pub const TWO_TIER_SCENARIOS: [(&str, [f64; 4]); 14] = [
    ("A1", [0.10, 0.10, 0.10, 0.10]),
    ("A2", [0.90, 0.35, 0.35, 0.04]),
    ("A3", [0.90, 0.50, 0.30, 0.03]),
    ("A4", [1.00, 0.09, 0.09, 0.09]),
    ("B1", [0.60, 0.20, 0.20, 0.30]),
    ("B2", [0.60, 0.20, 0.20, 0.10]),
    ("B3", [0.10, 0.20, 0.20, 0.30]),
    ("B4", [0.10, 0.20, 0.20, 0.10]),
    ("C1", [0.60, 0.20, 0.20, 0.30]),
    ("C2", [0.60, 0.50, 0.50, 0.30]),
    ("C3", [0.60, 0.30, 0.10, 0.30]),
    ("C4", [0.60, 0.60, 0.40, 0.30]),
    ("C5", [0.60, 0.10, 0.30, 0.30]),
    ("C6", [0.60, 0.40, 0.60, 0.30]),
];

/// Two-tier network preset by scenario id (`A1`..`A4`, `B1`..`B4`,
/// `C1`..`C6`). Probabilities are `(q11, q12, q21, q22)`; large firms owe
/// each other 10, small firms 1, cross-group links 2; society claims 10 per
/// large and 1 per small firm.
pub fn two_tier_preset(scenario: &str, seed: u64) -> Result<NetworkGenSpec> {
    let (_, q) = TWO_TIER_SCENARIOS
        .iter()
        .find(|(id, _)| id.eq_ignore_ascii_case(scenario))
        .ok_or_else(|| Error::Config(format!("unknown two-tier scenario {scenario}")))?;
    Ok(NetworkGenSpec {
        group_sizes: vec![10, 90],
        q: vec![vec![q[0], q[1]], vec![q[2], q[3]]],
        w: vec![vec![10.0, 2.0], vec![2.0, 1.0]],
        w_society: vec![10.0, 1.0],
        seed,
    })
}

/// Three-tier network: 10 large, 90 medium, 200 small firms, obligations
/// in units of 1/480.
pub fn three_tier_preset(seed: u64) -> NetworkGenSpec {
    let u = 1.0 / 480.0;
    NetworkGenSpec {
        group_sizes: vec![10, 90, 200],
        q: vec![
            vec![1.00, 0.80, 0.60],
            vec![0.60, 0.40, 0.20],
            vec![0.20, 0.05, 0.00],
        ],
        w: vec![
            vec![10.0 * u, 3.0 * u, 3.0 * u],
            vec![3.0 * u, 2.0 * u, 2.0 * u],
            vec![1.0 * u, 1.0 * u, 1.0 * u],
        ],
        w_society: vec![10.0 * u, 2.0 * u, 1.0 * u],
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q: f64) -> NetworkGenSpec {
        NetworkGenSpec {
            group_sizes: vec![2, 3],
            q: vec![vec![q, q], vec![q, q]],
            w: vec![vec![4.0, 3.0], vec![2.0, 1.0]],
            w_society: vec![5.0, 0.5],
            seed: 7,
        }
    }

    #[test]
    fn complete_graph_when_certain() {
        let net = sample_network(&spec(1.0)).unwrap();
        assert_eq!(net.firm_edge_count(), 5 * 4);
        assert_eq!(net.nominal(1, 2), 4.0);
        assert_eq!(net.nominal(1, 3), 3.0);
        assert_eq!(net.nominal(3, 1), 2.0);
        assert_eq!(net.nominal(4, 5), 1.0);
        for i in 1..=5 {
            assert_eq!(net.nominal(i, i), 0.0);
        }
    }

    #[test]
    fn only_society_edges_when_impossible() {
        let net = sample_network(&spec(0.0)).unwrap();
        assert_eq!(net.firm_edge_count(), 0);
        assert_eq!(net.nominal(1, 0), 5.0);
        assert_eq!(net.nominal(5, 0), 0.5);
        for j in 0..=5 {
            assert_eq!(net.nominal(0, j), 0.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_network(&spec(0.5)).unwrap();
        let b = sample_network(&spec(0.5)).unwrap();
        assert_eq!(a, b);
        let c = sample_network(&spec(0.5).with_seed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(0.5);
        s.q[0][1] = 1.5;
        assert!(sample_network(&s).is_err());
        let mut s = spec(0.5);
        s.w_society.pop();
        assert!(sample_network(&s).is_err());
        assert!(two_tier_preset("Z9", 0).is_err());
    }

    #[test]
    fn presets_have_expected_sizes() {
        let a1 = two_tier_preset("a1", 1).unwrap();
        assert_eq!(a1.n_firms(), 100);
        let three = three_tier_preset(1);
        assert_eq!(three.n_firms(), 300);
        three.validate().unwrap();
    }
}
