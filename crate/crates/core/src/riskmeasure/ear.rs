//! Efficient allocation rules by weighted scalarization.
//!
//! For a strictly positive weight vector `w`, minimizers of `w · m` over the
//! inner frontier are minimal points of the approximated risk measure. Ties
//! (a face of the frontier orthogonal to `w`) are all reported.

use serde::{Deserialize, Serialize};

use super::approximation::{GridApproximation, Label};
use crate::error::{Error, Result};

/// Relative tolerance for treating two weighted costs as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarResult {
    pub weights: Vec<f64>,
    pub minimizers: Vec<Vec<f64>>,
    pub min_value: f64,
    /// Some minimizer sits on a box face other than a non-negativity
    /// constraint; the box may be too small or `w` outside the admissible
    /// dual cone.
    pub on_box_boundary: bool,
}

/// Minimizes `w · m` over the inner frontier.
pub fn ear(approx: &GridApproximation, weights: &[f64]) -> Result<EarResult> {
    if weights.len() != approx.dim() {
        return Err(Error::Parameter(format!(
            "{} weights for a {}-dimensional allocation",
            weights.len(),
            approx.dim()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Parameter(format!(
            "allocation weights must be strictly positive, got {weights:?}"
        )));
    }
    if approx.inner_frontier.is_empty() {
        return Err(Error::DegenerateBox(match approx.degenerate {
            Some(kind) => format!("no inner frontier ({kind:?}); move or enlarge the box"),
            None => "no inner frontier".into(),
        }));
    }
    let cost = |m: &[f64]| m.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
    let min_value = approx
        .inner_frontier
        .iter()
        .map(|m| cost(m))
        .fold(f64::INFINITY, f64::min);
    let slack = TIE_TOLERANCE * min_value.abs().max(f64::MIN_POSITIVE);
    let minimizers: Vec<Vec<f64>> = approx
        .inner_frontier
        .iter()
        .filter(|m| cost(m) - min_value <= slack)
        .cloned()
        .collect();

    let lower = approx.grid.effective_lower();
    let upper = &approx.grid.upper;
    let constrained: Vec<bool> = approx
        .grid
        .lower
        .iter()
        .map(|lo| approx.grid.nonneg && *lo <= 0.0)
        .collect();
    let on_box_boundary = minimizers.iter().any(|m| {
        m.iter().enumerate().any(|(j, &v)| {
            let h = approx.spacing[j];
            let at_lower = (v - lower[j]).abs() < 1e-9 * h && !constrained[j];
            let at_upper = (v - upper[j]).abs() < 1e-9 * h;
            at_lower || at_upper
        })
    });
    Ok(EarResult {
        weights: weights.to_vec(),
        minimizers,
        min_value,
        on_box_boundary,
    })
}

/// Whether `point` is a minimal acceptable lattice point: no other
/// acceptable lattice point lies componentwise below it.
pub fn is_undominated(approx: &GridApproximation, point: &[f64]) -> bool {
    approx.labeled_points().all(|(q, label)| {
        label != Label::Acceptable
            || q == point
            || !q.iter().zip(point).all(|(a, b)| a <= b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskmeasure::{grid_search, FnOracle, GridSpec};

    fn half_space() -> GridApproximation {
        let oracle = FnOracle::new(2, |k: &[f64]| k[0] + k[1] >= 2.0);
        grid_search(&oracle, &GridSpec::uniform(vec![0.0, 0.0], vec![4.0, 4.0], 5)).unwrap()
    }

    #[test]
    fn symmetric_weights_report_full_tie() {
        let r = ear(&half_space(), &[1.0, 1.0]).unwrap();
        let mut m = r.minimizers.clone();
        m.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(m, vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(r.min_value, 2.0);
    }

    #[test]
    fn skewed_weights_pick_cheap_group() {
        let r = ear(&half_space(), &[2.0, 1.0]).unwrap();
        assert_eq!(r.minimizers, vec![vec![0.0, 2.0]]);
        assert_eq!(r.min_value, 2.0);
        assert!(r.on_box_boundary);
    }

    #[test]
    fn weights_validated() {
        assert!(ear(&half_space(), &[1.0, 0.0]).is_err());
        assert!(ear(&half_space(), &[1.0]).is_err());
    }

    #[test]
    fn minimizers_are_undominated() {
        let approx = half_space();
        for w in [[1.0, 1.0], [10.0, 90.0], [3.0, 0.5]] {
            for m in ear(&approx, &w).unwrap().minimizers {
                assert!(is_undominated(&approx, &m));
            }
        }
        assert!(!is_undominated(&approx, &[2.0, 2.0]));
    }

    #[test]
    fn empty_frontier_is_degenerate() {
        let oracle = FnOracle::new(2, |_: &[f64]| false);
        let approx = grid_search(&oracle, &GridSpec::uniform(vec![0.0, 0.0], vec![1.0, 1.0], 3)).unwrap();
        assert!(matches!(ear(&approx, &[1.0, 1.0]), Err(Error::DegenerateBox(_))));
    }
}
