use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid search is exponential in the capital dimension; larger dimensions
/// need [`GridSpec::allow_high_dim`].
pub const MAX_DIM: usize = 4;

/// Box of capital allocations and its lattice resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Lattice points per dimension, at least 2.
    pub points: Vec<usize>,
    /// Restrict allocations to the non-negative orthant.
    #[serde(default)]
    pub nonneg: bool,
    #[serde(default)]
    pub allow_high_dim: bool,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: Vec<usize>) -> Self {
        Self {
            lower,
            upper,
            points,
            nonneg: false,
            allow_high_dim: false,
        }
    }

    /// Same number of points in every dimension.
    pub fn uniform(lower: Vec<f64>, upper: Vec<f64>, points: usize) -> Self {
        let l = lower.len();
        Self::new(lower, upper, vec![points; l])
    }

    /// Lattice with spacing `h` in every dimension; the box extent must be a
    /// whole multiple of `h`.
    pub fn with_spacing(lower: Vec<f64>, upper: Vec<f64>, h: f64) -> Result<Self> {
        let mut points = Vec::with_capacity(lower.len());
        for (lo, hi) in lower.iter().zip(&upper) {
            let steps = (hi - lo) / h;
            let rounded = steps.round();
            if !(h > 0.0) || (steps - rounded).abs() > 1e-9 || rounded < 1.0 {
                return Err(Error::Config(format!(
                    "spacing {h} does not divide the box [{lo}, {hi}]"
                )));
            }
            points.push(rounded as usize + 1);
        }
        Ok(Self::new(lower, upper, points))
    }

    pub fn nonneg(mut self, on: bool) -> Self {
        self.nonneg = on;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// The box actually searched: clipped at zero under the non-negativity
    /// constraint.
    pub fn effective_lower(&self) -> Vec<f64> {
        if self.nonneg {
            self.lower.iter().map(|v| v.max(0.0)).collect()
        } else {
            self.lower.clone()
        }
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.effective_lower()
            .iter()
            .zip(&self.upper)
            .zip(&self.points)
            .map(|((lo, hi), &n)| (hi - lo) / (n - 1) as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.dim();
        if l == 0 || self.upper.len() != l || self.points.len() != l {
            return Err(Error::Config("grid bounds and resolution must share one dimension".into()));
        }
        if l > MAX_DIM && !self.allow_high_dim {
            return Err(Error::Config(format!(
                "grid dimension {l} exceeds {MAX_DIM}; set allow_high_dim to override"
            )));
        }
        for ((lo, hi), &n) in self.effective_lower().iter().zip(&self.upper).zip(&self.points) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("grid bounds [{lo}, {hi}] are not a proper interval")));
            }
            if n < 2 {
                return Err(Error::Config("grid needs at least 2 points per dimension".into()));
            }
        }
        Ok(())
    }

    /// Same box with `(points - 1) * factor + 1` points per dimension.
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        out.points = self.points.iter().map(|n| (n - 1) * factor + 1).collect();
        out
    }
}

/// Row-major lattice over a validated [`GridSpec`]; the last coordinate
/// varies fastest, so flat order is lexicographic.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
    strides: Vec<usize>,
    pub total: usize,
}

impl Lattice {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let points = grid.points.clone();
        let mut strides = vec![1; points.len()];
        for j in (0..points.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * points[j + 1];
        }
        let total = points.iter().product();
        Ok(Self {
            lower: grid.effective_lower(),
            upper: grid.upper.clone(),
            points,
            strides,
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect()
    }

    pub fn coord_1d(&self, j: usize, i: usize) -> f64 {
        let n = self.points[j] - 1;
        if i == n {
            return self.upper[j];
        }
        self.lower[j] + (self.upper[j] - self.lower[j]) * (i as f64 / n as f64)
    }

    pub fn coord(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(j, &i)| self.coord_1d(j, i)).collect()
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| (self.upper[j] - self.lower[j]) / (self.points[j] - 1) as f64)
            .collect()
    }

    pub fn upper_corner(&self) -> Vec<usize> {
        self.points.iter().map(|n| n - 1).collect()
    }

    /// Calls `f` on every flat index in the inclusive box `[lo, hi]`, in
    /// lexicographic order.
    pub fn for_each_in_box(&self, lo: &[usize], hi: &[usize], mut f: impl FnMut(usize)) {
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return;
        }
        let l = self.dim();
        let mut idx = lo.to_vec();
        loop {
            f(self.flat(&idx));
            let mut j = l;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                if idx[j] < hi[j] {
                    idx[j] += 1;
                    break;
                }
                idx[j] = lo[j];
            }
        }
    }

    /// Number of cells (sub-boxes spanned by adjacent lattice points).
    pub fn cell_points(&self) -> Vec<usize> {
        self.points.iter().map(|n| n - 1).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_points() {
        let g = GridSpec::with_spacing(vec![0.0, 0.0], vec![4.0, 2.0], 0.5).unwrap();
        assert_eq!(g.points, vec![9, 5]);
        assert_eq!(g.spacing(), vec![0.5, 0.5]);
        assert!(GridSpec::with_spacing(vec![0.0], vec![1.0], 0.3).is_err());
    }

    #[test]
    fn nonneg_clips_lower_bound() {
        let g = GridSpec::uniform(vec![-1.0, 0.5], vec![3.0, 2.5], 5).nonneg(true);
        assert_eq!(g.effective_lower(), vec![0.0, 0.5]);
        assert_eq!(g.spacing(), vec![0.75, 0.5]);
    }

    #[test]
    fn dimension_guard() {
        let g = GridSpec::uniform(vec![0.0; 5], vec![1.0; 5], 2);
        assert!(g.validate().is_err());
        let mut g = g;
        g.allow_high_dim = true;
        g.validate().unwrap();
    }

    #[test]
    fn invalid_boxes() {
        assert!(GridSpec::uniform(vec![1.0], vec![1.0], 3).validate().is_err());
        assert!(GridSpec::uniform(vec![0.0], vec![1.0], 1).validate().is_err());
        assert!(GridSpec::uniform(vec![-2.0], vec![-1.0], 3).nonneg(true).validate().is_err());
    }

    #[test]
    fn flat_round_trip_and_box_order() {
        let lat = Lattice::new(&GridSpec::new(vec![0.0; 3], vec![1.0; 3], vec![2, 3, 4])).unwrap();
        assert_eq!(lat.total, 24);
        for f in 0..lat.total {
            assert_eq!(lat.flat(&lat.unflat(f)), f);
        }
        let mut seen = Vec::new();
        lat.for_each_in_box(&[1, 1, 2], &[1, 2, 3], |f| seen.push(lat.unflat(f)));
        assert_eq!(seen, vec![vec![1, 1, 2], vec![1, 1, 3], vec![1, 2, 2], vec![1, 2, 3]]);
    }

    #[test]
    fn coordinates_hit_bounds() {
        let lat = Lattice::new(&GridSpec::uniform(vec![0.1], vec![0.7], 4)).unwrap();
        assert_eq!(lat.coord(&[0]), vec![0.1]);
        assert_eq!(lat.coord(&[3]), vec![0.7]);
    }
}
