use serde::{Deserialize, Serialize};

use super::lattice::{GridSpec, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Unevaluated,
    Acceptable,
    Unacceptable,
}

impl Label {
    pub fn from_accept(ok: bool) -> Self {
        if ok {
            Label::Acceptable
        } else {
            Label::Unacceptable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Unevaluated => "unevaluated",
            Label::Acceptable => "acceptable",
            Label::Unacceptable => "unacceptable",
        }
    }
}

/// The box lies entirely on one side of the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// The lower corner is already acceptable.
    AllAcceptable,
    /// Even the upper corner is unacceptable.
    NoneAcceptable,
}

/// Labeled lattice with its inner and outer frontiers.
///
/// The inner frontier holds the minimal acceptable lattice points, the
/// outer frontier the maximal unacceptable ones. With `v` the spacing,
/// `inner + R^l_+ ⊆ R ⊆ inner + R^l_+ - v` inside the box.
#[derive(Debug, Clone)]
pub struct GridApproximation {
    pub grid: GridSpec,
    pub labels: Vec<Label>,
    pub inner_frontier: Vec<Vec<f64>>,
    pub outer_frontier: Vec<Vec<f64>>,
    pub spacing: Vec<f64>,
    pub oracle_calls: usize,
    pub degenerate: Option<Degeneracy>,
    /// Oracle answers that contradicted an already propagated label.
    pub monotonicity_violations: usize,
    pub(crate) lattice: Lattice,
    pub(crate) outer_idx: Vec<usize>,
}

/// Result of checking the sandwich property on a finished approximation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichCertificate {
    pub outer_points_checked: usize,
    /// Outer points whose `+v` neighbour is inside the box but not acceptable.
    pub failures: usize,
    /// Acceptable points with an unacceptable point in their upper orthant.
    pub label_violations: usize,
    pub unlabeled: usize,
}

impl SandwichCertificate {
    pub fn holds(&self) -> bool {
        self.failures == 0 && self.label_violations == 0 && self.unlabeled == 0
    }
}

impl GridApproximation {
    pub(crate) fn assemble(
        grid: GridSpec,
        lattice: Lattice,
        labels: Vec<Label>,
        oracle_calls: usize,
        degenerate: Option<Degeneracy>,
        monotonicity_violations: usize,
    ) -> Self {
        let spacing = lattice.spacing();
        let (inner_idx, outer_idx) = if degenerate.is_some() {
            (Vec::new(), Vec::new())
        } else {
            frontiers(&lattice, &labels)
        };
        let inner_frontier = inner_idx.iter().map(|&f| lattice.coord(&lattice.unflat(f))).collect();
        let outer_frontier = outer_idx.iter().map(|&f| lattice.coord(&lattice.unflat(f))).collect();
        Self {
            grid,
            labels,
            inner_frontier,
            outer_frontier,
            spacing,
            oracle_calls,
            degenerate,
            monotonicity_violations,
            lattice,
            outer_idx,
        }
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn total_points(&self) -> usize {
        self.lattice.total
    }

    /// Lattice points per dimension.
    pub fn points(&self) -> &[usize] {
        &self.lattice.points
    }

    pub fn label_at(&self, idx: &[usize]) -> Label {
        self.labels[self.lattice.flat(idx)]
    }

    /// Coordinates of a lattice multi-index.
    pub fn coord(&self, idx: &[usize]) -> Vec<f64> {
        self.lattice.coord(idx)
    }

    /// Lattice multi-index of a flat position.
    pub fn index_of(&self, flat: usize) -> Vec<usize> {
        self.lattice.unflat(flat)
    }

    /// Every lattice point with its label, in lexicographic order.
    pub fn labeled_points(&self) -> impl Iterator<Item = (Vec<f64>, Label)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .map(|(f, &l)| (self.lattice.coord(&self.lattice.unflat(f)), l))
    }

    /// Label of the lattice point at coordinates `k` (nearest index), or
    /// `None` outside the box.
    pub fn label_near(&self, k: &[f64]) -> Option<Label> {
        let mut idx = Vec::with_capacity(k.len());
        for (j, &v) in k.iter().enumerate() {
            let h = self.spacing[j];
            let t = ((v - self.lattice.lower[j]) / h).round();
            if t < 0.0 || t > (self.lattice.points[j] - 1) as f64 {
                return None;
            }
            idx.push(t as usize);
        }
        Some(self.label_at(&idx))
    }

    /// Whether `k` lies in `inner + R^l_+`.
    pub fn inner_covers(&self, k: &[f64]) -> bool {
        self.inner_frontier
            .iter()
            .any(|p| p.iter().zip(k).all(|(a, b)| a <= b))
    }

    /// Whether `k` lies in `inner + R^l_+ - v`.
    pub fn outer_covers(&self, k: &[f64]) -> bool {
        self.inner_frontier.iter().any(|p| {
            p.iter()
                .zip(k)
                .zip(&self.spacing)
                .all(|((a, b), h)| a - h <= *b + 1e-12 * h)
        })
    }

    /// Checks label monotonicity and that every outer point shifted by `v`
    /// is acceptable or leaves the box.
    pub fn certify(&self) -> SandwichCertificate {
        let lat = &self.lattice;
        let top = lat.upper_corner();
        let unlabeled = self.labels.iter().filter(|l| **l == Label::Unevaluated).count();

        let mut failures = 0;
        for &f in &self.outer_idx {
            let idx = lat.unflat(f);
            if idx.iter().zip(&top).any(|(i, t)| i >= t) {
                continue;
            }
            let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            if self.labels[lat.flat(&shifted)] != Label::Acceptable {
                failures += 1;
            }
        }

        // An acceptable point must not have an unacceptable successor along
        // any axis; with that local condition the upper orthant is clean.
        let mut label_violations = 0;
        for f in 0..lat.total {
            if self.labels[f] != Label::Acceptable {
                continue;
            }
            let idx = lat.unflat(f);
            for j in 0..lat.dim() {
                if idx[j] + 1 < lat.points[j] {
                    let mut next = idx.clone();
                    next[j] += 1;
                    if self.labels[lat.flat(&next)] == Label::Unacceptable {
                        label_violations += 1;
                    }
                }
            }
        }
        SandwichCertificate {
            outer_points_checked: self.outer_idx.len(),
            failures,
            label_violations,
            unlabeled,
        }
    }

    /// Lower-left convex hull of the inner frontier (2-D only), ordered by
    /// the first coordinate.
    pub fn inner_hull_2d(&self) -> Option<Vec<Vec<f64>>> {
        if self.dim() != 2 || self.inner_frontier.is_empty() {
            return None;
        }
        let mut pts: Vec<(f64, f64)> = self.inner_frontier.iter().map(|p| (p[0], p[1])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for p in pts {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        Some(hull.into_iter().map(|(a, b)| vec![a, b]).collect())
    }
}

/// Minimal acceptable and maximal unacceptable points, as flat indices.
fn frontiers(lat: &Lattice, labels: &[Label]) -> (Vec<usize>, Vec<usize>) {
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for f in 0..lat.total {
        let idx = lat.unflat(f);
        match labels[f] {
            Label::Acceptable => {
                let minimal = (0..lat.dim()).all(|j| {
                    if idx[j] == 0 {
                        return true;
                    }
                    let mut prev = idx.clone();
                    prev[j] -= 1;
                    labels[lat.flat(&prev)] != Label::Acceptable
                });
                if minimal {
                    inner.push(f);
                }
            }
            Label::Unacceptable => {
                let maximal = (0..lat.dim()).all(|j| {
                    if idx[j] + 1 == lat.points[j] {
                        return true;
                    }
                    let mut next = idx.clone();
                    next[j] += 1;
                    labels[lat.flat(&next)] != Label::Unacceptable
                });
                if maximal {
                    outer.push(f);
                }
            }
            Label::Unevaluated => {}
        }
    }
    (inner, outer)
}
