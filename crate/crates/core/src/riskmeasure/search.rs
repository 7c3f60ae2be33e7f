//! Grid search over a box of capital allocations.
//!
//! The search starts with a bisection along the box diagonal to find one
//! sub-box crossed by the boundary, then walks neighbouring sub-boxes that
//! straddle the boundary. Every oracle answer is propagated: an acceptable
//! point labels its upper orthant, an unacceptable point its lower orthant.
//! A final lexicographic sweep labels anything the walk did not reach.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::approximation::{Degeneracy, GridApproximation, Label};
use super::lattice::{GridSpec, Lattice};
use super::oracle::Oracle;
use crate::error::{Error, Result};

/// Outcome of the diagonal bisection.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagonalOutcome {
    /// Adjacent diagonal lattice points with oracle values (false, true).
    Straddle { last_out: Vec<f64>, first_in: Vec<f64> },
    AllAcceptable,
    NoneAcceptable,
}

/// Lattice point `t` of the diagonal from the lower to the upper corner.
fn diagonal_point(lat: &Lattice, t: usize, steps: usize) -> Vec<usize> {
    lat.points.iter().map(|&n| t * (n - 1) / steps).collect()
}

fn diagonal_steps(lat: &Lattice) -> usize {
    lat.points.iter().map(|n| n - 1).max().unwrap_or(0)
}

/// Bisection along the diagonal `(1, ..., 1)` of the box.
pub fn diagonal_bisection<O: Oracle>(oracle: &O, grid: &GridSpec) -> Result<DiagonalOutcome> {
    let lat = Lattice::new(grid)?;
    check_dim(oracle, &lat)?;
    let mut search = Search::new(oracle, &lat);
    match search.bracket()? {
        Some(Degeneracy::AllAcceptable) => Ok(DiagonalOutcome::AllAcceptable),
        Some(Degeneracy::NoneAcceptable) => Ok(DiagonalOutcome::NoneAcceptable),
        None => {
            let (lo, hi) = search.bisect_diagonal()?;
            Ok(DiagonalOutcome::Straddle {
                last_out: lat.coord(&lo),
                first_in: lat.coord(&hi),
            })
        }
    }
}

/// Labels every lattice point of the box.
pub fn grid_search<O: Oracle>(oracle: &O, grid: &GridSpec) -> Result<GridApproximation> {
    let lat = Lattice::new(grid)?;
    check_dim(oracle, &lat)?;
    let mut search = Search::new(oracle, &lat);
    let degenerate = search.run()?;
    let (labels, calls, violations) = (search.labels, search.calls, search.violations);
    Ok(GridApproximation::assemble(
        grid.clone(),
        lat,
        labels,
        calls,
        degenerate,
        violations,
    ))
}

/// Refines an approximation by dividing the spacing by `factor`.
///
/// Sub-boxes whose corners share one label are filled without oracle calls
/// (an acceptable lower corner or an unacceptable upper corner decides the
/// whole sub-box). Straddling sub-boxes are searched independently on the
/// finer lattice, in parallel.
///
/// A degenerate approximation is returned unchanged.
pub fn refine<O: Oracle>(oracle: &O, approx: &GridApproximation, factor: usize) -> Result<GridApproximation> {
    if factor == 0 {
        return Err(Error::Parameter("refinement factor must be positive".into()));
    }
    if factor == 1 {
        return Ok(approx.clone());
    }
    let coarse = &approx.lattice;
    let fine_grid = approx.grid.refined(factor);
    let fine = Lattice::new(&fine_grid)?;
    check_dim(oracle, &fine)?;

    if approx.degenerate.is_some() {
        return Ok(approx.clone());
    }

    let mut labels = vec![Label::Unevaluated; fine.total];
    for f in 0..coarse.total {
        let idx: Vec<usize> = coarse.unflat(f).iter().map(|i| i * factor).collect();
        labels[fine.flat(&idx)] = approx.labels[f];
    }

    let cells = coarse.cell_points();
    let mut straddling = Vec::new();
    let zero = vec![0; coarse.dim()];
    let last: Vec<usize> = cells.iter().map(|c| c - 1).collect();
    coarse.for_each_in_box(&zero, &last, |cf| {
        let cell = coarse.unflat(cf);
        let mut seen_in = false;
        let mut seen_out = false;
        for_each_corner(coarse, &cell, |f| match approx.labels[f] {
            Label::Acceptable => seen_in = true,
            Label::Unacceptable => seen_out = true,
            Label::Unevaluated => {}
        });
        let lo: Vec<usize> = cell.iter().map(|c| c * factor).collect();
        let hi: Vec<usize> = cell.iter().map(|c| (c + 1) * factor).collect();
        match (seen_in, seen_out) {
            (true, false) | (false, true) => {
                let label = if seen_in { Label::Acceptable } else { Label::Unacceptable };
                fine.for_each_in_box(&lo, &hi, |f| labels[f] = label);
            }
            _ => straddling.push((lo, hi)),
        }
    });

    let jobs: Vec<(Vec<usize>, Vec<usize>, GridApproximation)> = straddling
        .into_par_iter()
        .map(|(lo, hi)| {
            let sub = GridSpec {
                lower: fine.coord(&lo),
                upper: fine.coord(&hi),
                points: vec![factor + 1; fine.dim()],
                nonneg: false,
                allow_high_dim: fine_grid.allow_high_dim,
            };
            let sub_lat = Lattice::new(&sub)?;
            let mut seeds = vec![Label::Unevaluated; sub_lat.total];
            let offsets: Vec<usize> = vec![0; sub_lat.dim()];
            let top = sub_lat.upper_corner();
            sub_lat.for_each_in_box(&offsets, &top, |sf| {
                let local = sub_lat.unflat(sf);
                let global: Vec<usize> = local.iter().zip(&lo).map(|(a, b)| a + b).collect();
                seeds[sf] = labels[fine.flat(&global)];
            });
            let mut search = Search::seeded(oracle, &sub_lat, seeds);
            let degenerate = search.run()?;
            let approx = GridApproximation::assemble(
                sub.clone(),
                sub_lat.clone(),
                search.labels,
                search.calls,
                degenerate,
                search.violations,
            );
            Ok((lo, hi, approx))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut calls = approx.oracle_calls;
    let mut violations = approx.monotonicity_violations;
    for (lo, _, sub) in &jobs {
        calls += sub.oracle_calls;
        violations += sub.monotonicity_violations;
        for (sf, label) in sub.labels.iter().enumerate() {
            let local = sub.lattice.unflat(sf);
            let global: Vec<usize> = local.iter().zip(lo).map(|(a, b)| a + b).collect();
            let slot = &mut labels[fine.flat(&global)];
            if *slot != Label::Unevaluated && *slot != *label {
                violations += 1;
            }
            *slot = *label;
        }
    }
    Ok(GridApproximation::assemble(
        fine_grid, fine, labels, calls, None, violations,
    ))
}

fn check_dim<O: Oracle>(oracle: &O, lat: &Lattice) -> Result<()> {
    if oracle.dim() != lat.dim() {
        return Err(Error::Config(format!(
            "oracle has dimension {} but the grid has {}",
            oracle.dim(),
            lat.dim()
        )));
    }
    Ok(())
}

fn for_each_corner(lat: &Lattice, cell: &[usize], mut f: impl FnMut(usize)) {
    let l = lat.dim();
    let mut idx = cell.to_vec();
    for mask in 0..(1usize << l) {
        for j in 0..l {
            idx[j] = cell[j] + ((mask >> (l - 1 - j)) & 1);
        }
        f(lat.flat(&idx));
    }
}

struct Search<'a, O> {
    oracle: &'a O,
    lat: &'a Lattice,
    labels: Vec<Label>,
    calls: usize,
    violations: usize,
    visited: Vec<bool>,
    cell_strides: Vec<usize>,
}

impl<'a, O: Oracle> Search<'a, O> {
    fn new(oracle: &'a O, lat: &'a Lattice) -> Self {
        Self::seeded(oracle, lat, vec![Label::Unevaluated; lat.total])
    }

    fn seeded(oracle: &'a O, lat: &'a Lattice, labels: Vec<Label>) -> Self {
        let cells = lat.cell_points();
        let mut cell_strides = vec![1; cells.len()];
        for j in (0..cells.len().saturating_sub(1)).rev() {
            cell_strides[j] = cell_strides[j + 1] * cells[j + 1];
        }
        Self {
            oracle,
            lat,
            labels,
            calls: 0,
            violations: 0,
            visited: vec![false; cells.iter().product()],
            cell_strides,
        }
    }

    fn label(&mut self, idx: &[usize]) -> Result<Label> {
        let f = self.lat.flat(idx);
        if self.labels[f] != Label::Unevaluated {
            return Ok(self.labels[f]);
        }
        let k = self.lat.coord(idx);
        let label = Label::from_accept(self.oracle.accepts(&k)?);
        self.calls += 1;
        self.propagate(idx, label);
        Ok(label)
    }

    fn propagate(&mut self, idx: &[usize], label: Label) {
        let (lo, hi) = match label {
            Label::Acceptable => (idx.to_vec(), self.lat.upper_corner()),
            Label::Unacceptable => (vec![0; idx.len()], idx.to_vec()),
            Label::Unevaluated => return,
        };
        let labels = &mut self.labels;
        let mut violations = 0;
        self.lat.for_each_in_box(&lo, &hi, |f| {
            let slot = &mut labels[f];
            if *slot == Label::Unevaluated {
                *slot = label;
            } else if *slot != label {
                violations += 1;
            }
        });
        self.violations += violations;
    }

    /// Seeds labels already present are propagated, then both corners are
    /// checked.
    fn bracket(&mut self) -> Result<Option<Degeneracy>> {
        for f in 0..self.lat.total {
            let label = self.labels[f];
            if label != Label::Unevaluated {
                let idx = self.lat.unflat(f);
                self.propagate(&idx, label);
            }
        }
        let bottom = vec![0; self.lat.dim()];
        if self.label(&bottom)? == Label::Acceptable {
            return Ok(Some(Degeneracy::AllAcceptable));
        }
        let top = self.lat.upper_corner();
        if self.label(&top)? == Label::Unacceptable {
            return Ok(Some(Degeneracy::NoneAcceptable));
        }
        Ok(None)
    }

    fn bisect_diagonal(&mut self) -> Result<(Vec<usize>, Vec<usize>)> {
        let steps = diagonal_steps(self.lat);
        let (mut lo, mut hi) = (0, steps);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let point = diagonal_point(self.lat, mid, steps);
            if self.label(&point)? == Label::Acceptable {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((diagonal_point(self.lat, lo, steps), diagonal_point(self.lat, hi, steps)))
    }

    fn run(&mut self) -> Result<Option<Degeneracy>> {
        if let Some(kind) = self.bracket()? {
            return Ok(Some(kind));
        }
        let (lo, _) = self.bisect_diagonal()?;
        let cell: Vec<usize> = lo
            .iter()
            .zip(&self.lat.points)
            .map(|(&i, &n)| i.min(n - 2))
            .collect();
        self.walk(cell)?;

        for f in 0..self.lat.total {
            if self.labels[f] != Label::Unevaluated {
                continue;
            }
            let idx = self.lat.unflat(f);
            self.label(&idx)?;
            // resume the walk from every sub-box touching the new point
            let l = self.lat.dim();
            for mask in 0..(1usize << l) {
                let cell: Option<Vec<usize>> = (0..l)
                    .map(|j| {
                        let back = (mask >> j) & 1;
                        let c = idx[j].checked_sub(back)?;
                        (c + 1 < self.lat.points[j]).then_some(c)
                    })
                    .collect();
                if let Some(cell) = cell {
                    self.walk(cell)?;
                }
            }
        }
        Ok(None)
    }

    fn cell_flat(&self, cell: &[usize]) -> usize {
        cell.iter().zip(&self.cell_strides).map(|(c, s)| c * s).sum()
    }

    /// Breadth-first walk over sub-boxes crossed by the boundary.
    fn walk(&mut self, start: Vec<usize>) -> Result<()> {
        let start_flat = self.cell_flat(&start);
        if self.visited[start_flat] {
            return Ok(());
        }
        self.visited[start_flat] = true;
        let mut queue = VecDeque::from([start]);
        let l = self.lat.dim();
        let cells = self.lat.cell_points();
        while let Some(cell) = queue.pop_front() {
            let mut corners = Vec::with_capacity(1 << l);
            for_each_corner(self.lat, &cell, |f| corners.push(f));
            let mut seen_in = false;
            let mut seen_out = false;
            for f in corners {
                let idx = self.lat.unflat(f);
                match self.label(&idx)? {
                    Label::Acceptable => seen_in = true,
                    _ => seen_out = true,
                }
            }
            if !(seen_in && seen_out) {
                continue;
            }
            for j in 0..l {
                for forward in [false, true] {
                    let mut next = cell.clone();
                    if forward {
                        if next[j] + 1 >= cells[j] {
                            continue;
                        }
                        next[j] += 1;
                    } else {
                        if next[j] == 0 {
                            continue;
                        }
                        next[j] -= 1;
                    }
                    let nf = self.cell_flat(&next);
                    if !self.visited[nf] {
                        self.visited[nf] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(())
    }
}
