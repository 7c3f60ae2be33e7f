use serde::{Deserialize, Serialize};

use super::lattice::{GridSpec, Lattice};
use super::oracle::membership;
use crate::acceptance::AcceptanceSpec;
use crate::aggregation::Blend;
use crate::error::Result;

/// Lattice points acceptable for two models but not for their blend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub alpha: f64,
    pub points_checked: usize,
    pub jointly_acceptable: usize,
    pub violations: Vec<Vec<f64>>,
}

/// Checks `R(D_alpha) ⊇ R(A) ∩ R(B)` on every lattice point of `grid`,
/// where `D_alpha` mixes the risk factors of `a` and `b` before
/// aggregation.
pub fn quasiconvexity_probe<M: Blend>(
    a: &M,
    b: &M,
    alpha: f64,
    spec: &AcceptanceSpec,
    grid: &GridSpec,
) -> Result<ProbeReport> {
    let blend = a.blend(b, alpha)?;
    let lat = Lattice::new(grid)?;
    let mut report = ProbeReport {
        alpha,
        points_checked: lat.total,
        jointly_acceptable: 0,
        violations: Vec::new(),
    };
    for f in 0..lat.total {
        let k = lat.coord(&lat.unflat(f));
        if membership(a, spec, &k)? && membership(b, spec, &k)? {
            report.jointly_acceptable += 1;
            if !membership(&blend, spec, &k)? {
                report.violations.push(k);
            }
        }
    }
    Ok(report)
}
