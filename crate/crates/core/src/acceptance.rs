//! Scalar acceptance criteria on equally weighted empirical samples.
//!
//! Every criterion is reduced to a monetary risk value `rho(M)`; a sample is
//! acceptable when `rho(M) + shift <= 0`. Values within [`TIE_TOLERANCE`] of
//! zero count as acceptable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Membership ties `|rho + shift| <= TIE_TOLERANCE` resolve to acceptable.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Target accuracy of the shortfall root.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Target accuracy of the certainty-equivalent maximizer.
pub const ARGMAX_TOLERANCE: f64 = 1e-9;

const BRACKET_LIMIT: f64 = 1e12;

/// Per-scenario realizations of one system output, equally weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector(Vec<f64>);

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("sample vector is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("sample vector contains non-finite values".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Increasing convex loss function for shortfall risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFn {
    /// `exp(x)`
    Exp,
    /// `(x^+)^p / p`, `p >= 1`
    Power { p: f64 },
}

impl LossFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LossFn::Exp => x.exp(),
            LossFn::Power { p } => x.max(0.0).powf(p) / p,
        }
    }

    fn validate(&self) -> Result<()> {
        if let LossFn::Power { p } = *self {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::Parameter(format!(
                    "power loss exponent must be >= 1, got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// Concave non-decreasing utility with `u(0) = 0` and `u(x) < x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Utility {
    /// `log(1 + x)`, defined for `x > -1`.
    Log1p,
    /// `x / lambda` for `x <= 0`, else `0`. Its OCE is AV@R at level lambda.
    AvarLinear { lambda: f64 },
    /// `1 - exp(-x)`; its OCE is the entropic risk measure.
    Exponential,
}

impl Utility {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Utility::Log1p => {
                if x > -1.0 {
                    x.ln_1p()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Utility::AvarLinear { lambda } => {
                if x <= 0.0 {
                    x / lambda
                } else {
                    0.0
                }
            }
            Utility::Exponential => -(-x).exp_m1(),
        }
    }

    /// Infimum of the domain on which `u` is finite.
    fn domain_floor(&self) -> Option<f64> {
        match self {
            Utility::Log1p => Some(-1.0),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Utility::AvarLinear { lambda } = *self {
            check_level(lambda)?;
        }
        Ok(())
    }
}

/// Scalar criterion defining the acceptance set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum Criterion {
    /// Average value at risk at level `lambda`.
    Avar { lambda: f64 },
    /// Utility-based shortfall risk: the root `m` of `E[loss(-M - m)] = z`.
    Ubsr { loss: LossFn, z: f64 },
    /// Negative optimized certainty equivalent.
    Oce { utility: Utility },
    /// Entropic risk: shortfall risk with `exp` loss and `z = exp(-level)`.
    Entropic { level: f64 },
}

/// Acceptance criterion plus additive offset: accept iff `rho(M) + shift <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceSpec {
    #[serde(flatten)]
    pub criterion: Criterion,
    #[serde(default)]
    pub shift: f64,
}

impl AcceptanceSpec {
    pub fn new(criterion: Criterion, shift: f64) -> Self {
        Self { criterion, shift }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.shift.is_finite() {
            return Err(Error::Parameter("acceptance shift must be finite".into()));
        }
        match &self.criterion {
            Criterion::Avar { lambda } => check_level(*lambda),
            Criterion::Ubsr { loss, z } => {
                loss.validate()?;
                let interior = match loss {
                    LossFn::Exp | LossFn::Power { .. } => *z > 0.0 && z.is_finite(),
                };
                if !interior {
                    return Err(Error::Parameter(format!(
                        "shortfall threshold z={z} is not in the interior of the loss range"
                    )));
                }
                Ok(())
            }
            Criterion::Oce { utility } => utility.validate(),
            Criterion::Entropic { level } => {
                if level.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Parameter("entropic level must be finite".into()))
                }
            }
        }
    }

    /// The risk value `rho(M)` without the shift.
    pub fn risk(&self, samples: &SampleVector) -> Result<f64> {
        match &self.criterion {
            Criterion::Avar { lambda } => avar(samples, *lambda),
            Criterion::Ubsr { loss, z } => ubsr(samples, *loss, *z),
            Criterion::Oce { utility } => oce_rho(samples, *utility),
            Criterion::Entropic { level } => ubsr(samples, LossFn::Exp, (-level).exp()),
        }
    }
}

fn check_level(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("level must lie in (0,1), got {lambda}")))
    }
}

/// `rho(M) + shift <= 0`, with near-zero ties counted as acceptable.
pub fn is_acceptable(samples: &SampleVector, spec: &AcceptanceSpec) -> Result<bool> {
    Ok(spec.risk(samples)? + spec.shift <= TIE_TOLERANCE)
}

/// Empirical value at risk: the negated lower `lambda`-quantile
/// `-M_(ceil(lambda * m))`.
pub fn value_at_risk(samples: &SampleVector, lambda: f64) -> Result<f64> {
    check_level(lambda)?;
    let m = samples.len();
    let rank = ((lambda * m as f64).ceil() as usize).clamp(1, m);
    let mut v = samples.values().to_vec();
    let (_, nth, _) = v.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(-*nth)
}

/// Empirical AV@R from order statistics.
///
/// With `m` samples sorted ascending and `j = floor(lambda * m)`:
/// `AV@R = -(sum_{i<=j} M_(i) / m + (lambda - j/m) M_(j+1)) / lambda`,
/// the exact minimum of `r + E[(-M - r)^+] / lambda` over `r`.
pub fn avar(samples: &SampleVector, lambda: f64) -> Result<f64> {
    check_level(lambda)?;
    let m = samples.len();
    let mf = m as f64;
    let full = ((lambda * mf).floor() as usize).min(m);
    let mut v = samples.values().to_vec();
    let mut tail = 0.0;
    if full < m {
        let (lower, nth, _) = v.select_nth_unstable_by(full, f64::total_cmp);
        tail += lower.iter().sum::<f64>() / mf;
        tail += (lambda - full as f64 / mf) * *nth;
    } else {
        tail += v.iter().sum::<f64>() / mf;
    }
    Ok(-tail / lambda)
}

/// Utility-based shortfall risk, the root `m*` of `E[loss(-M - m)] = z`.
///
/// The exponential loss has the closed form
/// `m* = log E[exp(-M)] - log z`, evaluated with a log-sum-exp shift; other
/// losses go through [`ubsr_bisection`].
pub fn ubsr(samples: &SampleVector, loss: LossFn, z: f64) -> Result<f64> {
    match loss {
        LossFn::Exp => {
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::Parameter(format!("exp-loss threshold must be positive, got {z}")));
            }
            let worst = -samples.min();
            let mf = samples.len() as f64;
            let scaled = samples.values().iter().map(|x| (-x - worst).exp()).sum::<f64>() / mf;
            Ok(worst + scaled.ln() - z.ln())
        }
        _ => ubsr_bisection(samples, loss, z),
    }
}

/// Shortfall root by bracketing and bisection.
///
/// `m -> E[loss(-M - m)]` is non-increasing, so the bracket is widened
/// geometrically until it straddles `z`.
pub fn ubsr_bisection(samples: &SampleVector, loss: LossFn, z: f64) -> Result<f64> {
    loss.validate()?;
    let values = samples.values();
    let mf = values.len() as f64;
    let excess = |m: f64| values.iter().map(|x| loss.eval(-x - m)).sum::<f64>() / mf - z;

    // excess(lo) >= 0 >= excess(hi)
    let mut lo = -samples.max() - 1.0;
    let mut hi = -samples.min() + 1.0;
    let mut width = 1.0;
    while excess(lo) < 0.0 {
        width *= 2.0;
        lo = -samples.max() - width;
        if width > BRACKET_LIMIT || !lo.is_finite() {
            return Err(Error::Divergence(format!(
                "no lower bracket for shortfall root (z={z})"
            )));
        }
    }
    width = 1.0;
    while excess(hi) > 0.0 {
        width *= 2.0;
        hi = -samples.min() + width;
        if width > BRACKET_LIMIT {
            return Err(Error::Divergence(format!(
                "no upper bracket for shortfall root (z={z})"
            )));
        }
    }

    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = excess(mid);
        if e.abs() <= ROOT_TOLERANCE && hi - lo <= ROOT_TOLERANCE {
            return Ok(mid);
        }
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Flat stretches of the loss (e.g. power loss with no shortfall) leave a
    // whole interval of roots; the infimum is the risk value.
    Ok(hi)
}

/// Negative optimized certainty equivalent,
/// `-sup_eta { eta + E[u(M - eta)] }`.
///
/// The maximizer lies in `[min M, max M]` for every admissible utility, and
/// below `min M + 1` for `log(1 + x)`; golden-section search runs on that
/// bracket to [`ARGMAX_TOLERANCE`].
pub fn oce_rho(samples: &SampleVector, utility: Utility) -> Result<f64> {
    utility.validate()?;
    let values = samples.values();
    let mf = values.len() as f64;
    let objective = |eta: f64| eta + values.iter().map(|x| utility.eval(x - eta)).sum::<f64>() / mf;

    let lo = samples.min();
    let mut hi = samples.max();
    if let Some(floor) = utility.domain_floor() {
        // u(M - eta) finite needs eta < min M - floor
        hi = hi.min(lo - floor - 1e-10);
    }
    if hi <= lo {
        return Ok(-objective(lo));
    }

    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > ARGMAX_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    let best = [objective(a), fc, fd, objective(b), objective(lo)]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::Input("certainty equivalent is not finite".into()));
    }
    Ok(-best)
}
