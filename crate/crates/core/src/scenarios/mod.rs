//! Correlated risk-factor scenarios.
//!
//! Scenarios are drawn once per run from a one-factor Gaussian copula with
//! equicorrelation `rho` and then pushed through per-firm margins. The
//! resulting [`ScenarioMatrix`] is immutable and shared by every capital
//! evaluation (common random numbers), which keeps membership tests
//! deterministic and monotone in the capital allocation.

pub mod special;

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use special::{beta_cdf, beta_inverse_cdf, norm_cdf, norm_inv};

/// Name of the random number algorithm, recorded in run manifests.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha) + ziggurat standard normal (rand_distr)";

/// Equicorrelated Gaussian copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaSpec {
    pub n_firms: usize,
    pub pairwise_correlation: f64,
    pub n_scenarios: usize,
    pub seed: u64,
}

impl CopulaSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_firms == 0 || self.n_scenarios == 0 {
            return Err(Error::Parameter(
                "copula needs at least one firm and one scenario".into(),
            ));
        }
        let rho = self.pairwise_correlation;
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Parameter(format!(
                "pairwise correlation must lie in [0,1), got {rho}"
            )));
        }
        Ok(())
    }
}

/// Marginal distribution of one firm's risk factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalSpec {
    /// `exp(mu + sigma * z) + b`
    ShiftedLognormal { mu: f64, sigma: f64, b: f64 },
    /// `scale * BetaInv(Phi(z); alpha, beta) + shift`
    ScaledBeta {
        scale: f64,
        shift: f64,
        alpha: f64,
        beta: f64,
    },
}

impl MarginalSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            // sigma = 0 is the degenerate point mass exp(mu) + b
            MarginalSpec::ShiftedLognormal { mu, sigma, b } => {
                if !(sigma >= 0.0) || !mu.is_finite() || !b.is_finite() || !sigma.is_finite() {
                    return Err(Error::Parameter(format!(
                        "shifted lognormal needs finite mu, b and sigma >= 0, got mu={mu} sigma={sigma} b={b}"
                    )));
                }
            }
            MarginalSpec::ScaledBeta {
                scale,
                shift,
                alpha,
                beta,
            } => {
                if !(scale > 0.0 && alpha > 0.0 && beta > 0.0) || !shift.is_finite() {
                    return Err(Error::Parameter(format!(
                        "scaled beta needs scale, alpha, beta > 0, got scale={scale} alpha={alpha} beta={beta}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Maps a standard normal draw to this margin.
    pub fn transform(&self, z: f64) -> Result<f64> {
        match *self {
            MarginalSpec::ShiftedLognormal { mu, sigma, b } => Ok((mu + sigma * z).exp() + b),
            MarginalSpec::ScaledBeta {
                scale,
                shift,
                alpha,
                beta,
            } => Ok(scale * beta_inverse_cdf(norm_cdf(z), alpha, beta)? + shift),
        }
    }

    /// CDF of the margin, used for goodness-of-fit checks.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalSpec::ShiftedLognormal { mu, sigma, b } => {
                if x <= b {
                    0.0
                } else if sigma == 0.0 {
                    if x >= mu.exp() + b {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    norm_cdf(((x - b).ln() - mu) / sigma)
                }
            }
            MarginalSpec::ScaledBeta {
                scale,
                shift,
                alpha,
                beta,
            } => beta_cdf((x - shift) / scale, alpha, beta),
        }
    }
}

/// Where a scenario matrix came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub copula: CopulaSpec,
    pub margins: Vec<MarginalSpec>,
    /// Multiplicative factor applied after the margins (1 unless derived).
    pub scale: f64,
}

/// Realized risk-factor draws, `n_firms x n_scenarios`.
///
/// Stored scenario-major so that one scenario's firm vector is a contiguous
/// slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    n_firms: usize,
    n_scenarios: usize,
    data: Arc<[f64]>,
    provenance: Option<Provenance>,
}

impl ScenarioMatrix {
    /// Builds a matrix from per-scenario firm vectors.
    pub fn from_scenarios(scenarios: &[Vec<f64>]) -> Result<Self> {
        let n_scenarios = scenarios.len();
        let n_firms = scenarios.first().map_or(0, Vec::len);
        if n_scenarios == 0 || n_firms == 0 {
            return Err(Error::Input("scenario matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(n_firms * n_scenarios);
        for s in scenarios {
            if s.len() != n_firms {
                return Err(Error::Input("ragged scenario rows".into()));
            }
            data.extend_from_slice(s);
        }
        Self::from_flat(n_firms, n_scenarios, data, None)
    }

    fn from_flat(
        n_firms: usize,
        n_scenarios: usize,
        data: Vec<f64>,
        provenance: Option<Provenance>,
    ) -> Result<Self> {
        debug_assert_eq!(data.len(), n_firms * n_scenarios);
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Generation(format!(
                "non-finite scenario value at firm {}, scenario {}",
                pos % n_firms,
                pos / n_firms
            )));
        }
        Ok(Self {
            n_firms,
            n_scenarios,
            data: data.into(),
            provenance,
        })
    }

    pub fn n_firms(&self) -> usize {
        self.n_firms
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    pub fn get(&self, firm: usize, scenario: usize) -> f64 {
        self.data[scenario * self.n_firms + firm]
    }

    /// Firm values in one scenario.
    pub fn scenario(&self, scenario: usize) -> &[f64] {
        let start = scenario * self.n_firms;
        &self.data[start..start + self.n_firms]
    }

    pub fn scenarios(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_firms)
    }

    /// One firm's values across all scenarios.
    pub fn firm(&self, firm: usize) -> Vec<f64> {
        self.scenarios().map(|s| s[firm]).collect()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Elementwise multiple, e.g. the liquid share `alpha * N`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let data = self.data.iter().map(|v| v * factor).collect();
        let provenance = self.provenance.clone().map(|mut p| {
            p.scale *= factor;
            p
        });
        Self::from_flat(self.n_firms, self.n_scenarios, data, provenance)
    }

    /// Convex blend `alpha * self + (1 - alpha) * other`.
    pub fn blend(&self, other: &Self, alpha: f64) -> Result<Self> {
        if self.n_firms != other.n_firms || self.n_scenarios != other.n_scenarios {
            return Err(Error::Input("cannot blend scenario matrices of different shape".into()));
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        Self::from_flat(self.n_firms, self.n_scenarios, data, None)
    }

    /// Writes `firm_id,scenario_id,value` rows, firm ids 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["firm_id", "scenario_id", "value"])?;
        for firm in 0..self.n_firms {
            for scen in 0..self.n_scenarios {
                w.write_record(&[
                    (firm + 1).to_string(),
                    (scen + 1).to_string(),
                    self.get(firm, scen).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Raw correlated standard normals, one `Vec` per scenario.
///
/// Each scenario is `sqrt(rho) * Z0 + sqrt(1 - rho) * Z_i` with a fresh common
/// factor `Z0`. Draw order is scenario by scenario, common factor first.
pub fn sample_equicorrelated_normals(spec: &CopulaSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let load = spec.pairwise_correlation.sqrt();
    let idio = (1.0 - spec.pairwise_correlation).sqrt();
    let mut out = Vec::with_capacity(spec.n_scenarios);
    for _ in 0..spec.n_scenarios {
        let common: f64 = StandardNormal.sample(&mut rng);
        let column = (0..spec.n_firms)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                load * common + idio * z
            })
            .collect();
        out.push(column);
    }
    Ok(out)
}

/// Applies per-firm margins to correlated normals.
pub fn apply_marginal(normals: &[Vec<f64>], margins: &[MarginalSpec]) -> Result<ScenarioMatrix> {
    let n_firms = normals.first().map_or(0, Vec::len);
    if margins.len() != n_firms {
        return Err(Error::Config(format!(
            "{} margins supplied for {} firms",
            margins.len(),
            n_firms
        )));
    }
    for m in margins {
        m.validate()?;
    }
    let mut data = Vec::with_capacity(n_firms * normals.len());
    for column in normals {
        if column.len() != n_firms {
            return Err(Error::Input("ragged normal draws".into()));
        }
        for (z, margin) in column.iter().zip(margins) {
            data.push(margin.transform(*z)?);
        }
    }
    ScenarioMatrix::from_flat(n_firms, normals.len(), data, None)
}

/// Repeats one margin per group into a per-firm list.
pub fn expand_margins(group_sizes: &[usize], per_group: &[MarginalSpec]) -> Result<Vec<MarginalSpec>> {
    if per_group.len() == 1 {
        let total = group_sizes.iter().sum();
        return Ok(vec![per_group[0].clone(); total]);
    }
    if per_group.len() != group_sizes.len() {
        return Err(Error::Config(format!(
            "{} margins for {} groups",
            per_group.len(),
            group_sizes.len()
        )));
    }
    Ok(group_sizes
        .iter()
        .zip(per_group)
        .flat_map(|(&n, m)| std::iter::repeat_n(m.clone(), n))
        .collect())
}

/// Samples the copula and applies margins, recording provenance.
pub fn generate(spec: &CopulaSpec, margins: &[MarginalSpec]) -> Result<ScenarioMatrix> {
    let normals = sample_equicorrelated_normals(spec)?;
    let mut matrix = apply_marginal(&normals, margins)?;
    matrix.provenance = Some(Provenance {
        copula: spec.clone(),
        margins: margins.to_vec(),
        scale: 1.0,
    });
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, rho: f64, m: usize, seed: u64) -> CopulaSpec {
        CopulaSpec {
            n_firms: n,
            pairwise_correlation: rho,
            n_scenarios: m,
            seed,
        }
    }

    #[test]
    fn correlation_out_of_range_is_rejected() {
        assert!(sample_equicorrelated_normals(&spec(2, 1.0, 10, 1)).is_err());
        assert!(sample_equicorrelated_normals(&spec(2, -0.1, 10, 1)).is_err());
    }

    #[test]
    fn same_seed_same_draws() {
        let a = sample_equicorrelated_normals(&spec(5, 0.3, 200, 9)).unwrap();
        let b = sample_equicorrelated_normals(&spec(5, 0.3, 200, 9)).unwrap();
        assert_eq!(a, b);
        let c = sample_equicorrelated_normals(&spec(5, 0.3, 200, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn lognormal_at_zero() {
        let mu = norm_inv(0.75).unwrap();
        let m = MarginalSpec::ShiftedLognormal { mu, sigma: 1.0, b: -1.0 };
        // exp(0.674490) - 1, computed directly
        assert!((m.transform(0.0).unwrap() - 0.963_031).abs() < 1e-5);
    }

    #[test]
    fn degenerate_lognormal_is_constant() {
        let m = MarginalSpec::ShiftedLognormal { mu: 0.3, sigma: 0.0, b: -2.0 };
        let normals = vec![vec![-3.0], vec![0.0], vec![5.0]];
        let x = apply_marginal(&normals, &[m]).unwrap();
        for s in 0..3 {
            assert_eq!(x.get(0, s), 0.3_f64.exp() - 2.0);
        }
    }

    #[test]
    fn margin_count_mismatch() {
        let m = MarginalSpec::ShiftedLognormal { mu: 0.0, sigma: 1.0, b: 0.0 };
        assert!(matches!(
            apply_marginal(&[vec![0.0, 1.0]], &[m]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_finite_output_is_a_generation_error() {
        let m = MarginalSpec::ShiftedLognormal { mu: 800.0, sigma: 1.0, b: 0.0 };
        assert!(matches!(
            apply_marginal(&[vec![0.0]], &[m]),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn csv_dump_has_header_and_all_cells() {
        let x = ScenarioMatrix::from_scenarios(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "firm_id,scenario_id,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "1,2,3");
    }

    #[test]
    fn expand_margins_per_group() {
        let a = MarginalSpec::ShiftedLognormal { mu: 0.0, sigma: 1.0, b: 0.0 };
        let b = MarginalSpec::ShiftedLognormal { mu: 1.0, sigma: 1.0, b: 0.0 };
        let all = expand_margins(&[2, 3], &[a.clone(), b.clone()]).unwrap();
        assert_eq!(all, vec![a.clone(), a, b.clone(), b.clone(), b]);
    }
}
