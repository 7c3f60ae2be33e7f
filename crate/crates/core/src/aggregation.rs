//! Capital-indexed value models built from aggregation functions.
//!
//! A value model maps a capital allocation `k` (one entry per capital group)
//! to the per-scenario system output `Y_k`. Capital is either added after
//! aggregation (`insensitive`: `Y_k = Lambda(X) + sum_j n_j k_j`) or to each
//! firm before aggregation (`sensitive`: `Y_k = Lambda(X + g(k))`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acceptance::SampleVector;
use crate::error::{Error, Result};
use crate::scenarios::ScenarioMatrix;

/// A non-decreasing random field `k -> Y_k` over a fixed scenario set.
pub trait ValueModel: Send + Sync {
    /// Number of capital coordinates `l`.
    fn capital_dim(&self) -> usize;

    fn n_scenarios(&self) -> usize;

    /// Per-scenario outputs `Y_k`.
    fn evaluate(&self, k: &[f64]) -> Result<SampleVector>;

    /// Short human-readable description.
    fn describe(&self) -> String;
}

/// Models whose underlying risk factors can be mixed,
/// `D_alpha(X, X')_k = Lambda(k + alpha X + (1 - alpha) X')`.
pub trait Blend: ValueModel + Sized {
    fn blend(&self, other: &Self, alpha: f64) -> Result<Self>;
}

/// Partition of firms into capital groups.
///
/// Firms in a group receive the same capital. A group may be pinned to a
/// fixed capital level, in which case it has no coordinate in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMap {
    sizes: Vec<usize>,
    pinned: Vec<Option<f64>>,
}

impl GroupMap {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        let pinned = vec![None; sizes.len()];
        Self::with_pinned(sizes, pinned)
    }

    /// `pinned[j] = Some(c)` fixes every firm of group `j` at capital `c`.
    pub fn with_pinned(sizes: Vec<usize>, pinned: Vec<Option<f64>>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Config("group sizes must be positive and non-empty".into()));
        }
        if pinned.len() != sizes.len() {
            return Err(Error::Config("pinned list must match group count".into()));
        }
        if pinned.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Config("pinned capital must be finite".into()));
        }
        if pinned.iter().all(Option::is_some) {
            return Err(Error::Config("at least one capital group must be free".into()));
        }
        Ok(Self { sizes, pinned })
    }

    /// Every firm in its own group.
    pub fn singletons(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn pinned(&self) -> &[Option<f64>] {
        &self.pinned
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_firms(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Number of free capital coordinates.
    pub fn dim(&self) -> usize {
        self.pinned.iter().filter(|p| p.is_none()).count()
    }

    /// Sizes of the free groups, in coordinate order.
    pub fn free_sizes(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .zip(&self.pinned)
            .filter(|(_, p)| p.is_none())
            .map(|(&n, _)| n)
            .collect()
    }

    /// Group index of every firm.
    pub fn firm_groups(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
            .collect()
    }

    /// Capital of each group (pinned groups included).
    pub fn group_capital(&self, k: &[f64]) -> Result<Vec<f64>> {
        if k.len() != self.dim() {
            return Err(Error::Config(format!(
                "allocation has {} coordinates, model expects {}",
                k.len(),
                self.dim()
            )));
        }
        let mut free = k.iter();
        Ok(self
            .pinned
            .iter()
            .map(|p| match p {
                Some(c) => *c,
                None => *free.next().expect("length checked"),
            })
            .collect())
    }

    /// Per-firm capital vector `g(k)`.
    pub fn expand(&self, k: &[f64]) -> Result<Vec<f64>> {
        let caps = self.group_capital(k)?;
        Ok(self
            .sizes
            .iter()
            .zip(caps)
            .flat_map(|(&n, c)| std::iter::repeat_n(c, n))
            .collect())
    }

    /// Total capital `sum_j n_j k_j`.
    pub fn total_capital(&self, k: &[f64]) -> Result<f64> {
        let caps = self.group_capital(k)?;
        Ok(self.sizes.iter().zip(caps).map(|(&n, c)| n as f64 * c).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationKind {
    /// `sum x_i`
    Sum,
    /// `sum -x_i^-`
    Loss,
    /// `sum (1 - exp(theta x_i^-))`
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapitalMode {
    /// Capital added after aggregation.
    Insensitive,
    /// Capital added to each firm before aggregation.
    Sensitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationSpec {
    pub kind: AggregationKind,
    pub mode: CapitalMode,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_theta() -> f64 {
    2.0
}

impl AggregationSpec {
    pub fn new(kind: AggregationKind, mode: CapitalMode) -> Self {
        Self {
            kind,
            mode,
            theta: default_theta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == AggregationKind::Exp && !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::Parameter(format!(
                "exponential aggregation needs theta > 0, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let sign = match self.mode {
            CapitalMode::Insensitive => "-",
            CapitalMode::Sensitive => "+",
        };
        match self.kind {
            AggregationKind::Sum => format!("sum{sign}"),
            AggregationKind::Loss => format!("loss{sign}"),
            AggregationKind::Exp => format!("exp({}){sign}", self.theta),
        }
    }
}

/// `max(-x, 0)`
fn neg_part(x: f64) -> f64 {
    (-x).max(0.0)
}

/// Applies the aggregation function to one wealth vector.
pub fn aggregate(x: &[f64], spec: &AggregationSpec) -> Result<f64> {
    match spec.kind {
        AggregationKind::Sum => Ok(x.iter().sum()),
        AggregationKind::Loss => Ok(-x.iter().map(|&v| neg_part(v)).sum::<f64>()),
        AggregationKind::Exp => {
            let mut total = 0.0;
            for (i, &v) in x.iter().enumerate() {
                let arg = spec.theta * neg_part(v);
                let e = arg.exp();
                if !e.is_finite() {
                    return Err(Error::Overflow(format!(
                        "exp aggregation overflows at firm {} (wealth {v}, theta {})",
                        i + 1,
                        spec.theta
                    )));
                }
                total += 1.0 - e;
            }
            Ok(total)
        }
    }
}

/// Value model over an aggregation function.
#[derive(Debug, Clone)]
pub struct AggregationModel {
    scenarios: ScenarioMatrix,
    spec: AggregationSpec,
    groups: GroupMap,
    /// `Lambda(X)` per scenario, insensitive mode only.
    base: Option<Vec<f64>>,
}

/// Builds an aggregation value model over shared scenarios.
pub fn make_cvm(
    scenarios: ScenarioMatrix,
    spec: AggregationSpec,
    groups: GroupMap,
) -> Result<AggregationModel> {
    spec.validate()?;
    if groups.n_firms() != scenarios.n_firms() {
        return Err(Error::Config(format!(
            "groups cover {} firms but scenarios have {}",
            groups.n_firms(),
            scenarios.n_firms()
        )));
    }
    // Sum aggregation is linear, so both modes share the cached path and agree
    // bit for bit.
    let cached = spec.mode == CapitalMode::Insensitive || spec.kind == AggregationKind::Sum;
    let base = if cached {
        Some(
            scenarios
                .scenarios()
                .map(|x| aggregate(x, &spec))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(AggregationModel {
        scenarios,
        spec,
        groups,
        base,
    })
}

impl AggregationModel {
    pub fn spec(&self) -> &AggregationSpec {
        &self.spec
    }

    pub fn groups(&self) -> &GroupMap {
        &self.groups
    }

    pub fn scenarios(&self) -> &ScenarioMatrix {
        &self.scenarios
    }
}

impl ValueModel for AggregationModel {
    fn capital_dim(&self) -> usize {
        self.groups.dim()
    }

    fn n_scenarios(&self) -> usize {
        self.scenarios.n_scenarios()
    }

    fn evaluate(&self, k: &[f64]) -> Result<SampleVector> {
        let values = match &self.base {
            Some(base) => {
                let add = self.groups.total_capital(k)?;
                base.iter().map(|b| b + add).collect()
            }
            None => {
                let capital = self.groups.expand(k)?;
                (0..self.scenarios.n_scenarios())
                    .into_par_iter()
                    .map_init(
                        || vec![0.0; capital.len()],
                        |buf, s| {
                            for ((w, x), c) in buf.iter_mut().zip(self.scenarios.scenario(s)).zip(&capital) {
                                *w = x + c;
                            }
                            aggregate(buf, &self.spec)
                        },
                    )
                    .collect::<Result<Vec<_>>>()?
            }
        };
        SampleVector::new(values)
    }

    fn describe(&self) -> String {
        format!(
            "aggregation {} over {} firms x {} scenarios",
            self.spec.label(),
            self.scenarios.n_firms(),
            self.scenarios.n_scenarios()
        )
    }
}

impl Blend for AggregationModel {
    fn blend(&self, other: &Self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Parameter(format!("blend weight must lie in [0,1], got {alpha}")));
        }
        if self.spec != other.spec || self.groups != other.groups {
            return Err(Error::Config("blended models must share aggregation and groups".into()));
        }
        let x = self.scenarios.blend(&other.scenarios, alpha)?;
        make_cvm(x, self.spec, self.groups.clone())
    }
}
