//! Interbank clearing with fire-sale price impact.
//!
//! Nodes are `0..=n` with node 0 the society. Each firm pays
//! `p_i = pbar_i ∧ (x_i + pi s_i + sum_j a_ji p_j)`; firms short of liquid
//! funds sell illiquid holdings, which sets the price
//! `pi = f(sum_i (shortfall_i / pi ∧ s_i))`. The clearing state is found by
//! Picard iteration from the top `(pbar, f(0))`, which decreases
//! monotonically to the greatest fixed point.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acceptance::SampleVector;
use crate::aggregation::{Blend, GroupMap, ValueModel};
use crate::error::{Error, Result};
use crate::scenarios::ScenarioMatrix;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Points on which the inverse demand assumption is checked.
const DEMAND_CHECK_POINTS: usize = 10_000;

/// Nominal obligations between the society (node 0) and `n` firms.
#[derive(Debug, Clone, PartialEq)]
pub struct LiabilityNetwork {
    size: usize,
    nominal: Vec<f64>,
    pbar: Vec<f64>,
    /// `incoming[i]` holds `(j, a_ji)` for every `a_ji > 0`.
    incoming: Vec<Vec<(usize, f64)>>,
    group_sizes: Vec<usize>,
}

/// Builds the relative liability matrix from nominal obligations.
///
/// `nominal[i][j]` is what node `i` owes node `j`; it must be square,
/// non-negative, finite and have a zero diagonal.
pub fn build_relative(nominal: &[Vec<f64>]) -> Result<LiabilityNetwork> {
    let size = nominal.len();
    if size < 2 {
        return Err(Error::Input("network needs the society and at least one firm".into()));
    }
    let mut flat = Vec::with_capacity(size * size);
    for (i, row) in nominal.iter().enumerate() {
        if row.len() != size {
            return Err(Error::Input(format!("liability row {i} has length {}", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Input(format!("liability {i}->{j} is {v}")));
            }
            if i == j && v != 0.0 {
                return Err(Error::Input(format!("node {i} owes itself {v}")));
            }
            flat.push(v);
        }
    }
    let pbar: Vec<f64> = flat.chunks_exact(size).map(|r| r.iter().sum()).collect();
    let mut incoming = vec![Vec::new(); size];
    for i in 0..size {
        if pbar[i] <= 0.0 {
            continue;
        }
        for j in 0..size {
            let v = flat[i * size + j];
            if v > 0.0 {
                incoming[j].push((i, v / pbar[i]));
            }
        }
    }
    Ok(LiabilityNetwork {
        size,
        nominal: flat,
        pbar,
        incoming,
        group_sizes: vec![size - 1],
    })
}

impl LiabilityNetwork {
    /// Reads an edge list `from,to,amount` (node 0 = society). The number of
    /// firms is the largest node id unless `n_firms` is given. Repeated edges
    /// are summed.
    pub fn from_edge_csv<R: Read>(reader: R, n_firms: Option<usize>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut edges = Vec::new();
        for rec in rdr.deserialize() {
            let (from, to, amount): (usize, usize, f64) = rec?;
            edges.push((from, to, amount));
        }
        let max_id = edges.iter().map(|&(a, b, _)| a.max(b)).max().unwrap_or(0);
        let n = n_firms.unwrap_or(max_id);
        if max_id > n {
            return Err(Error::Input(format!("edge references node {max_id} beyond {n} firms")));
        }
        let mut nominal = vec![vec![0.0; n + 1]; n + 1];
        for (from, to, amount) in edges {
            nominal[from][to] += amount;
        }
        build_relative(&nominal)
    }

    /// Writes the non-zero obligations as `from,to,amount`.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "amount"])?;
        for i in 0..self.size {
            for j in 0..self.size {
                let v = self.nominal(i, j);
                if v > 0.0 {
                    w.write_record(&[i.to_string(), j.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn with_groups(mut self, group_sizes: Vec<usize>) -> Result<Self> {
        if group_sizes.iter().sum::<usize>() != self.n_firms() {
            return Err(Error::Config("network groups must cover all firms".into()));
        }
        self.group_sizes = group_sizes;
        Ok(self)
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn n_firms(&self) -> usize {
        self.size - 1
    }

    /// Obligation of node `i` to node `j`.
    pub fn nominal(&self, i: usize, j: usize) -> f64 {
        self.nominal[i * self.size + j]
    }

    /// Total obligations `pbar_i` per node, index 0 = society.
    pub fn pbar(&self) -> &[f64] {
        &self.pbar
    }

    /// Relative liability `a_ij`.
    pub fn relative(&self, i: usize, j: usize) -> f64 {
        if self.pbar[i] > 0.0 {
            self.nominal(i, j) / self.pbar[i]
        } else {
            0.0
        }
    }

    /// Total promised to the society, `sum_i pbar_i0`.
    pub fn promised_to_society(&self) -> f64 {
        (1..self.size).map(|i| self.nominal(i, 0)).sum()
    }

    /// Number of inter-firm obligations.
    pub fn firm_edge_count(&self) -> usize {
        (1..self.size)
            .flat_map(|i| (1..self.size).map(move |j| (i, j)))
            .filter(|&(i, j)| self.nominal(i, j) > 0.0)
            .count()
    }

    /// Total obligations of the firms in each group.
    pub fn group_liabilities(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.group_sizes.len());
        let mut firm = 1;
        for &n in &self.group_sizes {
            out.push(self.pbar[firm..firm + n].iter().sum());
            firm += n;
        }
        out
    }

    fn inflow(&self, node: usize, p: &[f64]) -> f64 {
        self.incoming[node].iter().map(|&(j, a)| a * p[j]).sum()
    }
}

/// Price of the illiquid asset as a function of shares sold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InverseDemand {
    /// No price impact.
    Constant {
        #[serde(default = "one")]
        price: f64,
    },
    /// `max(1 - slope * y, floor)`
    LinearCap { slope: f64, floor: f64 },
    /// `1 - 2y/3` below one half, `sqrt(2) / (3 sqrt(y))` above.
    CifuentesPiecewise,
    /// `scale * (y + offset)^(-exponent)`
    PowerLaw { scale: f64, exponent: f64, offset: f64 },
    /// Linear interpolation through `(shares, prices)`, flat beyond the ends.
    Tabulated { shares: Vec<f64>, prices: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Default for InverseDemand {
    fn default() -> Self {
        InverseDemand::Constant { price: 1.0 }
    }
}

impl InverseDemand {
    pub fn price(&self, y: f64) -> f64 {
        match self {
            InverseDemand::Constant { price } => *price,
            InverseDemand::LinearCap { slope, floor } => (1.0 - slope * y).max(*floor),
            InverseDemand::CifuentesPiecewise => {
                if y <= 0.5 {
                    1.0 - 2.0 * y / 3.0
                } else {
                    2f64.sqrt() / (3.0 * y.sqrt())
                }
            }
            InverseDemand::PowerLaw {
                scale,
                exponent,
                offset,
            } => scale * (y + offset).powf(-exponent),
            InverseDemand::Tabulated { shares, prices } => {
                if y <= shares[0] {
                    return prices[0];
                }
                let last = shares.len() - 1;
                if y >= shares[last] {
                    return prices[last];
                }
                let hi = shares.partition_point(|&s| s <= y);
                let (y0, y1) = (shares[hi - 1], shares[hi]);
                let t = (y - y0) / (y1 - y0);
                prices[hi - 1] + t * (prices[hi] - prices[hi - 1])
            }
        }
    }

    /// Checks that `f` is finite and positive, nonincreasing, and that
    /// `y f(y)` is strictly increasing on a log-spaced grid over
    /// `[0, max_shares]`.
    pub fn validate(&self, max_shares: f64) -> Result<()> {
        if let InverseDemand::Tabulated { shares, prices } = self {
            if shares.is_empty() || shares.len() != prices.len() {
                return Err(Error::Model("tabulated demand needs matching, non-empty columns".into()));
            }
            if shares.windows(2).any(|w| w[1] <= w[0]) || shares[0] < 0.0 {
                return Err(Error::Model("tabulated shares must be increasing from >= 0".into()));
            }
        }
        let top = if max_shares > 0.0 { max_shares } else { 1.0 };
        let lo = top * 1e-9;
        let ratio = (top / lo).powf(1.0 / (DEMAND_CHECK_POINTS - 1) as f64);
        let mut grid = Vec::with_capacity(DEMAND_CHECK_POINTS + 1);
        grid.push(0.0);
        let mut y = lo;
        for _ in 0..DEMAND_CHECK_POINTS {
            grid.push(y.min(top));
            y *= ratio;
        }

        let mut prev_price = f64::INFINITY;
        let mut prev_revenue = f64::NEG_INFINITY;
        for &y in &grid {
            let p = self.price(y);
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Model(format!("inverse demand f({y}) = {p} is not a positive price")));
            }
            if p > prev_price {
                return Err(Error::Model(format!("inverse demand increases at y = {y}")));
            }
            let revenue = y * p;
            if revenue <= prev_revenue {
                return Err(Error::Model(format!(
                    "y f(y) is not strictly increasing at y = {y}"
                )));
            }
            prev_price = p;
            prev_revenue = revenue;
        }
        Ok(())
    }
}

/// Clearing payments and price.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearingResult {
    /// Payments per node; `payments[0]` is the society's (never defaults).
    pub payments: Vec<f64>,
    pub price: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingControl {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl Default for ClearingControl {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

fn check_holdings(network: &LiabilityNetwork, x: &[f64], s: &[f64]) -> Result<()> {
    let n = network.n_firms();
    if x.len() != n || s.len() != n {
        return Err(Error::Input(format!(
            "holdings have lengths {}/{} for {n} firms",
            x.len(),
            s.len()
        )));
    }
    if x.iter().chain(s).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Input("holdings must be finite and non-negative".into()));
    }
    Ok(())
}

/// Computes the clearing payments and price.
///
/// `x` and `s` are liquid and illiquid holdings of firms `1..=n`.
pub fn clear(
    network: &LiabilityNetwork,
    x: &[f64],
    s: &[f64],
    f: &InverseDemand,
    control: ClearingControl,
) -> Result<ClearingResult> {
    clear_traced(network, x, s, f, control, |_, _| {})
}

/// [`clear`] with a callback receiving every iterate `(payments, price)`,
/// starting from `(pbar, f(0))`.
pub fn clear_traced(
    network: &LiabilityNetwork,
    x: &[f64],
    s: &[f64],
    f: &InverseDemand,
    control: ClearingControl,
    observe: impl FnMut(&[f64], f64),
) -> Result<ClearingResult> {
    check_holdings(network, x, s)?;
    f.validate(s.iter().sum())?;
    let mut scratch = Vec::new();
    clear_from_top(network, x, s, f, control, &mut scratch, observe)
}

/// Picard iteration from the top; `observe` sees every iterate.
pub(crate) fn clear_from_top(
    network: &LiabilityNetwork,
    x: &[f64],
    s: &[f64],
    f: &InverseDemand,
    control: ClearingControl,
    scratch: &mut Vec<f64>,
    mut observe: impl FnMut(&[f64], f64),
) -> Result<ClearingResult> {
    let size = network.size;
    let pbar = &network.pbar;
    let mut p = pbar.clone();
    let mut price = f.price(0.0);
    let floor_price = f.price(s.iter().sum());
    scratch.clear();
    scratch.resize(size, 0.0);
    let next = scratch;
    next[0] = pbar[0];

    observe(&p, price);
    let mut residual = f64::INFINITY;
    for iter in 1..=control.max_iter {
        let mut sold = 0.0;
        for i in 1..size {
            let liquid = x[i - 1] + network.inflow(i, &p);
            let held = s[i - 1];
            next[i] = pbar[i].min(liquid + price * held);
            let shortfall = (pbar[i] - liquid).max(0.0);
            if shortfall > 0.0 && held > 0.0 {
                debug_assert!(price >= floor_price && price > 0.0);
                sold += (shortfall / price).min(held);
            }
        }
        let next_price = f.price(sold);
        residual = (next_price - price).abs();
        for (a, b) in p.iter().zip(next.iter()).skip(1) {
            residual = residual.max((a - b).abs());
        }
        p[1..].copy_from_slice(&next[1..]);
        price = next_price;
        observe(&p, price);
        if residual <= control.tol {
            return Ok(ClearingResult {
                payments: p,
                price,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::Convergence {
        iterations: control.max_iter,
        residual,
    })
}

/// Equity `e_i = sum_{j != i} p_j a_ji + x_i + pi s_i - pbar_i` for all
/// nodes, with `x_0 = pbar_0` and `s_0 = 0` for the society.
pub fn equity(
    network: &LiabilityNetwork,
    x: &[f64],
    s: &[f64],
    f: &InverseDemand,
    control: ClearingControl,
) -> Result<Vec<f64>> {
    let cleared = clear(network, x, s, f, control)?;
    Ok(equity_from(network, x, s, &cleared))
}

fn equity_from(network: &LiabilityNetwork, x: &[f64], s: &[f64], cleared: &ClearingResult) -> Vec<f64> {
    let p = &cleared.payments;
    (0..network.size)
        .map(|i| {
            let inflow = network.inflow(i, p);
            if i == 0 {
                inflow
            } else {
                inflow + x[i - 1] + cleared.price * s[i - 1] - network.pbar[i]
            }
        })
        .collect()
}

/// Society equity `e_0`: payments received by the society net of its own
/// (always honoured) obligations, which cancel against `x_0 = pbar_0`.
fn society_equity(network: &LiabilityNetwork, payments: &[f64]) -> f64 {
    network.inflow(0, payments)
}

/// Network value model `Y_k = e_0(X + g(k); S)` for `k >= 0`.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    network: Arc<LiabilityNetwork>,
    liquid: ScenarioMatrix,
    illiquid: Option<ScenarioMatrix>,
    demand: InverseDemand,
    groups: GroupMap,
    control: ClearingControl,
}

/// Builds the network value model; validates shapes and the inverse demand.
pub fn make_network_cvm(
    network: Arc<LiabilityNetwork>,
    liquid: ScenarioMatrix,
    illiquid: Option<ScenarioMatrix>,
    demand: InverseDemand,
    groups: GroupMap,
    control: ClearingControl,
) -> Result<NetworkModel> {
    let n = network.n_firms();
    if liquid.n_firms() != n || groups.n_firms() != n {
        return Err(Error::Config(format!(
            "network has {n} firms, liquid scenarios {}, groups {}",
            liquid.n_firms(),
            groups.n_firms()
        )));
    }
    let mut max_shares: f64 = 0.0;
    if let Some(s) = &illiquid {
        if s.n_firms() != n || s.n_scenarios() != liquid.n_scenarios() {
            return Err(Error::Config("illiquid scenarios do not match liquid scenarios".into()));
        }
        for scen in s.scenarios() {
            if scen.iter().any(|v| *v < 0.0) {
                return Err(Error::Input("illiquid holdings must be non-negative".into()));
            }
            max_shares = max_shares.max(scen.iter().sum());
        }
    }
    if liquid.scenarios().any(|scen| scen.iter().any(|v| *v < 0.0)) {
        return Err(Error::Input("liquid holdings must be non-negative".into()));
    }
    demand.validate(max_shares)?;
    Ok(NetworkModel {
        network,
        liquid,
        illiquid,
        demand,
        groups,
        control,
    })
}

impl NetworkModel {
    pub fn network(&self) -> &LiabilityNetwork {
        &self.network
    }

    pub fn groups(&self) -> &GroupMap {
        &self.groups
    }

    /// Clears one scenario at allocation `k`.
    pub fn clear_scenario(&self, k: &[f64], scenario: usize) -> Result<ClearingResult> {
        let capital = self.capital(k)?;
        let x: Vec<f64> = self
            .liquid
            .scenario(scenario)
            .iter()
            .zip(&capital)
            .map(|(a, c)| a + c)
            .collect();
        let zeros = vec![0.0; x.len()];
        let s = self.illiquid.as_ref().map_or(&zeros[..], |m| m.scenario(scenario));
        clear(&self.network, &x, s, &self.demand, self.control)
    }

    fn capital(&self, k: &[f64]) -> Result<Vec<f64>> {
        if k.iter().any(|v| *v < 0.0) {
            return Err(Error::Parameter(format!(
                "network models take non-negative capital only, got {k:?}"
            )));
        }
        self.groups.expand(k)
    }
}

impl ValueModel for NetworkModel {
    fn capital_dim(&self) -> usize {
        self.groups.dim()
    }

    fn n_scenarios(&self) -> usize {
        self.liquid.n_scenarios()
    }

    fn evaluate(&self, k: &[f64]) -> Result<SampleVector> {
        let capital = self.capital(k)?;
        let n = capital.len();
        let zeros = vec![0.0; n];
        let values = (0..self.liquid.n_scenarios())
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], Vec::new()),
                |(x, scratch), scen| {
                    for ((xi, base), c) in x.iter_mut().zip(self.liquid.scenario(scen)).zip(&capital) {
                        *xi = base + c;
                    }
                    let s = self.illiquid.as_ref().map_or(&zeros[..], |m| m.scenario(scen));
                    let cleared =
                        clear_from_top(&self.network, x, s, &self.demand, self.control, scratch, |_, _| {})?;
                    Ok(society_equity(&self.network, &cleared.payments))
                },
            )
            .collect::<Result<Vec<_>>>()?;
        SampleVector::new(values)
    }

    fn describe(&self) -> String {
        format!(
            "network clearing over {} firms x {} scenarios{}",
            self.network.n_firms(),
            self.liquid.n_scenarios(),
            if self.illiquid.is_some() { " with fire sales" } else { "" }
        )
    }
}

impl Blend for NetworkModel {
    fn blend(&self, other: &Self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Parameter(format!("blend weight must lie in [0,1], got {alpha}")));
        }
        let liquid = self.liquid.blend(&other.liquid, alpha)?;
        let illiquid = match (&self.illiquid, &other.illiquid) {
            (Some(a), Some(b)) => Some(a.blend(b, alpha)?),
            (None, None) => None,
            _ => return Err(Error::Config("cannot blend models with and without illiquid holdings".into())),
        };
        make_network_cvm(
            self.network.clone(),
            liquid,
            illiquid,
            self.demand.clone(),
            self.groups.clone(),
            self.control,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_firm() -> LiabilityNetwork {
        // 1 owes 2 and society 1 each; 2 owes society 1
        build_relative(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn relative_liabilities() {
        let net = two_firm();
        assert_eq!(net.relative(1, 2), 0.5);
        assert_eq!(net.relative(1, 0), 0.5);
        assert_eq!(net.relative(0, 1), 0.0);
        assert_eq!(net.pbar(), &[0.0, 2.0, 1.0]);
        assert_eq!(net.promised_to_society(), 2.0);
    }

    #[test]
    fn negative_or_self_liability_rejected() {
        assert!(build_relative(&[vec![0.0, 0.0], vec![-1.0, 0.0]]).is_err());
        assert!(build_relative(&[vec![0.0, 0.0], vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn default_cascade_by_hand() {
        let net = two_firm();
        let r = clear(&net, &[0.5, 0.2], &[0.0, 0.0], &InverseDemand::default(), ClearingControl::default())
            .unwrap();
        assert!((r.payments[1] - 0.5).abs() < 1e-12);
        assert!((r.payments[2] - 0.45).abs() < 1e-12);
        let e = equity(&net, &[0.5, 0.2], &[0.0, 0.0], &InverseDemand::default(), ClearingControl::default())
            .unwrap();
        assert!((e[0] - 0.70).abs() < 1e-12);
    }

    #[test]
    fn fire_sale_single_firm() {
        let net = build_relative(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let f = InverseDemand::PowerLaw {
            scale: 1.0,
            exponent: 1.0,
            offset: 1.0,
        };
        let r = clear(&net, &[0.0], &[1.0], &f, ClearingControl::default()).unwrap();
        assert!((r.price - 0.5).abs() < 1e-10);
        assert!((r.payments[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn cifuentes_is_continuous_at_half() {
        let f = InverseDemand::CifuentesPiecewise;
        let left: f64 = 1.0 - 2.0 / 3.0 * 0.5;
        let right = 2f64.sqrt() / (3.0 * 0.5f64.sqrt());
        assert!((left - 2.0 / 3.0).abs() < 1e-15);
        assert!((right - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.price(0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.price(0.5 + 1e-12) - 2.0 / 3.0).abs() < 1e-11);
        f.validate(300.0).unwrap();
    }

    #[test]
    fn demand_assumption_checks() {
        InverseDemand::default().validate(10.0).unwrap();
        let inverse_square = InverseDemand::PowerLaw {
            scale: 1.0,
            exponent: 2.0,
            offset: 0.0,
        };
        assert!(inverse_square.validate(10.0).is_err());
        let steep = InverseDemand::LinearCap { slope: 1.0, floor: 0.01 };
        assert!(steep.validate(10.0).is_err());
        let mild = InverseDemand::LinearCap { slope: 0.01, floor: 0.5 };
        mild.validate(10.0).unwrap();
        let table = InverseDemand::Tabulated {
            shares: vec![0.0, 1.0, 2.0],
            prices: vec![1.0, 0.9, 0.8],
        };
        table.validate(2.0).unwrap();
        assert!((table.price(1.5) - 0.85).abs() < 1e-15);
    }

    #[test]
    fn iteration_limit_is_a_convergence_error() {
        // mutual obligations converge only geometrically
        let net = build_relative(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let control = ClearingControl { tol: 1e-15, max_iter: 3 };
        let err = clear(&net, &[0.1, 0.1], &[0.0, 0.0], &InverseDemand::default(), control).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 3, .. }));
    }

    #[test]
    fn edge_csv_round_trip() {
        let net = two_firm();
        let mut buf = Vec::new();
        net.write_edge_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("from,to,amount\n"));
        let back = LiabilityNetwork::from_edge_csv(&buf[..], None).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn negative_capital_rejected() {
        let net = Arc::new(two_firm());
        let x = ScenarioMatrix::from_scenarios(&[vec![0.5, 0.2]]).unwrap();
        let model = make_network_cvm(
            net,
            x,
            None,
            InverseDemand::default(),
            GroupMap::new(vec![1, 1]).unwrap(),
            ClearingControl::default(),
        )
        .unwrap();
        assert!(model.evaluate(&[-0.1, 0.0]).is_err());
        let y = model.evaluate(&[0.0, 0.0]).unwrap();
        assert!((y.values()[0] - 0.70).abs() < 1e-12);
        let rich = model.evaluate(&[5.0, 5.0]).unwrap();
        assert_eq!(rich.values()[0], 2.0);
    }
}
