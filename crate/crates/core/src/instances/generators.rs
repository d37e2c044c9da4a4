//! Seeded synthetic families. Every generator also returns a point it
//! constructed to be feasible, and every family carries explicit box rows,
//! so feasibility and boundedness follow from the construction.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{has_box_rows, polytope_from_rows, CostParams, Instance, InstanceKind};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, Feasibility, Polytope};
use crate::rng;

type Rows = Vec<(Vec<(usize, f64)>, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PackingParams {
    pub blocks: usize,
    pub items_per_block: usize,
    pub resources_per_block: usize,
    pub global_rows: usize,
    /// Capacity as a fraction of the total row weight.
    pub fill: f64,
    /// Nominal values are drawn from `[cost_lo, 0]`.
    pub cost_lo: f64,
    /// Rescale `c0` to this norm (must not push entries below `cost_lo`).
    pub c0_norm: Option<f64>,
}

impl Default for PackingParams {
    fn default() -> Self {
        Self {
            blocks: 12,
            items_per_block: 30,
            resources_per_block: 3,
            global_rows: 2,
            fill: 0.35,
            cost_lo: -4.069,
            c0_norm: Some(42.344),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaxFlowParams {
    pub nodes: usize,
    pub arcs: usize,
    pub max_capacity: u32,
    pub cost_lo: f64,
    pub c0_norm: Option<f64>,
}

impl Default for MaxFlowParams {
    fn default() -> Self {
        Self {
            nodes: 60,
            arcs: 300,
            max_capacity: 10,
            cost_lo: -3.239,
            c0_norm: Some(22.212),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinCostFlowParams {
    pub nodes: usize,
    pub arcs: usize,
    pub max_capacity: u32,
    pub cost_lo: f64,
    pub cost_hi: f64,
    /// Round nominal costs to integers.
    pub integral_costs: bool,
}

impl Default for MinCostFlowParams {
    fn default() -> Self {
        Self {
            nodes: 60,
            arcs: 360,
            max_capacity: 4,
            cost_lo: -464.8,
            cost_hi: -4.96,
            integral_costs: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShortestPathParams {
    pub grid: usize,
    pub cost_min: u32,
    pub cost_max: u32,
}

impl Default for ShortestPathParams {
    fn default() -> Self {
        Self {
            grid: 16,
            cost_min: 3,
            cost_max: 95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomLpParams {
    pub d: usize,
    /// Random rows, in addition to the `2d` box rows.
    pub m: usize,
    pub box_bound: f64,
    pub slack_lo: f64,
    pub slack_hi: f64,
    pub c0_norm: Option<f64>,
}

impl Default for RandomLpParams {
    fn default() -> Self {
        Self {
            d: 140,
            m: 280,
            box_bound: 1.0,
            slack_lo: 0.05,
            slack_hi: 0.5,
            c0_norm: Some(10.763),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenParams {
    Packing(PackingParams),
    MaxFlow(MaxFlowParams),
    MinCostFlow(MinCostFlowParams),
    ShortestPathGrid(ShortestPathParams),
    RandomLp(RandomLpParams),
}

impl GenParams {
    pub fn kind(&self) -> InstanceKind {
        match self {
            GenParams::Packing(_) => InstanceKind::Packing,
            GenParams::MaxFlow(_) => InstanceKind::MaxFlow,
            GenParams::MinCostFlow(_) => InstanceKind::MinCostFlow,
            GenParams::ShortestPathGrid(_) => InstanceKind::ShortestPathGrid,
            GenParams::RandomLp(_) => InstanceKind::RandomLp,
        }
    }
}

fn bound_rows(rows: &mut Rows, d: usize, upper: &[f64]) {
    for (j, u) in upper.iter().enumerate().take(d) {
        rows.push((vec![(j, -1.0)], 0.0));
        rows.push((vec![(j, 1.0)], *u));
    }
}

fn equality(rows: &mut Rows, entries: Vec<(usize, f64)>, rhs: f64) {
    let neg = entries.iter().map(|&(j, v)| (j, -v)).collect();
    rows.push((entries, rhs));
    rows.push((neg, -rhs));
}

/// Uniform on `[lo, 0]`, optionally rescaled to `target` norm.
fn nonpositive_costs(g: &mut ChaCha8Rng, d: usize, lo: f64, target: Option<f64>) -> Result<Vec<f64>> {
    let mut c: Vec<f64> = (0..d).map(|_| g.random_range(lo..=0.0)).collect();
    if let Some(t) = target {
        let n = linalg::norm(&c);
        if n == 0.0 {
            return Err(Error::Generation("nominal cost is zero".into()));
        }
        c.iter_mut().for_each(|x| *x *= t / n);
        if c.iter().any(|&x| x < lo) {
            return Err(Error::Generation(format!(
                "rescaling to norm {t} pushes costs below {lo}"
            )));
        }
    }
    Ok(c)
}

fn packing(p: &PackingParams, g: &mut ChaCha8Rng) -> Result<(Polytope, Vec<f64>, Vec<f64>)> {
    let d = p.blocks * p.items_per_block;
    if d == 0 {
        return Err(Error::Domain("packing needs at least one item".into()));
    }
    let mut rows: Rows = Vec::new();
    for blk in 0..p.blocks {
        let items = blk * p.items_per_block..(blk + 1) * p.items_per_block;
        for _ in 0..p.resources_per_block {
            let entries: Vec<(usize, f64)> = items.clone().map(|j| (j, g.random_range(0.1..1.0))).collect();
            let total: f64 = entries.iter().map(|e| e.1).sum();
            rows.push((entries, p.fill * total));
        }
    }
    for _ in 0..p.global_rows {
        let entries: Vec<(usize, f64)> = (0..d).map(|j| (j, g.random_range(0.0..0.2))).collect();
        let total: f64 = entries.iter().map(|e| e.1).sum();
        rows.push((entries, p.fill * total));
    }
    bound_rows(&mut rows, d, &vec![1.0; d]);
    let c0 = nonpositive_costs(g, d, p.cost_lo, p.c0_norm)?;
    Ok((polytope_from_rows(d, rows)?, c0, vec![0.0; d]))
}

/// Backbone chain `0 -> 1 -> ... -> n-1` plus random distinct arcs.
fn random_arcs(g: &mut ChaCha8Rng, nodes: usize, arcs: usize, forward_only: bool) -> Result<Vec<(usize, usize)>> {
    if nodes < 2 || arcs < nodes - 1 {
        return Err(Error::Domain(format!("{arcs} arcs cannot connect {nodes} nodes by a chain")));
    }
    let max = if forward_only { nodes * (nodes - 1) / 2 } else { nodes * (nodes - 1) };
    if arcs > max {
        return Err(Error::Domain(format!("{arcs} arcs exceed the {max} available on {nodes} nodes")));
    }
    let mut list: Vec<(usize, usize)> = (0..nodes - 1).map(|i| (i, i + 1)).collect();
    let mut seen: BTreeSet<(usize, usize)> = list.iter().copied().collect();
    while list.len() < arcs {
        let a = g.random_range(0..nodes);
        let b = g.random_range(0..nodes);
        if a == b {
            continue;
        }
        let e = if forward_only { (a.min(b), a.max(b)) } else { (a, b) };
        if seen.insert(e) {
            list.push(e);
        }
    }
    Ok(list)
}

/// Balance rows `out(v) - in(v) = supply(v)` for the listed nodes.
fn balance_rows(rows: &mut Rows, arcs: &[(usize, usize)], nodes: impl Iterator<Item = usize>, supply: impl Fn(usize) -> f64) {
    let mut incident: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (j, &(a, b)) in arcs.iter().enumerate() {
        incident.entry(a).or_default().push((j, 1.0));
        incident.entry(b).or_default().push((j, -1.0));
    }
    for v in nodes {
        let entries = incident.remove(&v).unwrap_or_default();
        equality(rows, entries, supply(v));
    }
}

fn max_flow(p: &MaxFlowParams, g: &mut ChaCha8Rng) -> Result<(Polytope, Vec<f64>, Vec<f64>)> {
    let arcs = random_arcs(g, p.nodes, p.arcs, true)?;
    let d = arcs.len();
    let caps: Vec<f64> = (0..d).map(|_| f64::from(g.random_range(1..=p.max_capacity.max(1)))).collect();
    let mut rows: Rows = Vec::new();
    balance_rows(&mut rows, &arcs, 1..p.nodes - 1, |_| 0.0);
    bound_rows(&mut rows, d, &caps);
    let c0 = nonpositive_costs(g, d, p.cost_lo, p.c0_norm)?;
    Ok((polytope_from_rows(d, rows)?, c0, vec![0.0; d]))
}

fn min_cost_flow(p: &MinCostFlowParams, g: &mut ChaCha8Rng) -> Result<(Polytope, Vec<f64>, Vec<f64>)> {
    let arcs = random_arcs(g, p.nodes, p.arcs, false)?;
    let d = arcs.len();
    let caps: Vec<f64> = (0..d).map(|_| f64::from(g.random_range(1..=p.max_capacity.max(1)))).collect();
    let sink = p.nodes - 1;
    let mut rows: Rows = Vec::new();
    balance_rows(&mut rows, &arcs, 0..p.nodes, |v| {
        if v == 0 {
            1.0
        } else if v == sink {
            -1.0
        } else {
            0.0
        }
    });
    bound_rows(&mut rows, d, &caps);
    let c0: Vec<f64> = (0..d)
        .map(|_| {
            let c = g.random_range(p.cost_lo..=p.cost_hi);
            if p.integral_costs {
                c.round()
            } else {
                c
            }
        })
        .collect();
    let mut witness = vec![0.0; d];
    witness[..p.nodes - 1].iter_mut().for_each(|x| *x = 1.0);
    Ok((polytope_from_rows(d, rows)?, c0, witness))
}

fn shortest_path(p: &ShortestPathParams, g: &mut ChaCha8Rng) -> Result<(Polytope, Vec<f64>, Vec<f64>)> {
    let n = p.grid;
    if n < 2 {
        return Err(Error::Domain("grid needs at least 2 x 2 nodes".into()));
    }
    let id = |r: usize, c: usize| r * n + c;
    let mut arcs = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n {
                arcs.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < n {
                arcs.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let d = arcs.len();
    let (s, t) = (0, id(n - 1, n - 1));
    let mut rows: Rows = Vec::new();
    balance_rows(&mut rows, &arcs, 0..n * n, |v| {
        if v == s {
            1.0
        } else if v == t {
            -1.0
        } else {
            0.0
        }
    });
    bound_rows(&mut rows, d, &vec![1.0; d]);
    let (lo, hi) = (p.cost_min.min(p.cost_max), p.cost_max.max(p.cost_min));
    let c0: Vec<f64> = (0..d).map(|_| -f64::from(g.random_range(lo..=hi))).collect();
    let mut witness = vec![0.0; d];
    for (j, &(a, b)) in arcs.iter().enumerate() {
        let along_top = a < n && b == a + 1;
        let down_right = a % n == n - 1 && b == a + n;
        if along_top || down_right {
            witness[j] = 1.0;
        }
    }
    Ok((polytope_from_rows(d, rows)?, c0, witness))
}

fn random_lp(p: &RandomLpParams, g: &mut ChaCha8Rng) -> Result<(Polytope, Vec<f64>, Vec<f64>)> {
    let d = p.d;
    if d == 0 {
        return Err(Error::Domain("random LP needs d >= 1".into()));
    }
    let interior: Vec<f64> = (0..d).map(|_| p.box_bound * g.random_range(-0.5..0.5)).collect();
    let mut rows: Rows = Vec::new();
    for _ in 0..p.m {
        let mut a: Vec<f64> = (0..d).map(|_| StandardNormal.sample(g)).collect();
        let n = linalg::norm(&a);
        a.iter_mut().for_each(|x| *x /= n);
        let slack = g.random_range(p.slack_lo..=p.slack_hi);
        let rhs = linalg::dot(&a, &interior) + slack;
        rows.push((a.into_iter().enumerate().collect(), rhs));
    }
    for j in 0..d {
        rows.push((vec![(j, 1.0)], p.box_bound));
        rows.push((vec![(j, -1.0)], p.box_bound));
    }
    let mut c0: Vec<f64> = (0..d).map(|_| StandardNormal.sample(g)).collect();
    if let Some(t) = p.c0_norm {
        let n = linalg::norm(&c0);
        c0.iter_mut().for_each(|x| *x *= t / n);
    }
    Ok((polytope_from_rows(d, rows)?, c0, interior))
}

/// Builds an instance deterministically from `(params, cost, seed)`.
pub fn gen_instance(params: &GenParams, cost: &CostParams, seed: u64) -> Result<Instance> {
    let mut g = rng::keyed(seed, rng::streams::INSTANCE, 0);
    let (polytope, c0, witness) = match params {
        GenParams::Packing(p) => packing(p, &mut g)?,
        GenParams::MaxFlow(p) => max_flow(p, &mut g)?,
        GenParams::MinCostFlow(p) => min_cost_flow(p, &mut g)?,
        GenParams::ShortestPathGrid(p) => shortest_path(p, &mut g)?,
        GenParams::RandomLp(p) => random_lp(p, &mut g)?,
    };
    if !polytope.is_feasible_point(&witness, 1e-9) {
        return Err(Error::Generation("construction point violates the generated rows".into()));
    }
    if !has_box_rows(&polytope) {
        return Err(Error::Generation("generated polytope lacks explicit bounds".into()));
    }
    if polytope.dim() <= 8 && lp::check_feasible_bounded(&polytope)? != Feasibility::FeasibleBounded {
        return Err(Error::Generation("generated polytope is not feasible and bounded".into()));
    }
    let d = polytope.dim();
    let mut meta = BTreeMap::new();
    meta.insert("seed".into(), serde_json::json!(seed));
    meta.insert("generator".into(), serde_json::to_value(params)?);
    meta.insert("cost_params".into(), serde_json::to_value(cost)?);
    meta.insert("feasible_point".into(), serde_json::to_value(&witness)?);
    Ok(Instance {
        name: format!("{:?}", params.kind()).to_lowercase(),
        kind: params.kind(),
        cost_model: cost.build(d, seed)?,
        polytope,
        c0,
        meta,
    })
}
