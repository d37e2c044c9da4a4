//! Repeated-LP instances: a fixed polytope, a nominal cost, and a model for
//! drawing costs around it.

mod generators;
pub mod mps;
pub mod presets;

pub use generators::{
    gen_instance, GenParams, MaxFlowParams, MinCostFlowParams, PackingParams, RandomLpParams, ShortestPathParams,
};

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::json::{self, SCHEMA_VERSION};
use crate::linalg::{self, Matrix};
use crate::lp::{self, Polytope};
use crate::oracle::PriorSpec;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Packing,
    MaxFlow,
    MinCostFlow,
    ShortestPathGrid,
    RandomLp,
    Example1,
    Mps,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Factor perturbation clipped to the ball of radius `R` around `c0`.
    KnownPriorClipped,
    /// Factor perturbation with standard deviations scaled by `eta`, unclipped.
    UnknownPriorFactor,
    /// `c0 + eta g` with `g` standard normal in every coordinate.
    UnknownPriorAmbient,
    /// Independent uniform coordinates on a box.
    UniformBox,
}

/// Cost law around a nominal cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub mode: CostMode,
    /// Orthonormal columns spanning the planted variation subspace.
    #[serde(rename = "U_c")]
    pub uc: Vec<Vec<f64>>,
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub clip_radius: Option<f64>,
    #[serde(default = "one")]
    pub eta: f64,
    /// Radius of the prior ball handed to a known-prior learner.
    #[serde(default)]
    pub prior_radius: Option<f64>,
    #[serde(default)]
    pub box_lo: Option<Vec<f64>>,
    #[serde(default)]
    pub box_hi: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

/// User-facing cost parameters; `build` turns them into a [`CostModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub mode: CostMode,
    pub r_c: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Sampling and clipping radius `R`.
    pub radius: f64,
    /// Known-prior ball radius; defaults to `radius`.
    pub prior_radius: Option<f64>,
    pub eta: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            mode: CostMode::KnownPriorClipped,
            r_c: 2,
            alpha: 0.7,
            beta: 0.82,
            radius: 1.0,
            prior_radius: None,
            eta: 1.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.mode == CostMode::UniformBox {
            return Err(Error::Domain("uniform-box costs are built with CostModel::uniform_box".into()));
        }
        if self.r_c > d {
            return Err(Error::Domain(format!("r_c = {} exceeds d = {d}", self.r_c)));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("radius", self.radius), ("eta", self.eta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Draws `U_c` from the cost-subspace stream of `seed`.
    pub fn build(&self, d: usize, seed: u64) -> Result<CostModel> {
        self.validate(d)?;
        let mut g = rng::keyed(seed, rng::streams::COST_SUBSPACE, 0);
        let mut uc: Vec<Vec<f64>> = Vec::with_capacity(self.r_c);
        while uc.len() < self.r_c {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut g)).collect();
            let s = linalg::norm(&v);
            if let Some(q) = linalg::orthonormalize_against(&uc, &v, 1e-8 * s) {
                uc.push(q);
            }
        }
        let sigmas = (0..self.r_c)
            .map(|j| self.alpha * self.radius * self.beta.powi(j as i32))
            .collect();
        Ok(CostModel {
            mode: self.mode,
            uc,
            sigmas,
            clip_radius: (self.mode == CostMode::KnownPriorClipped).then_some(self.radius),
            eta: self.eta,
            prior_radius: Some(self.prior_radius.unwrap_or(self.radius)),
            box_lo: None,
            box_hi: None,
        })
    }
}

impl CostModel {
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        ensure_len("box upper corner", hi.len(), lo.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::Domain("box needs lo <= hi".into()));
        }
        Ok(Self {
            mode: CostMode::UniformBox,
            uc: Vec::new(),
            sigmas: Vec::new(),
            clip_radius: None,
            eta: 1.0,
            prior_radius: None,
            box_lo: Some(lo),
            box_hi: Some(hi),
        })
    }

    /// Sample `index` of stream `stream` under `seed`.
    pub fn draw(&self, c0: &[f64], seed: u64, stream: u64, index: u64) -> Vec<f64> {
        let mut g = rng::keyed(seed, stream, index);
        match self.mode {
            CostMode::KnownPriorClipped | CostMode::UnknownPriorFactor => {
                let scale = if self.mode == CostMode::UnknownPriorFactor { self.eta } else { 1.0 };
                let mut delta = vec![0.0; c0.len()];
                for (col, s) in self.uc.iter().zip(&self.sigmas) {
                    let z: f64 = StandardNormal.sample(&mut g);
                    linalg::axpy(scale * s * z, col, &mut delta);
                }
                if let Some(r) = self.clip_radius {
                    let n = linalg::norm(&delta);
                    if n > r {
                        let f = if n > 0.0 { r / n } else { 0.0 };
                        delta.iter_mut().for_each(|x| *x *= f);
                    }
                }
                linalg::add(c0, &delta)
            }
            CostMode::UnknownPriorAmbient => c0
                .iter()
                .map(|c| {
                    let z: f64 = StandardNormal.sample(&mut g);
                    c + self.eta * z
                })
                .collect(),
            CostMode::UniformBox => {
                let lo = self.box_lo.as_deref().unwrap_or(&[]);
                let hi = self.box_hi.as_deref().unwrap_or(&[]);
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| if l < h { g.random_range(*l..*h) } else { *l })
                    .collect()
            }
        }
    }

    /// The prior set a known-prior learner is given, if the model defines one.
    pub fn prior_spec(&self, c0: &[f64]) -> Option<PriorSpec> {
        match self.mode {
            CostMode::UniformBox => Some(PriorSpec::Box {
                lo: self.box_lo.clone()?,
                hi: self.box_hi.clone()?,
            }),
            CostMode::KnownPriorClipped => Some(PriorSpec::Ball {
                center: c0.to_vec(),
                radius: self.prior_radius.or(self.clip_radius)?,
            }),
            _ => None,
        }
    }
}

/// A polytope with its nominal cost and cost law.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub kind: InstanceKind,
    pub polytope: Polytope,
    pub c0: Vec<f64>,
    pub cost_model: CostModel,
    pub meta: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    schema: u32,
    name: String,
    kind: InstanceKind,
    #[serde(flatten)]
    polytope: Polytope,
    c0: Vec<f64>,
    cost_model: CostModel,
    #[serde(default)]
    meta: BTreeMap<String, serde_json::Value>,
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    /// `n` costs from stream `stream`, indices `0..n`.
    pub fn sample_on(&self, stream: u64, n: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..n as u64).map(|i| self.cost_model.draw(&self.c0, seed, stream, i)).collect()
    }

    /// Lazy cost stream; every item depends only on `(seed, stream, index)`.
    pub fn cost_stream(&self, stream: u64, seed: u64) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0u64..).map(move |i| self.cost_model.draw(&self.c0, seed, stream, i))
    }

    pub fn prior_spec(&self) -> Option<PriorSpec> {
        self.cost_model.prior_spec(&self.c0)
    }

    pub fn to_json(&self) -> Result<String> {
        json::to_string(&InstanceFile {
            schema: SCHEMA_VERSION,
            name: self.name.clone(),
            kind: self.kind,
            polytope: self.polytope.clone(),
            c0: self.c0.clone(),
            cost_model: self.cost_model.clone(),
            meta: self.meta.clone(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text)?;
        if f.schema != SCHEMA_VERSION {
            return Err(Error::Domain(format!("unsupported schema version {}", f.schema)));
        }
        ensure_len("c0", f.c0.len(), f.polytope.dim())?;
        Ok(Self {
            name: f.name,
            kind: f.kind,
            polytope: f.polytope,
            c0: f.c0,
            cost_model: f.cost_model,
            meta: f.meta,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `n` costs from the training stream.
pub fn sample_costs(inst: &Instance, n: usize, seed: u64) -> Vec<Vec<f64>> {
    inst.sample_on(rng::streams::TRAIN, n, seed)
}

/// Loads a JSON instance, or an MPS file normalized to inequality form with
/// the supplied cost parameters attached.
pub fn load_instance(path: &Path, cost: Option<&CostParams>, seed: u64) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let mut inst = Instance::from_json(&text)?;
        if let Some(cp) = cost {
            inst.cost_model = cp.build(inst.dim(), seed)?;
        }
        return Ok(inst);
    }
    let g = mps::parse_mps(&text)?;
    let norm = lp::normalize_to_inequality_form(&g)?;
    let d = norm.polytope.dim();
    let cp = cost.cloned().unwrap_or_default();
    let mut meta = BTreeMap::new();
    meta.insert("source".into(), serde_json::json!(path.display().to_string()));
    meta.insert("value_offset".into(), serde_json::json!(norm.value_offset));
    meta.insert("variable_shift".into(), serde_json::json!(norm.variable_map.shift));
    meta.insert("sense_sign".into(), serde_json::json!(norm.variable_map.sense_sign));
    meta.insert("cost_params".into(), serde_json::to_value(&cp)?);
    Ok(Instance {
        name: if g.name.is_empty() { "mps".into() } else { g.name.clone() },
        kind: InstanceKind::Mps,
        cost_model: cp.build(d, seed)?,
        polytope: norm.polytope,
        c0: norm.cost,
        meta,
    })
}

/// For each coordinate, whether rows `+e_j x <= u` and `-e_j x <= -l` both
/// exist (up to positive scaling).
pub fn has_box_rows(p: &Polytope) -> bool {
    let d = p.dim();
    let mut up = vec![false; d];
    let mut down = vec![false; d];
    for i in 0..p.rows() {
        let r = p.a().row(i);
        let nz: Vec<usize> = (0..d).filter(|&j| r[j] != 0.0).collect();
        if let [j] = nz[..] {
            if r[j] > 0.0 {
                up[j] = true;
            } else {
                down[j] = true;
            }
        }
    }
    up.into_iter().zip(down).all(|(a, b)| a && b)
}

/// Dense polytope from row triplets, used by the generators.
pub(crate) fn polytope_from_rows(d: usize, rows: Vec<(Vec<(usize, f64)>, f64)>) -> Result<Polytope> {
    let mut a = Matrix::zeros(rows.len(), d);
    let mut b = Vec::with_capacity(rows.len());
    for (i, (entries, rhs)) in rows.into_iter().enumerate() {
        for (j, v) in entries {
            a.set(i, j, a.get(i, j) + v);
        }
        b.push(rhs);
    }
    Polytope::new(a, b)
}
