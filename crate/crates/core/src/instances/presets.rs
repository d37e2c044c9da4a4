//! Named instance configurations: the benchmark families at full size, small
//! desk-scale variants, the two-dimensional affine-versus-homogeneous
//! example, and stored cost parameters for the Netlib cases.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generators::*;
use super::{load_instance, CostMode, CostModel, CostParams, Instance, InstanceKind};
use crate::error::{Error, Result};
use crate::lp::Polytope;

/// Stored constants for an MPS case; the file itself must be supplied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetlibInfo {
    pub d: usize,
    pub c0_norm: f64,
    pub c0_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresetSource {
    Generated(GenParams),
    Example1,
    Netlib(NetlibInfo),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub source: PresetSource,
    pub cost: CostParams,
}

fn factor(r_c: usize, alpha: f64, beta: f64, radius: f64, prior_radius: f64, eta: f64) -> CostParams {
    CostParams {
        mode: CostMode::KnownPriorClipped,
        r_c,
        alpha,
        beta,
        radius,
        prior_radius: Some(prior_radius),
        eta,
    }
}

fn random_lp(d: usize, norm: f64) -> PresetSource {
    PresetSource::Generated(GenParams::RandomLp(RandomLpParams {
        d,
        m: 2 * d,
        c0_norm: Some(norm),
        ..Default::default()
    }))
}

fn netlib(d: usize, c0_norm: f64, lo: f64, hi: f64) -> PresetSource {
    PresetSource::Netlib(NetlibInfo {
        d,
        c0_norm,
        c0_range: (lo, hi),
    })
}

pub fn all() -> Vec<Preset> {
    use PresetSource::Generated as G;
    vec![
        Preset {
            name: "example1",
            source: PresetSource::Example1,
            cost: CostParams::default(),
        },
        Preset {
            name: "packing-360",
            source: G(GenParams::Packing(PackingParams::default())),
            cost: factor(28, 0.92, 0.94, 1.524, 1.694, 0.35),
        },
        Preset {
            name: "maxflow-300",
            source: G(GenParams::MaxFlow(MaxFlowParams::default())),
            cost: factor(12, 0.95, 1.00, 1.15e-3, 1.28e-3, 1.0),
        },
        Preset {
            name: "mincostflow-360",
            source: G(GenParams::MinCostFlow(MinCostFlowParams::default())),
            cost: factor(28, 0.72, 0.94, 3.492, 3.968, 0.35),
        },
        Preset {
            name: "shortest-path-16",
            source: G(GenParams::ShortestPathGrid(ShortestPathParams::default())),
            cost: factor(16, 0.70, 0.82, 4.49e-2, 4.72e-2, 1.0),
        },
        Preset {
            name: "randomlp-a",
            source: random_lp(140, 10.763),
            cost: factor(24, 0.70, 0.82, 2.64e-3, 2.87e-3, 20.0),
        },
        Preset {
            name: "randomlp-b",
            source: random_lp(180, 13.100),
            cost: factor(26, 0.70, 0.82, 7.26e-3, 8.07e-3, 20.0),
        },
        Preset {
            name: "randomlp-c",
            source: random_lp(220, 14.803),
            cost: factor(28, 0.70, 0.82, 1.89e-3, 2.15e-3, 20.0),
        },
        Preset {
            name: "randomlp-d",
            source: random_lp(260, 16.075),
            cost: factor(30, 0.70, 0.82, 2.06e-3, 2.40e-3, 20.0),
        },
        Preset {
            name: "grow7",
            source: netlib(301, 20.445, -7.0, 0.0),
            cost: factor(20, 0.70, 0.82, 1.16e-2, 1.26e-2, 0.35),
        },
        Preset {
            name: "sc205",
            source: netlib(203, 1.0, -1.0, 0.0),
            cost: CostParams {
                mode: CostMode::UnknownPriorAmbient,
                ..factor(20, 0.70, 0.82, 3.58e-4, 3.89e-4, 5.2)
            },
        },
        Preset {
            name: "scagr25",
            source: netlib(500, 4375.781, -662.0, 54.9),
            cost: factor(24, 0.70, 0.82, 4.42e-2, 4.80e-2, 1.0),
        },
        Preset {
            name: "stair",
            source: netlib(473, 1.0, -1.0, 0.0),
            cost: factor(10, 0.70, 0.82, 1.63e-6, 8.14e-5, 1.0),
        },
        Preset {
            name: "packing-desk",
            source: G(GenParams::Packing(PackingParams {
                blocks: 2,
                items_per_block: 3,
                resources_per_block: 1,
                global_rows: 1,
                c0_norm: None,
                ..Default::default()
            })),
            cost: factor(3, 0.9, 0.9, 1.5, 1.5, 1.0),
        },
        Preset {
            name: "randomlp-desk",
            source: G(GenParams::RandomLp(RandomLpParams {
                d: 3,
                m: 6,
                c0_norm: Some(1.0),
                ..Default::default()
            })),
            cost: factor(2, 0.7, 0.82, 0.6, 0.6, 1.0),
        },
        Preset {
            name: "shortest-path-4",
            source: G(GenParams::ShortestPathGrid(ShortestPathParams {
                grid: 4,
                ..Default::default()
            })),
            cost: factor(4, 0.7, 0.82, 30.0, 30.0, 1.0),
        },
        Preset {
            name: "mincostflow-desk",
            source: G(GenParams::MinCostFlow(MinCostFlowParams {
                nodes: 6,
                arcs: 14,
                max_capacity: 3,
                cost_lo: -20.0,
                cost_hi: 10.0,
                integral_costs: true,
            })),
            cost: factor(4, 0.7, 0.82, 12.0, 12.0, 1.0),
        },
        Preset {
            name: "maxflow-desk",
            source: G(GenParams::MaxFlow(MaxFlowParams {
                nodes: 4,
                arcs: 5,
                max_capacity: 3,
                c0_norm: None,
                ..Default::default()
            })),
            cost: factor(2, 0.7, 0.82, 1.0, 1.0, 1.0),
        },
    ]
}

pub fn find(name: &str) -> Result<Preset> {
    all()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Domain(format!("unknown preset '{name}'")))
}

/// The square `[-1,1]^2` with costs uniform on `(-1-rho, -1) x (-1, 1)`.
pub fn example1(rho: f64) -> Result<Instance> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let mut meta = BTreeMap::new();
    meta.insert(
        "prior".into(),
        serde_json::json!({"shape": "box", "lo": [-1.0 - rho, -1.0], "hi": [-1.0, 1.0], "rho": rho}),
    );
    Ok(Instance {
        name: "example1".into(),
        kind: InstanceKind::Example1,
        polytope: Polytope::cube(2, -1.0, 1.0),
        c0: vec![-1.0 - rho / 2.0, 0.5],
        cost_model: CostModel::uniform_box(vec![-1.0 - rho, -1.0], vec![-1.0, 1.0])?,
        meta,
    })
}

/// Builds a generated preset (or `example1`). `cost` overrides the stored
/// cost parameters.
pub fn build(name: &str, seed: u64, rho: f64, cost: Option<&CostParams>) -> Result<Instance> {
    let preset = find(name)?;
    let cp = cost.cloned().unwrap_or(preset.cost.clone());
    let mut inst = match &preset.source {
        PresetSource::Example1 => return example1(rho),
        PresetSource::Generated(g) => gen_instance(g, &cp, seed)?,
        PresetSource::Netlib(_) => {
            return Err(Error::Domain(format!("preset '{name}' needs an MPS file (use build_from_mps)")))
        }
    };
    inst.name = name.to_string();
    inst.meta.insert("preset".into(), serde_json::json!(name));
    Ok(inst)
}

/// Loads an MPS file with the cost parameters stored for a Netlib preset.
pub fn build_from_mps(name: &str, path: &Path, seed: u64) -> Result<Instance> {
    let preset = find(name)?;
    let PresetSource::Netlib(info) = &preset.source else {
        return Err(Error::Domain(format!("preset '{name}' is not an MPS case")));
    };
    let mut inst = load_instance(path, Some(&preset.cost), seed)?;
    inst.name = name.to_string();
    inst.meta.insert("preset".into(), serde_json::json!(name));
    inst.meta.insert("table".into(), serde_json::to_value(info)?);
    Ok(inst)
}
