use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::Tally;
use crate::baselines::{self, ProjectionKind, ProjectionModel};
use crate::compression::CompressionModel;
use crate::error::{Error, Result};
use crate::instances::{load_instance, presets, Instance};
use crate::learner::{self, AnchorSource, Certificate, LearnTrace};
use crate::lp::{self, SolveResult, Tolerances};
use crate::prior::{self, EstimatedPrior};
use crate::rng::streams;

/// Baseline values within this relative distance of the full optimum count
/// as exact.
pub const VALUE_MATCH_TOL: f64 = 1e-6;

/// Resolves the configured instance with the master seed.
pub fn load_configured_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let spec = &cfg.instance;
    let cost = spec.cost.as_ref();
    match (&spec.preset, &spec.path) {
        (Some(name), None) => presets::build(name, cfg.seed, spec.box_rho, cost),
        (Some(name), Some(path)) => {
            let preset = presets::find(name)?;
            let mut inst = if cost.is_none() && matches!(preset.source, presets::PresetSource::Netlib(_)) {
                presets::build_from_mps(name, path, cfg.seed)?
            } else {
                load_instance(path, Some(cost.unwrap_or(&preset.cost)), cfg.seed)?
            };
            inst.name = name.clone();
            Ok(inst)
        }
        (None, Some(path)) => load_instance(path, cost, cfg.seed),
        (None, None) => Err(Error::Domain("instance needs a preset or a path".into())),
    }
}

/// Learning inputs shared by every prefix of one repetition: the anchor,
/// the optional calibrated prior and the retained training stream.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub seed: u64,
    pub known_prior: bool,
    pub rho: f64,
    pub delta1: f64,
    pub anchor: AnchorSource,
    pub x0: Vec<f64>,
    pub prior: Option<EstimatedPrior>,
    pub training: Vec<Vec<f64>>,
    /// Stream position of each retained cost.
    pub positions: Vec<usize>,
}

/// A learned model with its certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Learned {
    pub model: CompressionModel,
    pub trace: LearnTrace,
    pub certificate: Option<Certificate>,
    pub composite: Option<f64>,
    /// The certificate reported in the metrics: composite for an estimated
    /// prior, fast-rate otherwise, 0 without samples.
    pub cert_lb: f64,
    pub skipped: usize,
    pub n: usize,
}

/// Candidate draws scanned while retaining `n` members.
fn stream_cap(n: usize) -> usize {
    10_000 + 100 * n
}

/// Pilot fit and calibration only.
pub fn calibrate_prior(inst: &Instance, cfg: &ExperimentConfig, rho: f64, seed: u64) -> Result<EstimatedPrior> {
    let pilot = inst.sample_on(streams::PILOT, cfg.m_fit + cfg.m_cal, seed);
    let (fit, cal) = pilot.split_at(cfg.m_fit);
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => prior::default_lambda(fit)?,
    };
    prior::calibrate(prior::fit_score(fit, lambda)?, cal, rho, cfg.delta0)
}

impl Prepared {
    /// Draws the pilot (unless the prior is known), builds the anchor and
    /// retains `n_max` training costs.
    pub fn new(inst: &Instance, cfg: &ExperimentConfig, rho: f64, n_max: usize, seed: u64) -> Result<Self> {
        let p = &inst.polytope;
        if cfg.known_prior {
            let x0 = learner::make_anchor(p, &inst.c0)?;
            return Ok(Self {
                seed,
                known_prior: true,
                rho,
                delta1: cfg.delta1,
                anchor: AnchorSource::SuppliedCost(inst.c0.clone()),
                x0,
                prior: None,
                training: inst.sample_on(streams::TRAIN, n_max, seed),
                positions: (0..n_max).collect(),
            });
        }
        let est = calibrate_prior(inst, cfg, rho, seed)?;
        let center = est.anchor_cost();
        let x0 = learner::make_anchor(p, &center)?;
        let kept = prior::retain_stream(
            &est,
            inst.cost_stream(streams::REPRESENTATION, seed).take(stream_cap(n_max)),
            n_max,
        )?;
        Ok(Self {
            seed,
            known_prior: false,
            rho,
            delta1: cfg.delta1,
            anchor: AnchorSource::PriorCenter(center),
            x0,
            prior: Some(est),
            training: kept.costs,
            positions: kept.positions,
        })
    }

    pub fn n_max(&self) -> usize {
        self.training.len()
    }

    /// Learns from the first `n` retained costs.
    pub fn learn(&self, inst: &Instance, n: usize, tol: &Tolerances) -> Result<Learned> {
        if n > self.n_max() {
            return Err(Error::Domain(format!("prefix {n} exceeds the {} retained costs", self.n_max())));
        }
        let (mut model, mut trace) = learner::learn(&inst.polytope, &self.x0, &self.training[..n], tol)?;
        trace.anchor = self.anchor.clone();
        model.provenance.seed = Some(self.seed);
        model.provenance.anchor_cost = match &self.anchor {
            AnchorSource::SuppliedCost(c) | AnchorSource::PriorCenter(c) => Some(c.clone()),
            AnchorSource::Explicit => None,
        };
        let t = trace.hard_set.len();
        let skipped = if n == 0 { 0 } else { self.positions[n - 1] + 1 - n };
        let (certificate, composite, cert_lb) = if n == 0 {
            (None, None, 0.0)
        } else {
            let cert = learner::certificate_bound(n, t, self.delta1)?;
            if self.known_prior {
                (Some(cert), None, cert.lower_bound)
            } else {
                let comp = prior::composite_certificate(self.rho, n, t, self.delta1)?;
                (Some(cert), Some(comp), comp)
            }
        };
        Ok(Learned {
            model,
            trace,
            certificate,
            composite,
            cert_lb,
            skipped,
            n,
        })
    }

    /// Full-LP optimizers of the first `n` training costs.
    pub fn training_solutions(&self, inst: &Instance, n: usize) -> Result<Vec<Vec<f64>>> {
        self.training[..n]
            .iter()
            .map(|c| Ok(lp::solve_lp(&inst.polytope, c)?.expect_optimal("training solve")?.x))
            .collect()
    }
}

/// Fresh test costs with their full-LP values. Costs whose full LP has no
/// optimum are dropped.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub costs: Vec<Vec<f64>>,
    pub full: Vec<f64>,
}

impl TestSet {
    pub fn draw(inst: &Instance, n: usize, seed: u64) -> Result<Self> {
        let mut costs = Vec::with_capacity(n);
        let mut full = Vec::with_capacity(n);
        for c in inst.sample_on(streams::TEST, n, seed) {
            if let SolveResult::Optimal(o) = lp::solve_lp(&inst.polytope, &c)? {
                full.push(o.value);
                costs.push(c);
            }
        }
        Ok(Self { costs, full })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }
}

/// Objective ratios from the reduced LP, exactness from the containment test.
pub fn eval_model(inst: &Instance, model: &CompressionModel, ts: &TestSet) -> Result<Tally> {
    let mut t = Tally::default();
    for (c, &full) in ts.costs.iter().zip(&ts.full) {
        match model.solve_via_compression(&inst.polytope, c)? {
            SolveResult::Optimal(o) => {
                let exact = model.check_exact(&inst.polytope, c)?;
                t.push_optimal(o.value, full, exact);
            }
            SolveResult::Unbounded => t.push_unbounded(),
            SolveResult::Infeasible => t.push_infeasible(),
        }
    }
    Ok(t)
}

/// Fraction of `costs` whose optimal face lies in the slice.
pub fn exact_rate(inst: &Instance, model: &CompressionModel, costs: &[Vec<f64>]) -> Result<f64> {
    if costs.is_empty() {
        return Ok(f64::NAN);
    }
    let mut hits = 0usize;
    for c in costs {
        if model.check_exact(&inst.polytope, c)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / costs.len() as f64)
}

/// Baseline ratios; a value within [`VALUE_MATCH_TOL`] of the full optimum
/// counts as exact.
pub fn eval_projection(inst: &Instance, pm: &ProjectionModel, ts: &TestSet) -> Result<Tally> {
    let mut t = Tally::default();
    for (c, &full) in ts.costs.iter().zip(&ts.full) {
        match baselines::solve_projected(&inst.polytope, c, pm)? {
            SolveResult::Optimal(o) => {
                let exact = (o.value - full).abs() <= VALUE_MATCH_TOL * (1.0 + full.abs());
                t.push_optimal(o.value, full, exact);
            }
            SolveResult::Infeasible => t.push_infeasible(),
            SolveResult::Unbounded => t.push_unbounded(),
        }
    }
    Ok(t)
}

/// Builds a baseline with budget `k` from the first `n` training costs.
pub fn build_projection(
    inst: &Instance,
    prep: &Prepared,
    kind: ProjectionKind,
    k: usize,
    n: usize,
    centered: bool,
) -> Result<ProjectionModel> {
    match kind {
        ProjectionKind::Random => baselines::random_projection(inst.dim(), k, prep.seed),
        ProjectionKind::Pca => {
            let sols = prep.training_solutions(inst, n)?;
            baselines::pca_projection_with(&sols, k, centered)
        }
    }
}

pub fn method_name(kind: ProjectionKind) -> &'static str {
    match kind {
        ProjectionKind::Random => "random",
        ProjectionKind::Pca => "pca",
    }
}
