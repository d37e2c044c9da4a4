//! Experiment orchestration behind the `lpcompress` binary: configuration,
//! the learn pipeline, benchmark sweeps and report files.

pub mod config;
pub mod metrics;
pub mod pipeline;
pub mod sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use config::{Experiment, ExperimentConfig, InstanceSpec, Overrides};
pub use metrics::{MetricsRow, CSV_HEADER};
pub use pipeline::{Learned, Prepared, TestSet};
pub use sweep::{run_bench, BenchReport};

use crate::compression::CompressionModel;
use crate::error::{Error, Result};
use crate::instances::{presets, Instance};
use crate::json::{self, SCHEMA_VERSION};
use crate::lp::{self, SolveResult, Tolerances};
use crate::oracle::{self, PriorSpec};
use crate::prior::EstimatedPrior;

/// Provenance written next to every set of outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub command: String,
    pub versions: BTreeMap<String, String>,
    pub config_hash: String,
    /// Output files and their SHA-256; the metrics CSV is hashed with its
    /// timing column blanked.
    pub outputs: BTreeMap<String, String>,
    pub errors: Vec<String>,
    /// Seconds since the Unix epoch; not part of any hash.
    pub timestamp: u64,
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("lpcompress".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("schema".to_string(), SCHEMA_VERSION.to_string()),
        ("target".to_string(), format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS)),
    ])
}

fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

impl Manifest {
    fn new(command: &str, cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            versions: versions(),
            config_hash: cfg.hash()?,
            outputs: BTreeMap::new(),
            errors: Vec::new(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        })
    }

    fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        self.outputs.insert(name.to_string(), sha256_file(&dir.join(name))?);
        Ok(())
    }

    fn write(&self, dir: &Path) -> Result<()> {
        json::write_file(&dir.join("manifest.json"), self)
    }
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out)?;
    Ok(cfg.out.clone())
}

/// Writes the instance JSON; returns its path.
pub fn cmd_gen(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let inst = pipeline::load_configured_instance(cfg)?;
    let dir = out_dir(cfg)?;
    let file = format!("{}.json", inst.name);
    let path = dir.join(&file);
    inst.save(&path)?;
    let mut m = Manifest::new("gen", cfg)?;
    m.record(&dir, &file)?;
    m.write(&dir)?;
    Ok(path)
}

/// File contents of `certificate.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema: u32,
    pub n: usize,
    pub hard: usize,
    pub rank: usize,
    pub delta1: f64,
    pub rho: Option<f64>,
    pub delta0: Option<f64>,
    /// Fast-rate bound; absent without samples.
    pub fast_rate: Option<f64>,
    /// Composite bound for an estimated prior.
    pub composite: Option<f64>,
    /// The bound in force: composite, else fast-rate, else 0.
    pub lower_bound: f64,
    pub skipped: usize,
    pub train_exact: f64,
}

#[derive(Clone, Debug)]
pub struct LearnOutput {
    pub learned: Learned,
    pub prior: Option<EstimatedPrior>,
    pub report: CertificateReport,
}

/// Runs pilot, calibration, anchoring, retention and learning with the
/// master seed and writes model, trace, certificate and manifest.
pub fn cmd_learn(cfg: &ExperimentConfig) -> Result<LearnOutput> {
    let inst = pipeline::load_configured_instance(cfg)?;
    cfg.validate(inst.dim())?;
    let dir = out_dir(cfg)?;
    let mut manifest = Manifest::new("learn", cfg)?;
    let result = learn_on(&inst, cfg);
    let out = match result {
        Ok(o) => o,
        Err(e) => {
            manifest.errors.push(e.to_string());
            manifest.write(&dir)?;
            return Err(e);
        }
    };
    json::write_file(&dir.join("model.json"), &out.learned.model)?;
    json::write_file(&dir.join("trace.json"), &out.learned.trace)?;
    json::write_file(&dir.join("certificate.json"), &out.report)?;
    for f in ["model.json", "trace.json", "certificate.json"] {
        manifest.record(&dir, f)?;
    }
    if let Some(p) = &out.prior {
        json::write_file(&dir.join("prior.json"), p)?;
        manifest.record(&dir, "prior.json")?;
    }
    manifest.write(&dir)?;
    Ok(out)
}

/// The learn pipeline without file output.
pub fn learn_on(inst: &Instance, cfg: &ExperimentConfig) -> Result<LearnOutput> {
    let tol = Tolerances::default();
    let prep = Prepared::new(inst, cfg, cfg.rho, cfg.n1, cfg.seed)?;
    let learned = prep.learn(inst, cfg.n1, &tol)?;
    let train_exact = pipeline::exact_rate(inst, &learned.model, &prep.training)?;
    let report = CertificateReport {
        schema: SCHEMA_VERSION,
        n: learned.n,
        hard: learned.trace.hard_set.len(),
        rank: learned.model.rank(),
        delta1: cfg.delta1,
        rho: (!cfg.known_prior).then_some(cfg.rho),
        delta0: (!cfg.known_prior).then_some(cfg.delta0),
        fast_rate: learned.certificate.map(|c| c.lower_bound),
        composite: learned.composite,
        lower_bound: learned.cert_lb,
        skipped: learned.skipped,
        train_exact,
    };
    Ok(LearnOutput {
        learned,
        prior: prep.prior,
        report,
    })
}

/// Fits and calibrates the estimated prior; writes `prior.json`.
pub fn cmd_calibrate(cfg: &ExperimentConfig) -> Result<EstimatedPrior> {
    let inst = pipeline::load_configured_instance(cfg)?;
    cfg.validate(inst.dim())?;
    let est = pipeline::calibrate_prior(&inst, cfg, cfg.rho, cfg.seed)?;
    let dir = out_dir(cfg)?;
    json::write_file(&dir.join("prior.json"), &est)?;
    let mut m = Manifest::new("calibrate", cfg)?;
    m.record(&dir, "prior.json")?;
    m.write(&dir)?;
    Ok(est)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: lp::SolveStatus,
    pub value: Option<f64>,
    pub x: Option<Vec<f64>>,
    /// Full-LP value when a model was used.
    pub full_value: Option<f64>,
    /// Containment verdict when a model was used.
    pub exact: Option<bool>,
}

/// Solves one cost, through `model` when given.
pub fn cmd_solve(inst: &Instance, cost: &[f64], model: Option<&CompressionModel>) -> Result<SolveReport> {
    let full = lp::solve_lp(&inst.polytope, cost)?;
    let Some(model) = model else {
        return Ok(SolveReport {
            status: full.status(),
            value: full.optimum().map(|o| o.value),
            x: full.optimum().map(|o| o.x.clone()),
            full_value: None,
            exact: None,
        });
    };
    let red = model.solve_via_compression(&inst.polytope, cost)?;
    let exact = match &full {
        SolveResult::Optimal(_) => Some(model.check_exact(&inst.polytope, cost)?),
        _ => None,
    };
    Ok(SolveReport {
        status: red.status(),
        value: red.optimum().map(|o| o.value),
        x: red.optimum().map(|o| o.x.clone()),
        full_value: full.optimum().map(|o| o.value),
        exact,
    })
}

/// Runs the sweep and writes `metrics.csv`, `rank_growth.csv`,
/// `summary.json` and the manifest.
pub fn cmd_bench(cfg: &ExperimentConfig) -> Result<BenchReport> {
    let inst = pipeline::load_configured_instance(cfg)?;
    let report = run_bench(&inst, cfg)?;
    let dir = out_dir(cfg)?;
    std::fs::write(dir.join("metrics.csv"), metrics::render_csv(&report.rows))?;
    std::fs::write(dir.join("rank_growth.csv"), sweep::render_growth_csv(&report.growth))?;
    json::write_file(&dir.join("summary.json"), &Summary::from_report(&report, cfg)?)?;
    let mut m = Manifest::new("bench", cfg)?;
    m.outputs.insert("metrics.csv".into(), metrics::masked_hash(&report.rows));
    m.record(&dir, "rank_growth.csv")?;
    m.record(&dir, "summary.json")?;
    m.errors = report.errors.iter().map(|e| format!("{} seed {}: {}", e.label, e.seed, e.message)).collect();
    m.write(&dir)?;
    Ok(report)
}

/// `summary.json`: everything but the per-seed rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub instance: String,
    pub d: usize,
    pub config_hash: String,
    pub aggregates: Vec<sweep::Aggregate>,
    pub cells: Vec<sweep::CellRecord>,
    pub growth: Vec<sweep::GrowthSeries>,
    pub checks: sweep::Checks,
    pub errors: Vec<sweep::CellError>,
}

impl Summary {
    pub fn from_report(r: &BenchReport, cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            schema: SCHEMA_VERSION,
            instance: r.instance.clone(),
            d: r.d,
            config_hash: cfg.hash()?,
            aggregates: r.aggregates.clone(),
            cells: r.cells.clone(),
            growth: r.growth.clone(),
            checks: r.checks.clone(),
            errors: r.errors.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub prior: PriorSpec,
    pub vertices: Vec<Vec<f64>>,
    pub reachable: Vec<usize>,
    pub basis: Vec<Vec<f64>>,
    pub d_star: usize,
}

/// Enumerates vertices, reachable optimizers and the direction space under
/// `prior`, or the instance's own prior.
pub fn cmd_oracle(inst: &Instance, prior: Option<PriorSpec>) -> Result<OracleReport> {
    let prior = match prior.or_else(|| inst.prior_spec()) {
        Some(p) => p,
        None => return Err(Error::Domain("instance has no closed-form prior; pass one".into())),
    };
    let vs = oracle::enumerate_vertices(&inst.polytope)?;
    let reachable = oracle::reachable_in(&vs, &inst.polytope, &prior)?;
    let pts: Vec<Vec<f64>> = reachable.iter().map(|&i| vs.vertices[i].clone()).collect();
    let basis = oracle::difference_span(&pts);
    Ok(OracleReport {
        prior,
        d_star: basis.len(),
        vertices: vs.vertices,
        reachable,
        basis,
    })
}

/// Names accepted by `--preset`.
pub fn preset_names() -> Vec<&'static str> {
    presets::all().iter().map(|p| p.name).collect()
}
