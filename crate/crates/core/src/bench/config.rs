use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::ProjectionKind;
use crate::error::{Error, Result};
use crate::instances::CostParams;

/// Where the instance comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSpec {
    /// Preset name; also selects stored cost parameters for MPS cases.
    pub preset: Option<String>,
    /// Instance JSON or MPS file.
    pub path: Option<PathBuf>,
    /// Overrides the preset's cost parameters.
    pub cost: Option<CostParams>,
    /// Width of the `example1` cost box.
    pub box_rho: f64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            preset: Some("example1".into()),
            path: None,
            cost: None,
            box_rho: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    RankGrowth,
    RhoSweep,
    SampleSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Use the instance's own `c0` and unfiltered training draws.
    pub known_prior: bool,
    /// Pilot costs used to fit the score.
    pub m_fit: usize,
    /// Pilot costs used to calibrate the threshold.
    pub m_cal: usize,
    /// Retained representation-learning costs.
    pub n1: usize,
    pub n_test: usize,
    pub rho: f64,
    pub delta0: f64,
    pub delta1: f64,
    /// Ridge parameter; `None` uses the trace-scaled default.
    pub lambda: Option<f64>,
    pub baselines: Vec<ProjectionKind>,
    pub pca_centered: bool,
    /// Fixed baseline budgets for the sample sweep; empty means the learned
    /// rank at the largest sample size.
    pub k_grid: Vec<usize>,
    pub rho_grid: Vec<f64>,
    pub sample_grid: Vec<usize>,
    pub experiments: Vec<Experiment>,
    /// Also verify exactness on the training costs.
    pub check_train: bool,
    pub seed: u64,
    /// Repetition seeds; each one reruns sampling, learning and testing.
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceSpec::default(),
            known_prior: false,
            m_fit: 100,
            m_cal: 200,
            n1: 50,
            n_test: 100,
            rho: 0.1,
            delta0: 0.05,
            delta1: 0.05,
            lambda: None,
            baselines: vec![ProjectionKind::Random, ProjectionKind::Pca],
            pca_centered: false,
            k_grid: Vec::new(),
            rho_grid: vec![0.05, 0.1, 0.3],
            sample_grid: vec![5, 10, 25, 50],
            experiments: vec![Experiment::RankGrowth, Experiment::RhoSweep, Experiment::SampleSweep],
            check_train: true,
            seed: 0,
            seeds: (0..12).collect(),
            out: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub known_prior: bool,
    pub rho: Option<f64>,
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("{name} must lie in (0,1), got {v}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Domain(format!("config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.known_prior {
            self.known_prior = true;
        }
        if let Some(r) = o.rho {
            self.rho = r;
        }
        if let Some(v) = o.delta0 {
            self.delta0 = v;
        }
        if let Some(v) = o.delta1 {
            self.delta1 = v;
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
    }

    /// Checks ranges; `d` bounds the budget grid.
    pub fn validate(&self, d: usize) -> Result<()> {
        open_unit("rho", self.rho)?;
        open_unit("delta0", self.delta0)?;
        open_unit("delta1", self.delta1)?;
        for &r in &self.rho_grid {
            open_unit("rho grid value", r)?;
        }
        if let Some(&k) = self.k_grid.iter().find(|&&k| k == 0 || k > d) {
            return Err(Error::Domain(format!("budget {k} outside 1..={d}")));
        }
        if !self.known_prior && self.m_fit < 2 {
            return Err(Error::Domain("m_fit must be at least 2 to fit a covariance".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Domain("seed list is empty".into()));
        }
        if self.instance.preset.is_none() && self.instance.path.is_none() {
            return Err(Error::Domain("instance needs a preset or a path".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        use sha2::{Digest, Sha256};
        let s = crate::json::to_string(self)?;
        Ok(hex::encode(Sha256::digest(s.as_bytes())))
    }
}
