use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use super::metrics::{mean_stderr, MetricsRow, Tally};
use super::pipeline::{self, Prepared, TestSet};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::lp::Tolerances;

/// Slack when comparing our ratio against a baseline's.
pub const DOMINANCE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub seed: u64,
    /// Rank after each processed cost.
    pub rank: Vec<usize>,
    /// Hard-set size after each processed cost.
    pub hard: Vec<usize>,
}

/// Learner-side facts for one (experiment, setting, seed) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub label: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub rho: f64,
    pub n: usize,
    pub rank: usize,
    pub hard: usize,
    pub skipped: usize,
    pub cert_lb: f64,
    pub train_exact: f64,
    pub test_costs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub label: String,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub label: String,
    pub method: String,
    pub k_mean: f64,
    pub obj_ratio_mean: f64,
    pub obj_ratio_stderr: f64,
    pub exact_mean: f64,
    pub cert_lb_mean: f64,
    pub seeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    /// Every rank-growth series is nondecreasing and at most `d`.
    pub rank_monotone: bool,
    /// On cells where our model was exact on every test cost, no baseline
    /// beat our ratio.
    pub ours_dominates: bool,
    pub dominance_cells: usize,
    pub violations: Vec<String>,
    /// Minimum training exactness over all learned cells.
    pub train_exact_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub instance: String,
    pub d: usize,
    pub rows: Vec<MetricsRow>,
    pub growth: Vec<GrowthSeries>,
    pub cells: Vec<CellRecord>,
    pub errors: Vec<CellError>,
    pub aggregates: Vec<Aggregate>,
    pub checks: Checks,
}

#[derive(Clone, Copy, Debug)]
enum Job {
    Growth { seed: u64 },
    Rho { rho: f64, seed: u64 },
    Samples { seed: u64 },
}

#[derive(Default)]
struct JobOutput {
    rows: Vec<MetricsRow>,
    growth: Option<GrowthSeries>,
    cells: Vec<CellRecord>,
    errors: Vec<CellError>,
}

fn fmt_setting(v: f64) -> String {
    format!("{v}")
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for e in &cfg.experiments {
        match e {
            Experiment::RankGrowth => out.extend(cfg.seeds.iter().map(|&seed| Job::Growth { seed })),
            Experiment::RhoSweep => {
                for &rho in &cfg.rho_grid {
                    out.extend(cfg.seeds.iter().map(|&seed| Job::Rho { rho, seed }));
                }
            }
            Experiment::SampleSweep => out.extend(cfg.seeds.iter().map(|&seed| Job::Samples { seed })),
        }
    }
    out
}

struct Ctx<'a> {
    inst: &'a Instance,
    cfg: &'a ExperimentConfig,
    tol: Tolerances,
}

impl Ctx<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(&self, label: &str, method: &str, k: usize, seed: u64, t: &Tally, cert_lb: f64, hard: usize, skipped: usize, ms: f64) -> MetricsRow {
        MetricsRow {
            instance: label.to_string(),
            method: method.to_string(),
            k,
            seed,
            obj_ratio: t.mean_ratio(),
            exact: t.exact_rate(),
            cert_lb,
            hard,
            skipped,
            wall_ms: ms,
            flag: t.flag(),
        }
    }

    fn error_row(&self, label: &str, method: &str, k: usize, seed: u64, e: &Error) -> MetricsRow {
        MetricsRow {
            instance: label.to_string(),
            method: method.to_string(),
            k,
            seed,
            obj_ratio: f64::NAN,
            exact: f64::NAN,
            cert_lb: f64::NAN,
            hard: 0,
            skipped: 0,
            wall_ms: 0.0,
            flag: format!("error: {e}"),
        }
    }

    /// Our model plus every baseline at each budget in `ks`.
    fn evaluate(&self, label: &str, prep: &Prepared, n: usize, ks: &[usize], ts: &TestSet, out: &mut JobOutput) -> Result<usize> {
        let seed = prep.seed;
        let start = Instant::now();
        let learned = prep.learn(self.inst, n, &self.tol)?;
        let tally = pipeline::eval_model(self.inst, &learned.model, ts)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let rank = learned.model.rank();
        let hard = learned.trace.hard_set.len();
        out.rows.push(self.row(label, "ours", rank, seed, &tally, learned.cert_lb, hard, learned.skipped, ms));
        let train_exact = if self.cfg.check_train {
            pipeline::exact_rate(self.inst, &learned.model, &prep.training[..n])?
        } else {
            f64::NAN
        };
        out.cells.push(CellRecord {
            label: label.to_string(),
            experiment: Experiment::RhoSweep,
            seed,
            rho: prep.rho,
            n,
            rank,
            hard,
            skipped: learned.skipped,
            cert_lb: learned.cert_lb,
            train_exact,
            test_costs: ts.len(),
        });
        let budgets: Vec<usize> = if ks.is_empty() { vec![rank.max(1)] } else { ks.to_vec() };
        for &k in &budgets {
            for &kind in &self.cfg.baselines {
                let name = pipeline::method_name(kind);
                let start = Instant::now();
                let res = pipeline::build_projection(self.inst, prep, kind, k, n, self.cfg.pca_centered)
                    .and_then(|pm| pipeline::eval_projection(self.inst, &pm, ts));
                let ms = start.elapsed().as_secs_f64() * 1e3;
                match res {
                    Ok(t) => out.rows.push(self.row(label, name, k, seed, &t, f64::NAN, 0, learned.skipped, ms)),
                    Err(e) => {
                        out.errors.push(CellError {
                            label: label.to_string(),
                            seed,
                            message: format!("{name} k={k}: {e}"),
                        });
                        out.rows.push(self.error_row(label, name, k, seed, &e));
                    }
                }
            }
        }
        Ok(rank)
    }

    fn run(&self, job: Job) -> JobOutput {
        let mut out = JobOutput::default();
        let name = &self.inst.name;
        let (label, seed) = match job {
            Job::Growth { seed } => (format!("{name}:growth"), seed),
            Job::Rho { rho, seed } => (format!("{name}:rho={}", fmt_setting(rho)), seed),
            Job::Samples { seed } => (format!("{name}:samples"), seed),
        };
        if let Err(e) = self.run_inner(job, &mut out) {
            out.errors.push(CellError {
                label: label.clone(),
                seed,
                message: e.to_string(),
            });
            if !matches!(job, Job::Growth { .. }) {
                out.rows.push(self.error_row(&label, "ours", 0, seed, &e));
            }
        }
        out
    }

    fn sample_max(&self) -> usize {
        self.cfg.sample_grid.iter().copied().max().unwrap_or(0).max(self.cfg.n1)
    }

    fn run_inner(&self, job: Job, out: &mut JobOutput) -> Result<()> {
        let cfg = self.cfg;
        let name = &self.inst.name;
        match job {
            Job::Growth { seed } => {
                let n = self.sample_max();
                let prep = Prepared::new(self.inst, cfg, cfg.rho, n, seed)?;
                let learned = prep.learn(self.inst, n, &self.tol)?;
                let mut hard = Vec::with_capacity(n);
                let mut acc = 0;
                for &c in &learned.trace.append_counts {
                    acc += usize::from(c > 0);
                    hard.push(acc);
                }
                out.growth = Some(GrowthSeries {
                    seed,
                    rank: learned.trace.rank_curve.clone(),
                    hard,
                });
            }
            Job::Rho { rho, seed } => {
                let label = format!("{name}:rho={}", fmt_setting(rho));
                let prep = Prepared::new(self.inst, cfg, rho, cfg.n1, seed)?;
                let ts = TestSet::draw(self.inst, cfg.n_test, seed)?;
                self.evaluate(&label, &prep, cfg.n1, &[], &ts, out)?;
            }
            Job::Samples { seed } => {
                let n_max = self.sample_max();
                let prep = Prepared::new(self.inst, cfg, cfg.rho, n_max, seed)?;
                let ts = TestSet::draw(self.inst, cfg.n_test, seed)?;
                let ks = if cfg.k_grid.is_empty() {
                    vec![prep.learn(self.inst, n_max, &self.tol)?.model.rank().max(1)]
                } else {
                    cfg.k_grid.clone()
                };
                let mut grid = cfg.sample_grid.clone();
                grid.sort_unstable();
                grid.dedup();
                for n in grid {
                    let label = format!("{name}:n={n}");
                    let before = out.cells.len();
                    if let Err(e) = self.evaluate(&label, &prep, n, &ks, &ts, out) {
                        out.errors.push(CellError {
                            label: label.clone(),
                            seed,
                            message: e.to_string(),
                        });
                        out.rows.push(self.error_row(&label, "ours", 0, seed, &e));
                    }
                    for c in &mut out.cells[before..] {
                        c.experiment = Experiment::SampleSweep;
                    }
                }
            }
        }
        Ok(())
    }
}

fn aggregate(rows: &[MetricsRow]) -> Vec<Aggregate> {
    let mut keys: Vec<(String, String, usize)> = Vec::new();
    for r in rows {
        let key_k = if r.method == "ours" { usize::MAX } else { r.k };
        let key = (r.instance.clone(), r.method.clone(), key_k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(label, method, key_k)| {
            let sel: Vec<&MetricsRow> = rows
                .iter()
                .filter(|r| r.instance == label && r.method == method && (key_k == usize::MAX || r.k == key_k))
                .collect();
            let col = |f: fn(&MetricsRow) -> f64| sel.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (obj_ratio_mean, obj_ratio_stderr) = mean_stderr(&col(|r| r.obj_ratio));
            Aggregate {
                label,
                method,
                k_mean: mean_stderr(&col(|r| r.k as f64)).0,
                obj_ratio_mean,
                obj_ratio_stderr,
                exact_mean: mean_stderr(&col(|r| r.exact)).0,
                cert_lb_mean: mean_stderr(&col(|r| r.cert_lb)).0,
                seeds: sel.len(),
            }
        })
        .collect()
}

fn checks(d: usize, rows: &[MetricsRow], growth: &[GrowthSeries], cells: &[CellRecord]) -> Checks {
    let rank_monotone = growth
        .iter()
        .all(|g| g.rank.windows(2).all(|w| w[0] <= w[1]) && g.rank.iter().all(|&r| r <= d));
    let mut violations = Vec::new();
    let mut dominance_cells = 0;
    for ours in rows.iter().filter(|r| r.method == "ours" && r.exact == 1.0) {
        dominance_cells += 1;
        for b in rows
            .iter()
            .filter(|r| r.method != "ours" && r.instance == ours.instance && r.seed == ours.seed)
        {
            if b.obj_ratio > ours.obj_ratio + DOMINANCE_SLACK {
                violations.push(format!(
                    "{} seed {}: {} k={} ratio {} > ours {}",
                    ours.instance, ours.seed, b.method, b.k, b.obj_ratio, ours.obj_ratio
                ));
            }
        }
    }
    let train_exact_min = cells
        .iter()
        .map(|c| c.train_exact)
        .filter(|x| x.is_finite())
        .fold(f64::NAN, f64::min);
    Checks {
        rank_monotone,
        ours_dominates: violations.is_empty(),
        dominance_cells,
        violations,
        train_exact_min,
    }
}

/// Runs the configured experiments. Cell failures are recorded, not raised.
pub fn run_bench(inst: &Instance, cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate(inst.dim())?;
    let ctx = Ctx {
        inst,
        cfg,
        tol: Tolerances::default(),
    };
    let list = jobs(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let outputs: Vec<JobOutput> = pool.install(|| list.par_iter().map(|&j| ctx.run(j)).collect());
    let mut report = BenchReport {
        instance: inst.name.clone(),
        d: inst.dim(),
        rows: Vec::new(),
        growth: Vec::new(),
        cells: Vec::new(),
        errors: Vec::new(),
        aggregates: Vec::new(),
        checks: checks(0, &[], &[], &[]),
    };
    for o in outputs {
        report.rows.extend(o.rows);
        report.growth.extend(o.growth);
        report.cells.extend(o.cells);
        report.errors.extend(o.errors);
    }
    report.aggregates = aggregate(&report.rows);
    report.checks = checks(inst.dim(), &report.rows, &report.growth, &report.cells);
    Ok(report)
}

pub fn render_growth_csv(growth: &[GrowthSeries]) -> String {
    let mut s = String::from("seed,samples,rank,hard\n");
    for g in growth {
        for (i, (r, h)) in g.rank.iter().zip(&g.hard).enumerate() {
            s.push_str(&format!("{},{},{},{}\n", g.seed, i + 1, r, h));
        }
    }
    s
}
