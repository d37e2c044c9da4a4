use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CSV_HEADER: &str = "instance,method,k,seed,obj_ratio,exact,cert_lb,hard,skipped,wall_ms,flag";

/// Full-LP values at or below this magnitude switch to the absolute gap.
pub const ABS_GAP_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioKind {
    Relative,
    AbsGap,
}

/// `1 - (method - full)/|full|`, equal to `method/full` for negative `full`
/// and to `2 - method/full` for positive `full`, so 1 is always exact and
/// smaller is worse. Near-zero `full` uses `1 - (method - full)`.
pub fn objective_ratio(method: f64, full: f64) -> (f64, RatioKind) {
    if full.abs() <= ABS_GAP_THRESHOLD {
        (1.0 - (method - full), RatioKind::AbsGap)
    } else {
        (1.0 - (method - full) / full.abs(), RatioKind::Relative)
    }
}

/// Per-cost outcomes of one method on one test sample.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    ratios: Vec<f64>,
    exact: usize,
    total: usize,
    abs_gap: usize,
    infeasible: usize,
    unbounded: usize,
}

impl Tally {
    pub fn push_optimal(&mut self, method: f64, full: f64, exact: bool) {
        let (r, kind) = objective_ratio(method, full);
        self.ratios.push(r);
        self.total += 1;
        if exact {
            self.exact += 1;
        }
        if kind == RatioKind::AbsGap {
            self.abs_gap += 1;
        }
    }

    pub fn push_infeasible(&mut self) {
        self.total += 1;
        self.infeasible += 1;
    }

    pub fn push_unbounded(&mut self) {
        self.total += 1;
        self.unbounded += 1;
    }

    /// Mean over optimal solves, NaN if there were none.
    pub fn mean_ratio(&self) -> f64 {
        if self.ratios.is_empty() {
            f64::NAN
        } else {
            self.ratios.iter().sum::<f64>() / self.ratios.len() as f64
        }
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::NAN, f64::min)
    }

    pub fn exact_rate(&self) -> f64 {
        if self.total == 0 {
            f64::NAN
        } else {
            self.exact as f64 / self.total as f64
        }
    }

    pub fn flag(&self) -> String {
        let mut parts = Vec::new();
        if self.abs_gap > 0 {
            parts.push(format!("abs_gap={}", self.abs_gap));
        }
        if self.infeasible > 0 {
            parts.push(format!("infeasible={}", self.infeasible));
        }
        if self.unbounded > 0 {
            parts.push(format!("unbounded={}", self.unbounded));
        }
        parts.join(";")
    }
}

/// One CSV line: a method at one budget for one repetition seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub instance: String,
    pub method: String,
    pub k: usize,
    pub seed: u64,
    pub obj_ratio: f64,
    pub exact: f64,
    pub cert_lb: f64,
    pub hard: usize,
    pub skipped: usize,
    pub wall_ms: f64,
    pub flag: String,
}

fn real(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl MetricsRow {
    fn to_csv(&self, mask_time: bool) -> String {
        let wall = if mask_time { String::new() } else { format!("{:.3}", self.wall_ms) };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.instance),
            csv_field(&self.method),
            self.k,
            self.seed,
            real(self.obj_ratio),
            real(self.exact),
            real(self.cert_lb),
            self.hard,
            self.skipped,
            wall,
            csv_field(&self.flag)
        )
    }
}

pub fn render_csv(rows: &[MetricsRow]) -> String {
    render(rows, false)
}

fn render(rows: &[MetricsRow], mask_time: bool) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.to_csv(mask_time));
    }
    s
}

/// SHA-256 of the CSV with the `wall_ms` column blanked.
pub fn masked_hash(rows: &[MetricsRow]) -> String {
    hex::encode(Sha256::digest(render(rows, true).as_bytes()))
}

/// Mean and standard error of the finite entries.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
