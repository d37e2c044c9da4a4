//! Data-calibrated convex priors: a ridge Mahalanobis score fitted on one
//! part of a pilot sample and thresholded at a binomial order statistic of
//! the other part.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::json::extended_f64;
use crate::learner::{check_probability, fast_rate_penalty};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub mu: Vec<f64>,
    /// `(Sigma + lambda I)^{-1}`.
    #[serde(rename = "M")]
    pub m: Matrix,
    pub lambda: f64,
}

/// Scale-aware ridge `1e-3 * trace(Sigma) / d`, floored for degenerate samples.
pub fn default_lambda(fit_sample: &[Vec<f64>]) -> Result<f64> {
    let (_, sigma) = mean_cov(fit_sample)?;
    let d = sigma.nrows();
    let tr = sigma.trace() / d as f64;
    Ok(if tr > 0.0 { 1e-3 * tr } else { 1e-12 })
}

fn mean_cov(sample: &[Vec<f64>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let first = sample
        .first()
        .ok_or_else(|| Error::Domain("score fit needs at least one sample".into()))?;
    let d = first.len();
    if d == 0 {
        return Err(Error::Dimension("cost vectors must be nonempty".into()));
    }
    let n = sample.len();
    let mut mu = DVector::zeros(d);
    for c in sample {
        ensure_len("fit sample", c.len(), d)?;
        mu += DVector::from_column_slice(c);
    }
    mu /= n as f64;
    let mut sigma = DMatrix::zeros(d, d);
    for c in sample {
        let r = DVector::from_column_slice(c) - &mu;
        sigma.ger(1.0, &r, &r, 1.0);
    }
    sigma /= (n.max(2) - 1) as f64;
    Ok((mu, sigma))
}

pub fn fit_score(fit_sample: &[Vec<f64>], lambda: f64) -> Result<ScoreParams> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("ridge must be positive, got {lambda}")));
    }
    let (mu, mut sigma) = mean_cov(fit_sample)?;
    let d = mu.len();
    for i in 0..d {
        sigma[(i, i)] += lambda;
    }
    let chol = sigma
        .cholesky()
        .ok_or_else(|| Error::Internal("ridge covariance is not positive definite".into()))?;
    let inv = chol.inverse();
    let sym = (&inv + inv.transpose()) * 0.5;
    Ok(ScoreParams {
        mu: mu.iter().copied().collect(),
        m: Matrix::from_nalgebra(&sym),
        lambda,
    })
}

pub fn score(params: &ScoreParams, c: &[f64]) -> Result<f64> {
    ensure_len("cost", c.len(), params.mu.len())?;
    let r: Vec<f64> = c.iter().zip(&params.mu).map(|(a, b)| a - b).collect();
    let mr = params.m.mul_vec(&r);
    Ok(r.iter().zip(&mr).map(|(a, b)| a * b).sum::<f64>().max(0.0))
}

/// Natural-log pmf of `Bin(m, p)` at every `j = 0..=m`.
fn binomial_log_pmf(m: usize, p: f64) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut lc = 0.0f64;
    (0..=m)
        .map(|j| {
            if j > 0 {
                lc += ((m - j + 1) as f64).ln() - (j as f64).ln();
            }
            lc + times(j, lp) + times(m - j, lq)
        })
        .collect()
}

/// `n * l` with `0 * -inf = 0`.
fn times(n: usize, l: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * l
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `ln P[Bin(m, p) >= k]` for every `k = 0..=m+1` (the last is `-inf`).
pub fn binomial_log_upper_tails(m: usize, p: f64) -> Vec<f64> {
    let lp = binomial_log_pmf(m, p);
    let mut out = vec![f64::NEG_INFINITY; m + 2];
    for k in (0..=m).rev() {
        out[k] = log_add_exp(out[k + 1], lp[k]);
    }
    out
}

/// Smallest `k in 1..=m+1` with `P[Bin(m, 1 - rho) >= k] <= delta0`.
pub fn binomial_cutoff(m: usize, rho: f64, delta0: f64) -> Result<usize> {
    check_probability("rho", rho)?;
    check_probability("delta0", delta0)?;
    let tails = binomial_log_upper_tails(m, 1.0 - rho);
    let ld = delta0.ln();
    let mut k = m + 1;
    while k > 1 && tails[k - 1] <= ld {
        k -= 1;
    }
    Ok(k)
}

/// Closed-form upper bound on [`binomial_cutoff`] from a Bernstein tail bound.
pub fn cutoff_upper_bound(m: usize, rho: f64, delta0: f64) -> usize {
    let l = (1.0 / delta0).ln();
    let mf = m as f64;
    let t = mf * (1.0 - rho) + (2.0 * mf * rho * (1.0 - rho) * l).sqrt() + 2.0 * l / 3.0;
    (t.floor() as usize + 1).min(m + 1)
}

/// The sublevel set `{c : score(c) <= threshold}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedPrior {
    #[serde(flatten)]
    pub params: ScoreParams,
    #[serde(with = "extended_f64")]
    pub threshold: f64,
    pub k: usize,
    pub m: usize,
    pub rho: f64,
    pub delta0: f64,
}

pub fn calibrate(params: ScoreParams, cal_sample: &[Vec<f64>], rho: f64, delta0: f64) -> Result<EstimatedPrior> {
    let m = cal_sample.len();
    let k = binomial_cutoff(m, rho, delta0)?;
    let mut scores = cal_sample
        .iter()
        .map(|c| score(&params, c))
        .collect::<Result<Vec<f64>>>()?;
    scores.sort_by(f64::total_cmp);
    let threshold = if k == m + 1 { f64::INFINITY } else { scores[k - 1] };
    Ok(EstimatedPrior {
        params,
        threshold,
        k,
        m,
        rho,
        delta0,
    })
}

/// Splits `pilot` into a fitting prefix of `round(fit_fraction * N)` costs
/// and a calibration suffix, fits the score and calibrates it.
pub fn estimate_prior(
    pilot: &[Vec<f64>],
    fit_fraction: f64,
    lambda: Option<f64>,
    rho: f64,
    delta0: f64,
) -> Result<EstimatedPrior> {
    if !(0.0..=1.0).contains(&fit_fraction) {
        return Err(Error::Domain(format!("fit fraction {fit_fraction} outside [0,1]")));
    }
    let n_fit = ((pilot.len() as f64 * fit_fraction).round() as usize).clamp(1, pilot.len().max(1));
    let (fit, cal) = pilot.split_at(n_fit.min(pilot.len()));
    let lambda = match lambda {
        Some(l) => l,
        None => default_lambda(fit)?,
    };
    calibrate(fit_score(fit, lambda)?, cal, rho, delta0)
}

impl EstimatedPrior {
    pub fn member(&self, c: &[f64]) -> Result<bool> {
        if self.threshold == f64::INFINITY {
            ensure_len("cost", c.len(), self.params.mu.len())?;
            return Ok(true);
        }
        Ok(score(&self.params, c)? <= self.threshold)
    }

    /// The prior center, a member of every calibrated set.
    pub fn anchor_cost(&self) -> Vec<f64> {
        self.params.mu.clone()
    }
}

/// Members retained from a filtered stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Retained {
    pub costs: Vec<Vec<f64>>,
    /// Stream positions of the retained costs.
    pub positions: Vec<usize>,
    pub skipped: usize,
}

/// The first `n1` members of `stream`, in order.
pub fn retain_stream<I>(prior: &EstimatedPrior, stream: I, n1: usize) -> Result<Retained>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = Retained {
        costs: Vec::with_capacity(n1),
        positions: Vec::with_capacity(n1),
        skipped: 0,
    };
    if n1 == 0 {
        return Ok(out);
    }
    for (i, c) in stream.into_iter().enumerate() {
        if prior.member(&c)? {
            out.costs.push(c);
            out.positions.push(i);
            if out.costs.len() == n1 {
                return Ok(out);
            }
        } else {
            out.skipped += 1;
        }
    }
    Err(Error::Exhausted {
        needed: n1,
        found: out.costs.len(),
        skipped: out.skipped,
    })
}

/// `max(0, 1 - rho - (4/n1)(6 t + ln(e/delta1)))`.
pub fn composite_certificate(rho: f64, n1: usize, t: usize, delta1: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0,1), got {rho}")));
    }
    check_probability("delta1", delta1)?;
    if n1 == 0 {
        return Err(Error::Domain("composite certificate needs n1 >= 1".into()));
    }
    if t > n1 {
        return Err(Error::Domain(format!("hard-set size {t} exceeds n1 = {n1}")));
    }
    Ok((1.0 - rho - fast_rate_penalty(n1, t, delta1)).clamp(0.0, 1.0))
}
