//! The cumulative exact-compression learner, its stability replay, and the
//! out-of-sample exactness certificate.

use serde::{Deserialize, Serialize};

use crate::compression::CompressionModel;
use crate::error::{ensure_len, Error, Result};
use crate::lp::{self, Polytope, Tolerances};

/// How the anchor was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "cost", rename_all = "snake_case")]
pub enum AnchorSource {
    #[default]
    Explicit,
    SuppliedCost(Vec<f64>),
    PriorCenter(Vec<f64>),
}

/// Record of a learner run. Sample ids are 0-based positions in the input
/// stream unless the caller supplied its own ids.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnTrace {
    pub anchor: AnchorSource,
    /// Ids of the processed costs, in order.
    pub processed: Vec<usize>,
    /// Hard-sample ids: costs that triggered at least one append.
    pub hard_set: Vec<usize>,
    /// `(sample id, appended direction)` in append order.
    pub appended: Vec<(usize, Vec<f64>)>,
    /// Number of appends made while processing each cost.
    pub append_counts: Vec<usize>,
    /// Rank after each processed cost.
    pub rank_curve: Vec<usize>,
    pub final_rank: usize,
}

/// Learns from `costs` with ids `0, 1, 2, ...`.
pub fn learn<I, C>(p: &Polytope, x0: &[f64], costs: I, tol: &Tolerances) -> Result<(CompressionModel, LearnTrace)>
where
    I: IntoIterator<Item = C>,
    C: AsRef<[f64]>,
{
    learn_with_ids(p, x0, costs.into_iter().enumerate(), tol)
}

/// Learns from `(id, cost)` pairs, processed lazily in stream order.
pub fn learn_with_ids<I, C>(
    p: &Polytope,
    x0: &[f64],
    costs: I,
    tol: &Tolerances,
) -> Result<(CompressionModel, LearnTrace)>
where
    I: IntoIterator<Item = (usize, C)>,
    C: AsRef<[f64]>,
{
    let d = p.dim();
    ensure_len("anchor", x0.len(), d)?;
    if !p.is_feasible_point(x0, tol.eps_feas) {
        return Err(Error::Domain("anchor is not feasible".into()));
    }
    let mut model = CompressionModel::new(x0.to_vec(), *tol);
    let mut trace = LearnTrace::default();
    for (id, c) in costs {
        let c = c.as_ref();
        ensure_len("cost", c.len(), d)?;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("cost {id} is not finite")));
        }
        let mut count = 0;
        loop {
            let res = model.contains_optimal_face(p, c)?;
            if res.contained {
                break;
            }
            if trace.appended.len() >= d {
                return Err(Error::Internal(format!(
                    "learner exceeded {d} appends at sample {id}"
                )));
            }
            let w = res.witness.expect("a witness accompanies every violation");
            model = model.append_direction(&w)?;
            trace.appended.push((id, model.columns()[model.rank() - 1].clone()));
            count += 1;
        }
        if count > 0 {
            trace.hard_set.push(id);
        }
        trace.processed.push(id);
        trace.append_counts.push(count);
        trace.rank_curve.push(model.rank());
    }
    trace.final_rank = model.rank();
    model.provenance.hard_indices = trace.hard_set.clone();
    Ok((model, trace))
}

/// Reruns the learner on the hard subsequence of `trace`; `costs` is the
/// original stream indexed by sample id.
pub fn replay_on_hard_subsequence<C: AsRef<[f64]>>(
    p: &Polytope,
    x0: &[f64],
    trace: &LearnTrace,
    costs: &[C],
    tol: &Tolerances,
) -> Result<CompressionModel> {
    let mut sub = Vec::with_capacity(trace.hard_set.len());
    for &i in &trace.hard_set {
        let c = costs
            .get(i)
            .ok_or_else(|| Error::Domain(format!("hard index {i} outside the cost list")))?;
        sub.push((i, c.as_ref()));
    }
    Ok(learn_with_ids(p, x0, sub, tol)?.0)
}

/// Lower confidence bound on the out-of-sample exactness probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub t: usize,
    pub delta: f64,
    pub lower_bound: f64,
}

pub(crate) fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("{name} must lie in (0,1), got {v}")));
    }
    Ok(())
}

/// `(4/n) (6 t + ln(e/delta))`.
pub(crate) fn fast_rate_penalty(n: usize, t: usize, delta: f64) -> f64 {
    4.0 / n as f64 * (6.0 * t as f64 + 1.0 - delta.ln())
}

pub fn certificate_bound(n: usize, t: usize, delta: f64) -> Result<Certificate> {
    if n == 0 {
        return Err(Error::Domain("certificate needs n >= 1".into()));
    }
    if t > n {
        return Err(Error::Domain(format!("hard-set size {t} exceeds n = {n}")));
    }
    check_probability("delta", delta)?;
    let lower_bound = (1.0 - fast_rate_penalty(n, t, delta)).clamp(0.0, 1.0);
    Ok(Certificate {
        n,
        t,
        delta,
        lower_bound,
    })
}

/// A vertex optimizer of the anchor cost.
pub fn make_anchor(p: &Polytope, c0: &[f64]) -> Result<Vec<f64>> {
    Ok(lp::solve_lp(p, c0)?.expect_optimal("anchor solve")?.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        Polytope::cube(2, -1.0, 1.0)
    }

    #[test]
    fn two_cost_example() {
        let tol = Tolerances::default();
        let costs = vec![vec![-1.1, 0.3], vec![-1.05, -0.7]];
        let (m, t) = learn(&square(), &[1.0, 0.0], &costs, &tol).unwrap();
        assert_eq!(m.rank(), 1);
        assert_eq!(t.hard_set, vec![0]);
        assert_eq!(t.rank_curve, vec![1, 1]);
        assert!(m.in_range(&[0.0, 1.0]));
        let replay = replay_on_hard_subsequence(&square(), &[1.0, 0.0], &t, &costs, &tol).unwrap();
        assert_eq!(replay.columns(), m.columns());
    }

    #[test]
    fn anchor_cost_stream_stays_rank_zero() {
        let tol = Tolerances::default();
        let c0 = vec![-1.0, -0.1];
        let x0 = make_anchor(&square(), &c0).unwrap();
        assert_eq!(x0, vec![1.0, 1.0]);
        let (m, t) = learn(&square(), &x0, vec![c0.clone(); 5], &tol).unwrap();
        assert_eq!(m.rank(), 0);
        assert!(t.hard_set.is_empty());
        let empty: Vec<Vec<f64>> = Vec::new();
        let (m, _) = learn(&square(), &x0, &empty, &tol).unwrap();
        assert_eq!(m.rank(), 0);
    }

    #[test]
    fn certificate_examples() {
        let c = certificate_bound(10_000, 5, 0.1).unwrap();
        assert!((c.lower_bound - 0.986_679).abs() < 1e-6);
        assert_eq!(certificate_bound(10, 5, 0.1).unwrap().lower_bound, 0.0);
        let near = certificate_bound(usize::MAX / 2, 0, 1.0 - 1e-12).unwrap();
        assert!(near.lower_bound > 1.0 - 1e-12);
        assert!(certificate_bound(0, 0, 0.1).is_err());
        assert!(certificate_bound(5, 6, 0.1).is_err());
        assert!(certificate_bound(5, 0, 1.0).is_err());
    }

    #[test]
    fn example_one_anchor() {
        let rho = 0.5;
        let x0 = make_anchor(&square(), &[-1.0 - rho / 2.0, 0.5]).unwrap();
        assert_eq!(x0, vec![1.0, -1.0]);
    }
}
