//! Brute-force ground truth for small polytopes: vertex enumeration, the
//! vertices reachable from a prior set of costs, and the span of their
//! differences.

use itertools::Itertools;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::compression::CompressionModel;
use crate::error::{ensure_len, Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::lp::{self, Polytope, SolveStatus};
use crate::rng;

pub const MAX_DIM: usize = 6;
pub const MAX_ROWS: usize = 24;
/// Relative interior shrink that stands in for openness of the prior.
pub const EPS_OPEN: f64 = 1e-6;
/// Number of boundary points in the inner polyhedral approximation of a ball.
pub const BALL_POINTS: usize = 64;

const FEAS_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    pub vertices: Vec<Vec<f64>>,
    /// Sorted active rows of each vertex.
    pub active_sets: Vec<Vec<usize>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PriorSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl PriorSpec {
    pub fn dim(&self) -> usize {
        match self {
            PriorSpec::Ball { center, .. } => center.len(),
            PriorSpec::Box { lo, .. } => lo.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PriorSpec::Ball { radius, .. } if !(*radius > 0.0) => {
                Err(Error::Domain(format!("ball radius must be positive, got {radius}")))
            }
            PriorSpec::Box { lo, hi } => {
                ensure_len("box upper corner", hi.len(), lo.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::Domain("box needs lo < hi componentwise".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether `c` lies in the closed prior.
    pub fn contains(&self, c: &[f64]) -> bool {
        match self {
            PriorSpec::Ball { center, radius } => linalg::norm(&linalg::sub(c, center)) <= *radius,
            PriorSpec::Box { lo, hi } => c.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| l <= x && x <= h),
        }
    }
}

fn guard(p: &Polytope) -> Result<()> {
    if p.dim() > MAX_DIM || p.rows() > MAX_ROWS {
        return Err(Error::Scale(format!(
            "d = {}, m = {} (limits d <= {MAX_DIM}, m <= {MAX_ROWS})",
            p.dim(),
            p.rows()
        )));
    }
    Ok(())
}

/// Every `d`-row subset with an invertible submatrix, solved and filtered
/// for feasibility, in lexicographic subset order.
pub fn enumerate_vertices(p: &Polytope) -> Result<VertexSet> {
    guard(p)?;
    let d = p.dim();
    let mut out = VertexSet::default();
    for rows in (0..p.rows()).combinations(d) {
        let mut sys = Vec::with_capacity(d * d);
        let mut rhs = Vec::with_capacity(d);
        for &i in &rows {
            sys.extend_from_slice(p.a().row(i));
            rhs.push(p.b()[i]);
        }
        let Some(x) = linalg::lu_solve(d, &sys, &rhs) else {
            continue;
        };
        if !p.is_feasible_point(&x, FEAS_TOL) {
            continue;
        }
        let dup = out
            .vertices
            .iter()
            .any(|v| linalg::norm_inf(&linalg::sub(v, &x)) <= DEDUP_TOL * (1.0 + linalg::norm_inf(v)));
        if !dup {
            out.active_sets.push(p.active_rows(&x, FEAS_TOL));
            out.vertices.push(x);
        }
    }
    Ok(out)
}

fn ball_points(center: &[f64], radius: f64) -> Vec<Vec<f64>> {
    let d = center.len();
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(BALL_POINTS.max(2 * d));
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            dirs.push(e);
        }
    }
    let mut g = rng::keyed(0x0BA1_1F00, d as u64, 0);
    while dirs.len() < BALL_POINTS {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut g)).collect();
        let n = linalg::norm(&v);
        if n > 1e-6 {
            dirs.push(linalg::scale(1.0 / n, &v));
        }
    }
    let r = radius * (1.0 - EPS_OPEN);
    dirs.iter()
        .map(|u| center.iter().zip(u).map(|(c, x)| c + r * x).collect())
        .collect()
}

/// Whether some cost in the (shrunk) prior has `-c` in the cone spanned by
/// the active rows at a vertex.
fn reachable_at(p: &Polytope, active: &[usize], prior: &PriorSpec) -> Result<bool> {
    let d = p.dim();
    let k = active.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    match prior {
        PriorSpec::Box { lo, hi } => {
            // Variables: lambda (k). c = -A_I^T lambda must lie in the box.
            for (i, (l, h)) in lo.iter().zip(hi).enumerate() {
                let w = h - l;
                let coef: Vec<f64> = active.iter().map(|&j| -p.a().get(j, i)).collect();
                rows.push(coef.clone());
                b.push(h - EPS_OPEN * w);
                rows.push(coef.iter().map(|v| -v).collect());
                b.push(-(l + EPS_OPEN * w));
            }
            for j in 0..k {
                let mut r = vec![0.0; k];
                r[j] = -1.0;
                rows.push(r);
                b.push(0.0);
            }
        }
        PriorSpec::Ball { center, radius } => {
            // Variables: (lambda (k), mu (q)); -A_I^T lambda = sum mu_l p_l, sum mu = 1.
            let pts = ball_points(center, *radius);
            let q = pts.len();
            for i in 0..d {
                let mut r: Vec<f64> = active.iter().map(|&j| -p.a().get(j, i)).collect();
                r.extend(pts.iter().map(|pt| -pt[i]));
                rows.push(r.clone());
                b.push(0.0);
                rows.push(r.iter().map(|v| -v).collect());
                b.push(0.0);
            }
            let mut s = vec![0.0; k];
            s.extend(std::iter::repeat_n(1.0, q));
            rows.push(s.clone());
            b.push(1.0);
            rows.push(s.iter().map(|v| -v).collect());
            b.push(-1.0);
            for j in 0..k + q {
                let mut r = vec![0.0; k + q];
                r[j] = -1.0;
                rows.push(r);
                b.push(0.0);
            }
        }
    }
    let n = rows[0].len();
    let lp = Polytope::new_unchecked(Matrix::from_rows(&rows)?, b);
    Ok(lp::solve_lp(&lp, &vec![0.0; n])?.status() == SolveStatus::Optimal)
}

/// Indices (into `vs`) of the vertices that are optimal for some cost in
/// the prior.
pub fn reachable_in(vs: &VertexSet, p: &Polytope, prior: &PriorSpec) -> Result<Vec<usize>> {
    prior.validate()?;
    ensure_len("prior", prior.dim(), p.dim())?;
    let mut out = Vec::new();
    for (i, act) in vs.active_sets.iter().enumerate() {
        if reachable_at(p, act, prior)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// The reachable vertices themselves.
pub fn reachable_vertices(p: &Polytope, prior: &PriorSpec) -> Result<Vec<Vec<f64>>> {
    let vs = enumerate_vertices(p)?;
    Ok(reachable_in(&vs, p, prior)?
        .into_iter()
        .map(|i| vs.vertices[i].clone())
        .collect())
}

/// Orthonormal basis of `span{v - v0}` over `points`, `v0` the first point.
pub fn difference_span(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(v0) = points.first() else {
        return Vec::new();
    };
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|v| linalg::sub(v, v0)).collect();
    let scale = diffs.iter().map(|w| linalg::norm(w)).fold(0.0, f64::max);
    linalg::orthonormal_basis(&diffs, 1e-8 * (1.0 + scale))
}

/// Basis of the direction space of the reachable optimizer set, and its
/// dimension.
pub fn dir_star(p: &Polytope, prior: &PriorSpec) -> Result<(Vec<Vec<f64>>, usize)> {
    let basis = difference_span(&reachable_vertices(p, prior)?);
    let k = basis.len();
    Ok((basis, k))
}

/// Face-containment by enumeration: every vertex of the optimal face must
/// lie in the slice.
pub fn exact_check_bruteforce(model: &CompressionModel, p: &Polytope, c: &[f64]) -> Result<bool> {
    exact_check_in(&enumerate_vertices(p)?, model, c)
}

pub fn exact_check_in(vs: &VertexSet, model: &CompressionModel, c: &[f64]) -> Result<bool> {
    ensure_len("cost", c.len(), model.dim())?;
    let values: Vec<f64> = vs.vertices.iter().map(|v| dot(c, v)).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Domain("polytope has no vertices".into()));
    }
    let band = 1e-7 * (1.0 + best.abs());
    Ok(vs
        .vertices
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v <= best + band)
        .all(|(x, _)| model.in_range(&linalg::sub(x, model.x0()))))
}
