//! Homogeneous projection baselines: substitute `x = P y` and solve over the
//! linear slice `X ∩ range(P)`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{self, Matrix};
use crate::lp::{self, Optimum, Polytope, SolveResult};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Random,
    Pca,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionModel {
    #[serde(rename = "P")]
    pub p: Matrix,
    pub kind: ProjectionKind,
    pub k: usize,
}

impl ProjectionModel {
    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    fn from_columns(d: usize, cols: &[Vec<f64>], kind: ProjectionKind) -> Self {
        Self {
            p: Matrix::from_columns(d, cols),
            kind,
            k: cols.len(),
        }
    }
}

fn check_k(d: usize, k: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::Domain(format!("projection dimension {k} outside 1..={d}")));
    }
    Ok(())
}

/// Gaussian `N(0, 1/k)` matrix with orthonormalized columns.
pub fn random_projection(d: usize, k: usize, seed: u64) -> Result<ProjectionModel> {
    check_k(d, k)?;
    let normal = Normal::new(0.0, (1.0 / k as f64).sqrt()).expect("positive variance");
    let mut g = rng::keyed(seed, rng::streams::PROJECTION, (d as u64) << 32 | k as u64);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let v: Vec<f64> = (0..d).map(|_| normal.sample(&mut g)).collect();
        let scale = linalg::norm(&v);
        if let Some(q) = linalg::orthonormalize_against(&cols, &v, 1e-8 * scale) {
            cols.push(q);
        }
    }
    Ok(ProjectionModel::from_columns(d, &cols, ProjectionKind::Random))
}

/// Top-`k` right singular directions of the stacked solutions, uncentered.
pub fn pca_projection(solutions: &[Vec<f64>], k: usize) -> Result<ProjectionModel> {
    pca_projection_with(solutions, k, false)
}

/// As [`pca_projection`]; `centered` subtracts the sample mean first.
/// Columns beyond the numerical rank are filled by completing with
/// standard basis vectors in index order.
pub fn pca_projection_with(solutions: &[Vec<f64>], k: usize, centered: bool) -> Result<ProjectionModel> {
    let first = solutions
        .first()
        .ok_or_else(|| Error::Domain("PCA needs at least one solution".into()))?;
    let d = first.len();
    check_k(d, k)?;
    let n = solutions.len();
    for s in solutions {
        ensure_len("solution", s.len(), d)?;
    }
    let mean: Vec<f64> = if centered {
        (0..d).map(|j| solutions.iter().map(|s| s[j]).sum::<f64>() / n as f64).collect()
    } else {
        vec![0.0; d]
    };
    let x = nalgebra::DMatrix::from_fn(n, d, |i, j| solutions[i][j] - mean[j]);
    let svd = x.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors were requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let smax = order.first().map_or(0.0, |&i| sv[i]);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &i in &order {
        if cols.len() == k || sv[i] <= 1e-10 * smax.max(f64::MIN_POSITIVE) || smax == 0.0 {
            break;
        }
        let mut v: Vec<f64> = vt.row(i).iter().copied().collect();
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        if let Some(q) = linalg::orthonormalize_against(&cols, &v, 1e-6) {
            cols.push(q);
        }
    }
    if cols.len() < k {
        let extra = linalg::complete_basis(&cols, d, 1e-3);
        cols.extend(extra.into_iter().take(k - cols.len()));
    }
    Ok(ProjectionModel::from_columns(d, &cols, ProjectionKind::Pca))
}

/// Solves `min (P^T c)^T y s.t. A P y <= b` and lifts `x = P y`. An
/// empty slice is reported as `Infeasible`.
pub fn solve_projected(p: &Polytope, c: &[f64], pm: &ProjectionModel) -> Result<SolveResult> {
    ensure_len("projection", pm.dim(), p.dim())?;
    ensure_len("cost", c.len(), p.dim())?;
    let ap = p.a().mul(&pm.p);
    let reduced = Polytope::new_unchecked(ap, p.b().to_vec());
    let cost = pm.p.tr_mul_vec(c);
    Ok(match lp::solve_lp(&reduced, &cost)? {
        SolveResult::Optimal(o) => SolveResult::Optimal(Optimum {
            x: pm.p.mul_vec(&o.x),
            value: o.value,
            basis: o.basis,
            unique: o.unique,
        }),
        other => other,
    })
}
