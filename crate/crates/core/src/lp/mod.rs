//! Linear programs in inequality form `min c^T x s.t. A x <= b` and a
//! deterministic vertex solver for them.

mod general;
mod simplex;

pub use general::{normalize_to_inequality_form, Constraint, GeneralLp, Normalized, Relation, Sense, VariableMap};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::json::{self, SCHEMA_VERSION};
use crate::linalg::{self, dot, Matrix};
use simplex::{Outcome, Rows};

/// Cost vectors are plain vectors whose length matches the polytope.
pub type CostVector = Vec<f64>;

/// Numerical tolerances shared by the solver, the compression model and the
/// learner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative primal feasibility.
    pub eps_feas: f64,
    /// Half-width of the slab that realizes an optimal face.
    pub eps_face: f64,
    /// Rank threshold, relative to the largest column norm.
    pub tau_rank: f64,
    /// Range membership threshold.
    pub tau_range: f64,
    /// Face containment threshold, relative to `1 + |x0|`.
    pub tau_contain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_feas: 1e-7,
            eps_face: 1e-7,
            tau_rank: 1e-8,
            tau_range: 1e-7,
            tau_contain: 1e-6,
        }
    }
}

/// The feasible region `{x : A x <= b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr")]
pub struct Polytope {
    #[serde(rename = "A")]
    a: Matrix,
    b: Vec<f64>,
}

#[derive(Deserialize)]
struct PolytopeRepr {
    #[serde(rename = "A")]
    a: Matrix,
    b: Vec<f64>,
}

impl TryFrom<PolytopeRepr> for Polytope {
    type Error = Error;
    fn try_from(r: PolytopeRepr) -> Result<Self> {
        Polytope::new(r.a, r.b)
    }
}

impl Polytope {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::Dimension(format!(
                "polytope needs m >= 1 and d >= 1, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        ensure_len("b", b.len(), a.rows())?;
        if a.as_slice().iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Domain("polytope data must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, b)
    }

    /// Allows zero columns; used for reduced problems of rank 0.
    pub(crate) fn new_unchecked(a: Matrix, b: Vec<f64>) -> Self {
        Self { a, b }
    }

    /// The box `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        let mut a = Matrix::zeros(2 * d, d);
        let mut b = Vec::with_capacity(2 * d);
        for i in 0..d {
            a.set(2 * i, i, 1.0);
            b.push(hi);
            a.set(2 * i + 1, i, -1.0);
            b.push(-lo);
        }
        Self { a, b }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// Returns `A x - b`.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .mul_vec(x)
            .into_iter()
            .zip(&self.b)
            .map(|(ax, b)| ax - b)
            .collect()
    }

    pub fn is_feasible_point(&self, x: &[f64], eps: f64) -> bool {
        self.slacks(x)
            .iter()
            .zip(&self.b)
            .all(|(s, b)| *s <= eps * (1.0 + b.abs()))
    }

    /// Rows active at `x` within `eps * (1 + |b_i|)`.
    pub fn active_rows(&self, x: &[f64], eps: f64) -> Vec<usize> {
        self.slacks(x)
            .iter()
            .zip(&self.b)
            .enumerate()
            .filter(|(_, (s, b))| s.abs() <= eps * (1.0 + b.abs()))
            .map(|(i, _)| i)
            .collect()
    }

    /// Rank threshold `tau_rank * (largest column norm)`.
    pub fn rank_tol(&self, tol: &Tolerances) -> f64 {
        tol.tau_rank * self.a.max_column_norm().max(f64::MIN_POSITIVE)
    }

    /// Whether `x` is an extreme point: feasible, with active rows of rank `d`.
    pub fn is_vertex(&self, x: &[f64], active_eps: f64, tol: &Tolerances) -> bool {
        if !self.is_feasible_point(x, active_eps) {
            return false;
        }
        let act: Vec<Vec<f64>> = self
            .active_rows(x, active_eps)
            .into_iter()
            .map(|i| self.a.row(i).to_vec())
            .collect();
        linalg::rank(&act, self.rank_tol(tol)) == self.dim()
    }

    pub fn save(&self, path: &Path, meta: BTreeMap<String, serde_json::Value>) -> Result<()> {
        json::write_file(
            path,
            &PolytopeFile {
                schema: SCHEMA_VERSION,
                polytope: self.clone(),
                meta,
            },
        )
    }

    pub fn load(path: &Path) -> Result<(Self, BTreeMap<String, serde_json::Value>)> {
        let f: PolytopeFile = json::read_file(path)?;
        Ok((f.polytope, f.meta))
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeFile {
    schema: u32,
    #[serde(flatten)]
    polytope: Polytope,
    #[serde(default)]
    meta: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// An optimal vertex together with its terminal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Basic rows, ascending. Rows past `m` are auxiliary rows (face slab).
    pub basis: Vec<usize>,
    /// The optimizer is certified unique (strictly positive multipliers).
    pub unique: bool,
}

impl Optimum {
    /// Canonical FNV-1a hash of the terminal basis.
    pub fn basis_id(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &i in &self.basis {
            for byte in (i as u64).to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveResult {
    Optimal(Optimum),
    Infeasible,
    Unbounded,
}

impl SolveResult {
    pub fn status(&self) -> SolveStatus {
        match self {
            SolveResult::Optimal(_) => SolveStatus::Optimal,
            SolveResult::Infeasible => SolveStatus::Infeasible,
            SolveResult::Unbounded => SolveStatus::Unbounded,
        }
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            SolveResult::Optimal(o) => Some(o),
            _ => None,
        }
    }

    /// Unwraps the optimum, turning any other status into an internal error
    /// tagged with `what`.
    pub fn expect_optimal(self, what: &str) -> Result<Optimum> {
        match self {
            SolveResult::Optimal(o) => Ok(o),
            other => Err(Error::Internal(format!("{what}: status {:?}", other.status()))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    FeasibleBounded,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceSense {
    Max,
    Min,
}

fn solve_rows(rows: &Rows, c: &[f64]) -> Result<SolveResult> {
    let d = rows.dim();
    if d == 0 {
        let ok = (0..rows.len()).all(|j| rows.rhs(j) >= -1e-9 * (1.0 + rows.rhs(j).abs()));
        return Ok(if ok {
            SolveResult::Optimal(Optimum {
                x: Vec::new(),
                value: 0.0,
                basis: Vec::new(),
                unique: true,
            })
        } else {
            SolveResult::Infeasible
        });
    }
    match simplex::solve(rows, c)? {
        Outcome::Optimal {
            x,
            basis,
            nondegenerate,
        } => Ok(SolveResult::Optimal(Optimum {
            value: dot(c, &x),
            x,
            basis,
            unique: nondegenerate,
        })),
        Outcome::DualUnbounded => Ok(SolveResult::Infeasible),
        Outcome::DualInfeasible | Outcome::RankDeficient => {
            if rows_feasible(rows)? {
                Ok(SolveResult::Unbounded)
            } else {
                Ok(SolveResult::Infeasible)
            }
        }
    }
}

/// Phase-one feasibility on the split form `x = x+ - x-`, which always has
/// full column rank.
fn rows_feasible(rows: &Rows) -> Result<bool> {
    let d = rows.dim();
    let m = rows.len();
    let mut a = Matrix::zeros(m + 2 * d, 2 * d);
    let mut b = vec![0.0; m + 2 * d];
    for j in 0..m {
        let r = rows.row(j);
        for i in 0..d {
            a.set(j, i, r[i]);
            a.set(j, d + i, -r[i]);
        }
        b[j] = rows.rhs(j);
    }
    for i in 0..2 * d {
        a.set(m + i, i, -1.0);
    }
    let split = Rows::new(&a, &b, &[]);
    match simplex::solve(&split, &vec![0.0; 2 * d])? {
        Outcome::Optimal { .. } => Ok(true),
        Outcome::DualUnbounded => Ok(false),
        other => Err(Error::Internal(format!("feasibility LP returned {other:?}"))),
    }
}

/// Solves `min c^T x` over the polytope, returning a vertex optimizer.
pub fn solve_lp(p: &Polytope, c: &[f64]) -> Result<SolveResult> {
    ensure_len("cost", c.len(), p.dim())?;
    solve_rows(&Rows::new(&p.a, &p.b, &[]), c)
}

/// Optimizes `a^T x` over the optimal face `{x in X : c^T x = v}`, with the
/// face realized as a slab of half-width `eps_face * (1 + |v|)`.
///
/// When the terminal basis uses a slab row, the point is recomputed on the
/// exact hyperplane `c^T x = v` with the same basis; that point is a vertex of
/// the face and therefore of `X`.
pub fn solve_on_optimal_face(
    p: &Polytope,
    c: &[f64],
    v: f64,
    a: &[f64],
    sense: FaceSense,
    tol: &Tolerances,
) -> Result<SolveResult> {
    let d = p.dim();
    ensure_len("cost", c.len(), d)?;
    ensure_len("face objective", a.len(), d)?;
    let slack = tol.eps_face * (1.0 + v.abs());
    let extra = [
        (c.to_vec(), v + slack),
        (c.iter().map(|x| -x).collect::<Vec<_>>(), -v + slack),
    ];
    let objective: Vec<f64> = match sense {
        FaceSense::Min => a.to_vec(),
        FaceSense::Max => a.iter().map(|x| -x).collect(),
    };
    let rows = Rows::new(&p.a, &p.b, &extra);
    let res = solve_rows(&rows, &objective)?;
    let SolveResult::Optimal(mut opt) = res else {
        return Ok(res);
    };
    let m = p.rows();
    if opt.basis.iter().any(|&j| j >= m) {
        let mut sys = Vec::with_capacity(d * d);
        let mut rhs = Vec::with_capacity(d);
        for &j in opt.basis.iter().filter(|&&j| j < m) {
            sys.extend_from_slice(p.a.row(j));
            rhs.push(p.b[j]);
        }
        sys.extend_from_slice(c);
        rhs.push(v);
        if let Some(x) = linalg::lu_solve(d, &sys, &rhs) {
            if p.is_feasible_point(&x, tol.eps_feas) {
                opt.x = x;
            }
        }
    }
    opt.value = dot(a, &opt.x);
    Ok(SolveResult::Optimal(opt))
}

/// Classifies the polytope: one feasibility solve, then `2d` coordinate
/// solves.
pub fn check_feasible_bounded(p: &Polytope) -> Result<Feasibility> {
    let rows = Rows::new(&p.a, &p.b, &[]);
    if !rows_feasible(&rows)? {
        return Ok(Feasibility::Infeasible);
    }
    let d = p.dim();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            if solve_rows(&rows, &e)?.status() == SolveStatus::Unbounded {
                return Ok(Feasibility::Unbounded);
            }
        }
    }
    Ok(Feasibility::FeasibleBounded)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        Polytope::cube(2, -1.0, 1.0)
    }

    #[test]
    fn square_vertex_optimum() {
        let r = solve_lp(&square(), &[-1.5, 0.3]).unwrap();
        let o = r.optimum().unwrap();
        assert_eq!(o.x, vec![1.0, -1.0]);
        assert!((o.value + 1.8).abs() < 1e-15);
        assert!(o.unique);
    }

    #[test]
    fn zero_cost_returns_deterministic_vertex() {
        let p = square();
        let a = solve_lp(&p, &[0.0, 0.0]).unwrap().expect_optimal("zero").unwrap();
        let b = solve_lp(&p, &[0.0, 0.0]).unwrap().expect_optimal("zero").unwrap();
        assert_eq!(a.value, 0.0);
        assert_eq!(a, b);
        assert!(p.is_vertex(&a.x, 1e-9, &Tolerances::default()));
    }

    #[test]
    fn ray_is_unbounded() {
        let p = Polytope::from_rows(&[vec![-1.0]], vec![0.0]).unwrap();
        assert_eq!(solve_lp(&p, &[-1.0]).unwrap(), SolveResult::Unbounded);
        assert_eq!(solve_lp(&p, &[1.0]).unwrap().optimum().unwrap().x, vec![0.0]);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let p = Polytope::from_rows(&[vec![1.0], vec![-1.0]], vec![-1.0, -2.0]).unwrap();
        assert_eq!(solve_lp(&p, &[1.0]).unwrap(), SolveResult::Infeasible);
        assert_eq!(solve_lp(&p, &[0.0]).unwrap(), SolveResult::Infeasible);
        assert_eq!(check_feasible_bounded(&p).unwrap(), Feasibility::Infeasible);
    }

    #[test]
    fn feasibility_classification() {
        assert_eq!(check_feasible_bounded(&square()).unwrap(), Feasibility::FeasibleBounded);
        let half = Polytope::from_rows(&[vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(check_feasible_bounded(&half).unwrap(), Feasibility::Unbounded);
    }

    #[test]
    fn face_solves_on_right_edge() {
        let tol = Tolerances::default();
        let p = square();
        let up = solve_on_optimal_face(&p, &[-1.0, 0.0], -1.0, &[0.0, 1.0], FaceSense::Max, &tol)
            .unwrap()
            .expect_optimal("max")
            .unwrap();
        assert_eq!(up.x, vec![1.0, 1.0]);
        assert_eq!(up.value, 1.0);
        let down = solve_on_optimal_face(&p, &[-1.0, 0.0], -1.0, &[0.0, 1.0], FaceSense::Min, &tol)
            .unwrap()
            .expect_optimal("min")
            .unwrap();
        assert_eq!(down.x, vec![1.0, -1.0]);
        assert_eq!(down.value, -1.0);
    }

    #[test]
    fn singleton_face() {
        let tol = Tolerances::default();
        let p = square();
        for sense in [FaceSense::Max, FaceSense::Min] {
            let o = solve_on_optimal_face(&p, &[-1.0, -1.0], -2.0, &[0.0, 1.0], sense, &tol)
                .unwrap()
                .expect_optimal("face")
                .unwrap();
            assert!((o.x[0] - 1.0).abs() < 1e-12 && (o.x[1] - 1.0).abs() < 1e-12);
            assert!((dot(&[0.0, 1.0], &linalg::sub(&o.x, &[1.0, 1.0]))).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_face_value_is_infeasible() {
        let tol = Tolerances::default();
        let r = solve_on_optimal_face(&square(), &[-1.0, 0.0], -3.0, &[0.0, 1.0], FaceSense::Max, &tol)
            .unwrap();
        assert_eq!(r, SolveResult::Infeasible);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(solve_lp(&square(), &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn polytope_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let p = Polytope::from_rows(&[vec![0.1, 1.0 / 3.0], vec![-1.0, 2.0]], vec![0.7, 1e-17]).unwrap();
        p.save(&path, BTreeMap::new()).unwrap();
        let (q, _) = Polytope::load(&path).unwrap();
        assert_eq!(p, q);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"schema\":1"));
        assert!(text.contains("\"A\":[["));
    }
}
