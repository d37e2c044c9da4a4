//! Dense revised simplex with Bland's rule.
//!
//! `min c^T x  s.t.  A x <= b` (x free) is solved through its dual in standard
//! form, `min b^T y  s.t.  A^T y = -c, y >= 0`. A dual basis is a set of `d`
//! rows of `A`; the corresponding primal point solves `A_B x = b_B`, so every
//! optimal basis hands back a vertex of the primal polytope directly.
//!
//! Entering variables are the lowest-index rows with a negative reduced cost.
//! Leaving ties go to the lowest variable in a fixed order (artificials
//! first, then rows by index). Identical inputs take identical pivot paths.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};

const PRICE_TOL: f64 = 1e-9;
const PIVOT_REL_TOL: f64 = 1e-9;
const RATIO_TIE_TOL: f64 = 1e-12;
const DRIVE_OUT_TOL: f64 = 1e-8;
const REFACTOR_EVERY: usize = 40;

/// Constraint rows of `A x <= b`, optionally with a few rows appended.
pub(crate) struct Rows<'a> {
    a: &'a Matrix,
    b: &'a [f64],
    extra: &'a [(Vec<f64>, f64)],
}

impl<'a> Rows<'a> {
    pub(crate) fn new(a: &'a Matrix, b: &'a [f64], extra: &'a [(Vec<f64>, f64)]) -> Self {
        Self { a, b, extra }
    }

    pub(crate) fn len(&self) -> usize {
        self.a.rows() + self.extra.len()
    }

    pub(crate) fn dim(&self) -> usize {
        self.a.cols()
    }

    pub(crate) fn row(&self, j: usize) -> &[f64] {
        let m0 = self.a.rows();
        if j < m0 {
            self.a.row(j)
        } else {
            &self.extra[j - m0].0
        }
    }

    pub(crate) fn rhs(&self, j: usize) -> f64 {
        let m0 = self.a.rows();
        if j < m0 {
            self.b[j]
        } else {
            self.extra[j - m0].1
        }
    }
}

#[derive(Debug)]
pub(crate) enum Outcome {
    Optimal {
        x: Vec<f64>,
        /// Basic rows, ascending.
        basis: Vec<usize>,
        /// Every basic dual multiplier is strictly positive, which pins the
        /// primal optimizer to a single point.
        nondegenerate: bool,
    },
    /// The dual is unbounded: the primal is infeasible.
    DualUnbounded,
    /// The dual is infeasible: the primal is unbounded or infeasible.
    DualInfeasible,
    /// `A` has rank below `d`; there is no vertex.
    RankDeficient,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Step {
    Optimal,
    Unbounded,
}

struct Dual<'r> {
    rows: &'r Rows<'r>,
    d: usize,
    m: usize,
    sign: Vec<f64>,
    h: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    yb: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    limit: usize,
}

impl<'r> Dual<'r> {
    fn new(rows: &'r Rows<'r>, c: &[f64]) -> Self {
        let d = rows.dim();
        let m = rows.len();
        let sign: Vec<f64> = c.iter().map(|&ci| if -ci < 0.0 { -1.0 } else { 1.0 }).collect();
        let h: Vec<f64> = c.iter().zip(&sign).map(|(&ci, &s)| -ci * s).collect();
        let basis: Vec<usize> = (0..d).map(|i| m + i).collect();
        let binv = Matrix::identity(d).as_slice().to_vec();
        Self {
            rows,
            d,
            m,
            sign,
            yb: h.clone(),
            h,
            basis,
            is_basic: vec![false; m],
            binv,
            since_refactor: 0,
            iterations: 0,
            limit: 50_000 + 100 * (m + d),
        }
    }

    fn order_key(&self, var: usize) -> usize {
        if var >= self.m {
            var - self.m
        } else {
            self.d + var
        }
    }

    fn cost(&self, phase: Phase, var: usize) -> f64 {
        match phase {
            Phase::One => {
                if var >= self.m {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if var >= self.m {
                    0.0
                } else {
                    self.rows.rhs(var)
                }
            }
        }
    }

    /// Column `j` of the sign-adjusted constraint matrix.
    fn column(&self, j: usize) -> Vec<f64> {
        if j >= self.m {
            let mut e = vec![0.0; self.d];
            e[j - self.m] = 1.0;
            e
        } else {
            self.rows
                .row(j)
                .iter()
                .zip(&self.sign)
                .map(|(a, s)| a * s)
                .collect()
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let g = self.column(j);
        let d = self.d;
        (0..d).map(|i| dot(&self.binv[i * d..(i + 1) * d], &g)).collect()
    }

    /// Current primal point `S B^{-T} f_B`.
    fn primal_point(&self, phase: Phase) -> Vec<f64> {
        let d = self.d;
        let mut pi = vec![0.0; d];
        for i in 0..d {
            let f = self.cost(phase, self.basis[i]);
            if f != 0.0 {
                linalg::axpy(f, &self.binv[i * d..(i + 1) * d], &mut pi);
            }
        }
        for (p, s) in pi.iter_mut().zip(&self.sign) {
            *p *= s;
        }
        pi
    }

    fn pivot(&mut self, r: usize, j: usize, w: &[f64]) {
        let d = self.d;
        let piv = w[r];
        let theta = self.yb[r] / piv;
        for k in 0..d {
            self.binv[r * d + k] /= piv;
        }
        let pivot_row: Vec<f64> = self.binv[r * d..(r + 1) * d].to_vec();
        for i in 0..d {
            if i == r || w[i] == 0.0 {
                continue;
            }
            let f = w[i];
            linalg::axpy(-f, &pivot_row, &mut self.binv[i * d..(i + 1) * d]);
            self.yb[i] -= theta * f;
        }
        self.yb[r] = theta;
        let old = self.basis[r];
        if old < self.m {
            self.is_basic[old] = false;
        }
        self.basis[r] = j;
        self.is_basic[j] = true;
        self.since_refactor += 1;
    }

    fn refactor(&mut self) -> Result<()> {
        let d = self.d;
        let mut bmat = vec![0.0; d * d];
        for (pos, &var) in self.basis.iter().enumerate() {
            let col = self.column(var);
            for i in 0..d {
                bmat[i * d + pos] = col[i];
            }
        }
        self.binv = linalg::invert(d, &bmat)
            .ok_or_else(|| Error::Internal("simplex basis became singular".into()))?;
        self.yb = (0..d)
            .map(|i| dot(&self.binv[i * d..(i + 1) * d], &self.h))
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn run(&mut self, phase: Phase) -> Result<Step> {
        let hscale = 1.0 + linalg::norm_inf(&self.h);
        loop {
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(Error::IterationLimit(self.limit));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let u = self.primal_point(phase);
            let mut entering = None;
            for j in 0..self.m {
                if self.is_basic[j] {
                    continue;
                }
                let ua = dot(&u, self.rows.row(j));
                let f = self.cost(phase, j);
                let r = f - ua;
                if r < -PRICE_TOL * (1.0 + f.abs() + ua.abs()) {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(Step::Optimal);
            };
            let w = self.ftran(j);
            let wmax = linalg::norm_inf(&w);
            let ptol = PIVOT_REL_TOL * wmax;
            let zero = 1e-12 * hscale;
            let mut best = f64::INFINITY;
            for i in 0..self.d {
                if wmax > 0.0 && w[i] > ptol {
                    let y = if self.yb[i] <= zero { 0.0 } else { self.yb[i] };
                    best = best.min(y / w[i]);
                }
            }
            if !best.is_finite() {
                return Ok(Step::Unbounded);
            }
            let mut leave: Option<usize> = None;
            for i in 0..self.d {
                if wmax > 0.0 && w[i] > ptol {
                    let y = if self.yb[i] <= zero { 0.0 } else { self.yb[i] };
                    let ratio = y / w[i];
                    if ratio - best <= RATIO_TIE_TOL * (1.0 + best) {
                        let better = match leave {
                            None => true,
                            Some(l) => self.order_key(self.basis[i]) < self.order_key(self.basis[l]),
                        };
                        if better {
                            leave = Some(i);
                        }
                    }
                }
            }
            let r = leave.expect("a ratio candidate exists");
            if self.yb[r] <= zero {
                self.yb[r] = 0.0;
            }
            self.pivot(r, j, &w);
        }
    }

    /// Pivots remaining zero-level artificials out of the basis.
    fn drive_out_artificials(&mut self) -> Result<bool> {
        let d = self.d;
        for pos in 0..d {
            if self.basis[pos] < self.m {
                continue;
            }
            let row: Vec<f64> = self.binv[pos * d..(pos + 1) * d].to_vec();
            let row_mag = linalg::norm_inf(&row);
            let mut chosen = None;
            let mut best = 0.0;
            for j in 0..self.m {
                if self.is_basic[j] {
                    continue;
                }
                let a = self.rows.row(j);
                let val: f64 = (0..d).map(|k| row[k] * self.sign[k] * a[k]).sum();
                let scale = row_mag * linalg::norm_inf(a);
                if scale > 0.0 && val.abs() > DRIVE_OUT_TOL * scale && val.abs() / scale > best {
                    best = val.abs() / scale;
                    chosen = Some(j);
                }
            }
            let Some(j) = chosen else {
                return Ok(false);
            };
            let w = self.ftran(j);
            self.yb[pos] = 0.0;
            self.pivot(pos, j, &w);
        }
        self.refactor()?;
        Ok(true)
    }
}

/// Solves `min c^T x s.t. rows`, returning the terminal basis.
pub(crate) fn solve(rows: &Rows, c: &[f64]) -> Result<Outcome> {
    let d = rows.dim();
    debug_assert_eq!(c.len(), d);
    let mut dual = Dual::new(rows, c);
    let hsum: f64 = dual.h.iter().sum();
    if hsum > 0.0 {
        if let Step::Unbounded = dual.run(Phase::One)? {
            return Err(Error::Internal("phase-one objective unbounded".into()));
        }
        let art: f64 = dual
            .basis
            .iter()
            .zip(&dual.yb)
            .filter(|(v, _)| **v >= dual.m)
            .map(|(_, y)| y.max(0.0))
            .sum();
        if art > 1e-9 * (1.0 + hsum) {
            return Ok(Outcome::DualInfeasible);
        }
    }
    if !dual.drive_out_artificials()? {
        return Ok(Outcome::RankDeficient);
    }
    match dual.run(Phase::Two)? {
        Step::Unbounded => Ok(Outcome::DualUnbounded),
        Step::Optimal => {
            let mut basis = dual.basis.clone();
            basis.sort_unstable();
            let mut ab = Vec::with_capacity(d * d);
            let mut bb = Vec::with_capacity(d);
            for &j in &basis {
                ab.extend_from_slice(rows.row(j));
                bb.push(rows.rhs(j));
            }
            let x = linalg::lu_solve(d, &ab, &bb)
                .ok_or_else(|| Error::Internal("optimal basis is singular".into()))?;
            let ymax = linalg::norm_inf(&dual.yb);
            let nondegenerate = dual.yb.iter().all(|&y| y > 1e-9 * (1.0 + ymax));
            Ok(Outcome::Optimal {
                x,
                basis,
                nondegenerate,
            })
        }
    }
}
