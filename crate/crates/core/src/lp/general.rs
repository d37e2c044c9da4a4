//! General-form LPs (any sense, mixed relations, variable bounds) and their
//! lossless reduction to `min c^T x s.t. A x <= b`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{dot, Matrix};
use crate::lp::Polytope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `sense  c^T x + constant` subject to relational rows and `lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLp {
    pub name: String,
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub var_names: Vec<String>,
}

impl GeneralLp {
    /// An LP over `n` variables with default bounds `0 <= x < inf`.
    pub fn new(n: usize, sense: Sense, objective: Vec<f64>) -> Self {
        Self {
            name: String::new(),
            sense,
            objective,
            objective_constant: 0.0,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            var_names: (0..n).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        let name = format!("r{}", self.constraints.len());
        self.constraints.push(Constraint {
            name,
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        ensure_len("lower bounds", self.lower.len(), n)?;
        ensure_len("upper bounds", self.upper.len(), n)?;
        for c in &self.constraints {
            ensure_len(&format!("row {}", c.name), c.coeffs.len(), n)?;
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(Error::Rejected(format!(
                    "variable {} has lower bound {} above upper bound {}",
                    self.var_names.get(j).map_or("?", String::as_str),
                    self.lower[j],
                    self.upper[j]
                )));
            }
        }
        Ok(())
    }
}

/// Maps between original variables `x` and normalized variables `x'`,
/// `x = x' + shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    pub shift: Vec<f64>,
    /// `+1` for minimization, `-1` when the original problem maximized.
    pub sense_sign: f64,
}

impl VariableMap {
    pub fn to_original(&self, xn: &[f64]) -> Vec<f64> {
        xn.iter().zip(&self.shift).map(|(x, s)| x + s).collect()
    }

    pub fn to_normalized(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(x, s)| x - s).collect()
    }

    /// Original objective value from a normalized one, given the offset.
    pub fn original_value(&self, normalized_value: f64, offset: f64) -> f64 {
        self.sense_sign * (normalized_value + offset)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub polytope: Polytope,
    pub cost: Vec<f64>,
    /// Constant added to `cost^T x'` to recover the (sign-adjusted) objective.
    pub value_offset: f64,
    pub variable_map: VariableMap,
}

/// Rows come out in a fixed order: constraints in input order (equalities as
/// a `<=` row followed by its negation), then for each variable its finite
/// lower bound `-x' <= 0` and finite upper bound `x' <= u - l`.
pub fn normalize_to_inequality_form(g: &GeneralLp) -> Result<Normalized> {
    g.validate()?;
    let n = g.num_vars();
    let sign = g.sense.sign();
    let mut shift = vec![0.0; n];
    for j in 0..n {
        let (l, u) = (g.lower[j], g.upper[j]);
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            return Err(Error::Rejected(format!(
                "variable {} is free in both directions",
                g.var_names.get(j).map_or("?", String::as_str)
            )));
        }
        if l.is_finite() {
            shift[j] = l;
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    for c in &g.constraints {
        let rhs = c.rhs - dot(&c.coeffs, &shift);
        let neg: Vec<f64> = c.coeffs.iter().map(|v| -v).collect();
        match c.relation {
            Relation::Le => {
                rows.push(c.coeffs.clone());
                b.push(rhs);
            }
            Relation::Ge => {
                rows.push(neg);
                b.push(-rhs);
            }
            Relation::Eq => {
                rows.push(c.coeffs.clone());
                b.push(rhs);
                rows.push(neg);
                b.push(-rhs);
            }
        }
    }
    for j in 0..n {
        if g.lower[j].is_finite() {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push(r);
            b.push(0.0);
        }
        if g.upper[j].is_finite() {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            rows.push(r);
            b.push(g.upper[j] - shift[j]);
        }
    }
    let cost: Vec<f64> = g.objective.iter().map(|v| sign * v).collect();
    let value_offset = sign * g.objective_constant + dot(&cost, &shift);
    let polytope = Polytope::new(Matrix::from_rows(&rows)?, b)?;
    Ok(Normalized {
        polytope,
        cost,
        value_offset,
        variable_map: VariableMap {
            shift,
            sense_sign: sign,
        },
    })
}
