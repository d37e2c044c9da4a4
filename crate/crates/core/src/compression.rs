//! Affine compression models `x0 + range(U)`: range tests, the reduced LP,
//! lifting, and the optimal-face containment test.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{self, dot, norm, Matrix};
use crate::lp::{self, FaceSense, Optimum, Polytope, SolveResult, Tolerances};

/// Where a model came from; carried along in its JSON form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_cost: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub hard_indices: Vec<usize>,
}

/// The affine slice `x0 + range(U)` with cached orthonormal bases of
/// `range(U)` and its orthogonal complement.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionModel {
    x0: Vec<f64>,
    u: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    qperp: Vec<Vec<f64>>,
    tol: Tolerances,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    x0: Vec<f64>,
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    tol: Tolerances,
    #[serde(default)]
    provenance: Provenance,
}

impl Serialize for CompressionModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelRepr {
            x0: self.x0.clone(),
            u: self.u.clone(),
            tol: self.tol,
            provenance: self.provenance.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CompressionModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ModelRepr::deserialize(d)?;
        let mut m = CompressionModel::with_columns(r.x0, r.u, r.tol).map_err(serde::de::Error::custom)?;
        m.provenance = r.provenance;
        Ok(m)
    }
}

/// Outcome of the containment test.
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentResult {
    pub contained: bool,
    /// A vertex of the optimal face off the slice.
    pub witness: Option<Vec<f64>>,
    /// Column of the complement basis that exposed the witness.
    pub functional_index: Option<usize>,
    /// The full-LP optimum computed along the way.
    pub optimum: Optimum,
}

/// `min (U^T c)^T z s.t. (A U) z <= b - A x0`, plus the constant `c^T x0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedLp {
    pub polytope: Polytope,
    pub cost: Vec<f64>,
    pub offset: f64,
}

/// Orthonormal complement of `q` in `R^d`, built from `e_1, e_2, ...`.
fn complement(q: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut extra = linalg::complete_basis(q, d, 1e-3);
    if q.len() + extra.len() < d {
        let mut all = q.to_vec();
        all.extend(extra.iter().cloned());
        extra.extend(linalg::complete_basis(&all, d, 1e-12));
    }
    extra
}

impl CompressionModel {
    /// The rank-0 model `{x0}`.
    pub fn new(x0: Vec<f64>, tol: Tolerances) -> Self {
        let d = x0.len();
        Self {
            qperp: complement(&[], d),
            q: Vec::new(),
            u: Vec::new(),
            x0,
            tol,
            provenance: Provenance::default(),
        }
    }

    /// Builds a model from explicit columns, rejecting dependent ones.
    pub fn with_columns(x0: Vec<f64>, columns: Vec<Vec<f64>>, tol: Tolerances) -> Result<Self> {
        let mut m = Self::new(x0, tol);
        for (j, c) in columns.into_iter().enumerate() {
            ensure_len(&format!("column {j}"), c.len(), m.dim())?;
            m = m.push_column(c)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn rank(&self) -> usize {
        self.u.len()
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    /// Columns of `U`.
    pub fn columns(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn u_matrix(&self) -> Matrix {
        Matrix::from_columns(self.dim(), &self.u)
    }

    /// Orthonormal basis of `range(U)`.
    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// Orthonormal basis of `range(U)^perp`.
    pub fn qperp(&self) -> &[Vec<f64>] {
        &self.qperp
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// Whether `w` lies in `range(U)`.
    pub fn in_range(&self, w: &[f64]) -> bool {
        let off: f64 = self.qperp.iter().map(|a| dot(a, w).powi(2)).sum::<f64>().sqrt();
        off <= self.tol.tau_range * (1.0 + norm(w))
    }

    fn push_column(self, w: Vec<f64>) -> Result<Self> {
        if self.in_range(&w) {
            return Err(Error::Rank(format!(
                "direction already in range(U) (rank {})",
                self.rank()
            )));
        }
        let qn = linalg::orthonormalize_against(&self.q, &w, 0.0)
            .ok_or_else(|| Error::Rank("direction has zero residual".into()))?;
        let mut q = self.q;
        q.push(qn);
        let qperp = complement(&q, self.x0.len());
        let mut u = self.u;
        u.push(w);
        Ok(Self {
            x0: self.x0,
            u,
            q,
            qperp,
            tol: self.tol,
            provenance: self.provenance,
        })
    }

    /// Returns the model with `x - x0` appended to `U`.
    pub fn append_direction(&self, x: &[f64]) -> Result<Self> {
        ensure_len("point", x.len(), self.dim())?;
        self.clone().push_column(linalg::sub(x, &self.x0))
    }

    /// Containment threshold `tau_contain * (1 + |x0|)`.
    pub fn contain_tol(&self) -> f64 {
        self.tol.tau_contain * (1.0 + norm(&self.x0))
    }

    /// `x0 + U z`.
    pub fn lift(&self, z: &[f64]) -> Result<Vec<f64>> {
        ensure_len("reduced point", z.len(), self.rank())?;
        let mut x = self.x0.clone();
        for (col, zj) in self.u.iter().zip(z) {
            linalg::axpy(*zj, col, &mut x);
        }
        Ok(x)
    }

    pub fn build_reduced_lp(&self, p: &Polytope, c: &[f64]) -> Result<ReducedLp> {
        ensure_len("polytope", p.dim(), self.dim())?;
        ensure_len("cost", c.len(), self.dim())?;
        let r = self.rank();
        let m = p.rows();
        let ax0 = p.a().mul_vec(&self.x0);
        let mut au = Matrix::zeros(m, r);
        for (j, col) in self.u.iter().enumerate() {
            let acol = p.a().mul_vec(col);
            for i in 0..m {
                au.set(i, j, acol[i]);
            }
        }
        let b: Vec<f64> = p.b().iter().zip(&ax0).map(|(b, a)| b - a).collect();
        Ok(ReducedLp {
            polytope: Polytope::new_unchecked(au, b),
            cost: self.u.iter().map(|col| dot(col, c)).collect(),
            offset: dot(c, &self.x0),
        })
    }

    /// Solves the reduced LP and lifts its vertex optimizer. No exactness
    /// check is made.
    pub fn solve_via_compression(&self, p: &Polytope, c: &[f64]) -> Result<SolveResult> {
        let red = self.build_reduced_lp(p, c)?;
        match lp::solve_lp(&red.polytope, &red.cost)? {
            SolveResult::Optimal(o) => {
                let x = self.lift(&o.x)?;
                Ok(SolveResult::Optimal(Optimum {
                    value: red.offset + o.value,
                    x,
                    basis: o.basis,
                    unique: o.unique,
                }))
            }
            SolveResult::Infeasible => Err(Error::Internal(
                "reduced LP infeasible although z = 0 should be feasible".into(),
            )),
            SolveResult::Unbounded => Ok(SolveResult::Unbounded),
        }
    }

    /// Decides whether the optimal face of `c` lies in the slice. Complement
    /// directions are tried in index order, maximization before
    /// minimization, and the first violation is returned.
    pub fn contains_optimal_face(&self, p: &Polytope, c: &[f64]) -> Result<ContainmentResult> {
        ensure_len("polytope", p.dim(), self.dim())?;
        let opt = lp::solve_lp(p, c)?.expect_optimal("containment base solve")?;
        let tau = self.contain_tol();
        let shift: Vec<f64> = self.qperp.iter().map(|a| dot(a, &self.x0)).collect();
        if opt.unique {
            for (j, a) in self.qperp.iter().enumerate() {
                if (dot(a, &opt.x) - shift[j]).abs() > tau {
                    return Ok(ContainmentResult {
                        contained: false,
                        witness: Some(opt.x.clone()),
                        functional_index: Some(j),
                        optimum: opt,
                    });
                }
            }
        } else {
            for (j, a) in self.qperp.iter().enumerate() {
                for sense in [FaceSense::Max, FaceSense::Min] {
                    let face = lp::solve_on_optimal_face(p, c, opt.value, a, sense, &self.tol)?;
                    let SolveResult::Optimal(f) = face else {
                        return Err(Error::Internal(format!(
                            "optimal-face solve returned {:?}",
                            face.status()
                        )));
                    };
                    if (f.value - shift[j]).abs() > tau {
                        return Ok(ContainmentResult {
                            contained: false,
                            witness: Some(f.x),
                            functional_index: Some(j),
                            optimum: opt,
                        });
                    }
                }
            }
        }
        Ok(ContainmentResult {
            contained: true,
            witness: None,
            functional_index: None,
            optimum: opt,
        })
    }

    pub fn check_exact(&self, p: &Polytope, c: &[f64]) -> Result<bool> {
        Ok(self.contains_optimal_face(p, c)?.contained)
    }
}
