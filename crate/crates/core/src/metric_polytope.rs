//! Facets of the metric polytope, membership tests, and cut metrics.
//!
//! The polytope is cut out by two families of inequalities: the triangle
//! inequalities `x_ik - x_ij - x_jk <= 0` (one per triple and choice of long
//! side) and the diameter bounds `x_ij <= 1`. Nonnegativity is implied by the
//! triangle inequalities and is not listed.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairspace::{check_n, flat_unchecked, flatten, num_pairs, PairVector};

pub const TOL_MEMBERSHIP: f64 = 1e-9;
pub const TOL_ACTIVE: f64 = 1e-7;

/// Largest `n` for which all `2^{n-1}` cuts are enumerated.
pub const MAX_CUT_ENUMERATION: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `x_ik - x_ij - x_jk <= 0`: `ik` is the long side, `j` the apex.
    Triangle { i: usize, j: usize, k: usize },
    /// `x_ij <= 1`.
    DiameterBound { i: usize, j: usize },
}

impl ConstraintKind {
    pub fn label(&self) -> &'static str {
        match self {
            ConstraintKind::Triangle { .. } => "triangle",
            ConstraintKind::DiameterBound { .. } => "bound",
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match *self {
            ConstraintKind::Triangle { i, j, k } => vec![i, j, k],
            ConstraintKind::DiameterBound { i, j } => vec![i, j],
        }
    }
}

/// A single inequality `a . x <= b` with a sparse normal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub kind: ConstraintKind,
    /// Nonzero entries of the normal as `(flat index, coefficient)`.
    pub terms: Vec<(usize, f64)>,
    pub b: f64,
}

impl LinearConstraint {
    pub(crate) fn triangle(n: usize, i: usize, j: usize, k: usize) -> Self {
        let f = |a: usize, b: usize| flatten(n, a, b).expect("valid triple");
        Self {
            kind: ConstraintKind::Triangle { i, j, k },
            terms: vec![(f(i, k), 1.0), (f(i, j), -1.0), (f(j, k), -1.0)],
            b: 0.0,
        }
    }

    pub(crate) fn bound(n: usize, i: usize, j: usize) -> Self {
        Self {
            kind: ConstraintKind::DiameterBound { i, j },
            terms: vec![(flat_unchecked(n, i, j), 1.0)],
            b: 1.0,
        }
    }

    /// `a . x`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(k, c)| c * x[k]).sum()
    }

    /// `b - a . x`.
    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - self.eval(x)
    }

    pub fn normal(&self, n: usize) -> PairVector {
        let mut a = PairVector::zeros(n);
        for &(k, c) in &self.terms {
            a[k] += c;
        }
        a
    }

    pub fn normal_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// `max_i (a_i . x - b_i)`.
    pub worst_violation: f64,
    /// `min_i (b_i - a_i . x)`.
    pub min_slack: f64,
    /// Index of a constraint attaining `min_slack`.
    pub argmin: usize,
}

/// All facets of the metric polytope for a fixed `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetSystem {
    n: usize,
    constraints: Vec<LinearConstraint>,
}

impl FacetSystem {
    pub fn build(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut constraints = Vec::with_capacity(3 * n * (n - 1) * (n - 2) / 6 + num_pairs(n));
        for a in 1..=n {
            for b in a + 1..=n {
                for c in b + 1..=n {
                    constraints.push(LinearConstraint::triangle(n, a, b, c));
                    constraints.push(LinearConstraint::triangle(n, a, c, b));
                    constraints.push(LinearConstraint::triangle(n, b, a, c));
                }
            }
        }
        for i in 1..n {
            for j in i + 1..=n {
                constraints.push(LinearConstraint::bound(n, i, j));
            }
        }
        Ok(Self { n, constraints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        num_pairs(self.n)
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    fn check_dim(&self, x: &PairVector) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn membership(&self, x: &PairVector) -> Result<Membership> {
        self.membership_with_tol(x, TOL_MEMBERSHIP)
    }

    pub fn membership_with_tol(&self, x: &PairVector, tol: f64) -> Result<Membership> {
        self.check_dim(x)?;
        let xs = x.as_slice();
        let mut min_slack = f64::INFINITY;
        let mut argmin = 0;
        for (idx, c) in self.constraints.iter().enumerate() {
            let s = c.slack(xs);
            if s < min_slack {
                min_slack = s;
                argmin = idx;
            }
        }
        Ok(Membership {
            inside: -min_slack <= tol,
            worst_violation: -min_slack,
            min_slack,
            argmin,
        })
    }

    /// Indices of constraints whose slack at `x` is at most `tol`.
    pub fn active_set(&self, x: &PairVector, tol: f64) -> Result<Vec<usize>> {
        self.check_dim(x)?;
        let xs = x.as_slice();
        Ok(self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.slack(xs) <= tol)
            .map(|(k, _)| k)
            .collect())
    }

    pub fn vertex_certificate(&self, x: &PairVector) -> Result<VertexCertificate> {
        self.vertex_certificate_with_tol(x, TOL_MEMBERSHIP, TOL_ACTIVE)
    }

    /// Checks whether `x` is a vertex: the active normals must span the space.
    pub fn vertex_certificate_with_tol(
        &self,
        x: &PairVector,
        tol_membership: f64,
        tol_active: f64,
    ) -> Result<VertexCertificate> {
        let m = self.membership_with_tol(x, tol_membership)?;
        if !m.inside {
            return Err(Error::NotInPolytope {
                worst_violation: m.worst_violation,
            });
        }
        let active = self.active_set(x, tol_active)?;
        let dim = self.dim();
        if active.is_empty() {
            return Ok(VertexCertificate {
                is_vertex: false,
                active_rank: 0,
                active_count: 0,
            });
        }
        let mut mat = DMatrix::<f64>::zeros(active.len(), dim);
        for (r, &idx) in active.iter().enumerate() {
            for &(k, c) in &self.constraints[idx].terms {
                mat[(r, k)] += c;
            }
        }
        let rank = mat.rank(1e-9);
        Ok(VertexCertificate {
            is_vertex: rank == dim,
            active_rank: rank,
            active_count: active.len(),
        })
    }

    /// Dense halfspace form `a_i . x <= b_i` for generic solvers.
    pub fn to_halfspaces(&self) -> Halfspaces {
        let dim = self.dim();
        let rows = self
            .constraints
            .iter()
            .map(|c| {
                let mut a = vec![0.0; dim];
                for &(k, v) in &c.terms {
                    a[k] += v;
                }
                (a, c.b)
            })
            .collect();
        Halfspaces { dim, rows }
    }

    pub fn to_json(&self) -> FacetSystemJson {
        FacetSystemJson {
            n: self.n,
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintJson {
                    kind: c.kind.label().to_string(),
                    indices: c.kind.indices(),
                    a: c.terms.iter().copied().collect(),
                    b: c.b,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexCertificate {
    pub is_vertex: bool,
    pub active_rank: usize,
    pub active_count: usize,
}

/// A generic polytope `{x : a_i . x <= b_i}` with dense rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspaces {
    pub dim: usize,
    pub rows: Vec<(Vec<f64>, f64)>,
}

impl Halfspaces {
    pub fn new(dim: usize, rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        for (a, _) in &rows {
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: a.len(),
                });
            }
        }
        Ok(Self { dim, rows })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        let mut rows = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            let mut a = vec![0.0; dim];
            a[k] = 1.0;
            rows.push((a.clone(), hi));
            a[k] = -1.0;
            rows.push((a, -lo));
        }
        Self { dim, rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub kind: String,
    pub indices: Vec<usize>,
    pub a: BTreeMap<usize, f64>,
    pub b: f64,
}

/// Wire form of a [`FacetSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetSystemJson {
    pub n: usize,
    pub constraints: Vec<ConstraintJson>,
}

impl FacetSystemJson {
    pub fn to_halfspaces(&self) -> Result<Halfspaces> {
        let dim = num_pairs(self.n);
        let mut rows = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let mut a = vec![0.0; dim];
            for (&k, &v) in &c.a {
                if k >= dim {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient index {k} out of range for n = {}",
                        self.n
                    )));
                }
                a[k] += v;
            }
            rows.push((a, c.b));
        }
        Ok(Halfspaces { dim, rows })
    }
}

/// The cut metric `δ(S)`: distance 1 exactly across the bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct CutMetric {
    /// Canonical side: never contains vertex 1. Sorted, 1-based.
    pub set: Vec<usize>,
    pub vector: PairVector,
}

impl CutMetric {
    pub fn size(&self) -> usize {
        self.set.len()
    }
}

/// `δ(S)` for an arbitrary subset `S` of `1..=n`.
pub fn cut_metric(n: usize, set: &[usize]) -> Result<CutMetric> {
    check_n(n)?;
    let mut member = vec![false; n + 1];
    for &v in set {
        if v == 0 || v > n {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} outside 1..={n}"
            )));
        }
        member[v] = true;
    }
    if member[1] {
        for m in member.iter_mut().skip(1) {
            *m = !*m;
        }
    }
    let canonical: Vec<usize> = (1..=n).filter(|&v| member[v]).collect();
    let vector = PairVector::from_fn(n, |i, j| if member[i] != member[j] { 1.0 } else { 0.0 });
    Ok(CutMetric {
        set: canonical,
        vector,
    })
}

fn cut_from_mask(n: usize, mask: u64) -> CutMetric {
    // bit t of `mask` marks vertex t + 2
    let in_set = |v: usize| v >= 2 && (mask >> (v - 2)) & 1 == 1;
    let set = (2..=n).filter(|&v| in_set(v)).collect();
    let vector = PairVector::from_fn(n, |i, j| if in_set(i) != in_set(j) { 1.0 } else { 0.0 });
    CutMetric { set, vector }
}

/// Lazily enumerates all `2^{n-1}` cut metrics, trivial cut first.
pub fn cuts(n: usize) -> Result<impl Iterator<Item = CutMetric>> {
    check_n(n)?;
    if n > MAX_CUT_ENUMERATION {
        return Err(Error::TooLarge {
            n,
            limit: MAX_CUT_ENUMERATION,
            what: "cut enumeration",
        });
    }
    Ok((0..1u64 << (n - 1)).map(move |mask| cut_from_mask(n, mask)))
}

/// All `2^{n-1}` cut metrics, including the zero metric `δ(∅)`.
pub fn all_cuts(n: usize) -> Result<Vec<CutMetric>> {
    Ok(cuts(n)?.collect())
}
