//! The `S_n`-invariant ellipsoid family.
//!
//! The form matrix has entry `α` on the diagonal, `β` between pairs sharing
//! one vertex and `γ` between disjoint pairs; the center is `δ·1`. Such a
//! matrix has three eigenspaces: the all-ones line, the degree space spanned
//! by `s(i) - s(j)` (`s(i)` the indicator of pairs containing `i`), and the
//! orthogonal complement of both.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairspace::{binom, check_n, num_pairs, pairs, PairIndex, PairVector};

/// Largest `n` for which a dense `C(n,2) x C(n,2)` matrix is built.
pub const MAX_DENSE_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEllipsoid {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// The three eigenvalues of the form matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Spectrum {
    pub fn values(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }

    /// `(1, n-1, C(n,2)-n)`.
    pub fn multiplicities(&self) -> [usize; 3] {
        multiplicities(self.n)
    }

    /// Fails unless every eigenvalue with nonzero multiplicity is positive.
    pub fn check_positive(&self) -> Result<()> {
        let ok = self
            .values()
            .iter()
            .zip(self.multiplicities())
            .all(|(&l, m)| m == 0 || l > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::SingularSpectrum(self.values()))
        }
    }
}

pub fn multiplicities(n: usize) -> [usize; 3] {
    [1, n - 1, num_pairs(n) - n]
}

/// Norms of the projections onto the three eigenspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParts {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

/// The three orthogonal components of a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralComponents {
    pub ones: PairVector,
    pub degree: PairVector,
    pub rest: PairVector,
}

impl SpectralComponents {
    pub fn parts(&self) -> SpectralParts {
        SpectralParts {
            p1: self.ones.norm(),
            p2: self.degree.norm(),
            p3: self.rest.norm(),
        }
    }
}

/// Splits `x` into its all-ones, degree-space and remaining components.
pub fn spectral_components(x: &PairVector) -> SpectralComponents {
    let n = x.n();
    let total = x.sum();
    let mean = total / num_pairs(n) as f64;
    let s = x.degrees();
    // y_ij = a_i + a_j with sum(a) = 0 is the degree-space projection
    let nf = n as f64;
    let a: Vec<f64> = s
        .iter()
        .map(|si| (si - 2.0 * total / nf) / (nf - 2.0))
        .collect();
    let ones = PairVector::constant(n, mean);
    let degree = PairVector::from_fn(n, |i, j| a[i - 1] + a[j - 1]);
    let mut rest = x.clone();
    for k in 0..rest.len() {
        rest[k] -= mean + degree[k];
    }
    SpectralComponents { ones, degree, rest }
}

pub fn spectral_project(x: &PairVector) -> SpectralParts {
    spectral_components(x).parts()
}

/// `t = -e_12 - e_23 + e_13`: the normal of `x_13 <= x_12 + x_23`.
pub fn triangle_normal(n: usize) -> PairVector {
    let mut t = PairVector::zeros(n);
    t.set(1, 2, -1.0);
    t.set(2, 3, -1.0);
    t.set(1, 3, 1.0);
    t
}

impl SymEllipsoid {
    pub fn new(n: usize, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            n,
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn dim(&self) -> usize {
        num_pairs(self.n)
    }

    pub fn spectrum(&self) -> Spectrum {
        let n = self.n as f64;
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        Spectrum {
            n: self.n,
            lambda1: a + 2.0 * (n - 2.0) * b + binom(self.n - 2, 2) * g,
            lambda2: a + (n - 4.0) * b - (n - 3.0) * g,
            lambda3: a - 2.0 * b + g,
        }
    }

    /// Same center, form matrix scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            alpha: self.alpha * factor,
            beta: self.beta * factor,
            gamma: self.gamma * factor,
            ..*self
        }
    }

    pub fn center(&self) -> PairVector {
        PairVector::constant(self.n, self.delta)
    }

    /// `A x` in `O(n^2)`.
    pub fn matvec(&self, x: &PairVector) -> Result<PairVector> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let s = x.degrees();
        let total = x.sum();
        let diag = self.alpha - 2.0 * self.beta + self.gamma;
        let share = self.beta - self.gamma;
        let xs = x.as_slice();
        let entries = pairs(self.n)
            .zip(xs)
            .map(|((i, j), &v)| diag * v + share * (s[i - 1] + s[j - 1]) + self.gamma * total)
            .collect();
        PairVector::from_entries(self.n, entries)
    }

    /// `‖A^{-1} x‖`.
    pub fn inv_norm(&self, x: &PairVector) -> Result<f64> {
        let spec = self.spectrum();
        spec.check_positive()?;
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let p = spectral_project(x);
        let mut acc = (p.p1 / spec.lambda1).powi(2) + (p.p2 / spec.lambda2).powi(2);
        if self.n > 3 {
            acc += (p.p3 / spec.lambda3).powi(2);
        }
        Ok(acc.sqrt())
    }

    /// `‖A t‖²` for the triangle normal `t`.
    pub fn triangle_norm_sq(&self) -> f64 {
        let n = self.n as f64;
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        3.0 * a * a - 4.0 * a * b + 4.0 * (n - 2.0) * b * b - 4.0 * (n - 3.0) * b * g
            + (num_pairs(self.n) as f64 - 3.0) * g * g
    }

    /// `‖A e_12‖²`, the squared norm of one column.
    pub fn bound_norm_sq(&self) -> f64 {
        let n = self.n as f64;
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        a * a + 2.0 * (n - 2.0) * b * b + binom(self.n - 2, 2) * g * g
    }

    /// Dense form matrix in flat-index order.
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        if self.n > MAX_DENSE_N {
            return Err(Error::TooLarge {
                n: self.n,
                limit: MAX_DENSE_N,
                what: "dense materialization",
            });
        }
        let idx: Vec<PairIndex> = (0..self.dim())
            .map(|k| PairIndex::from_flat(self.n, k).expect("in range"))
            .collect();
        Ok(DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            match idx[r].overlap(&idx[c]) {
                2 => self.alpha,
                1 => self.beta,
                _ => self.gamma,
            }
        }))
    }

    pub fn to_json(&self) -> SymEllipsoidJson {
        let s = self.spectrum();
        SymEllipsoidJson {
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
            lambda: s.values(),
        }
    }
}

/// Wire form: `{"n", "alpha", "beta", "gamma", "delta", "lambda": [l1, l2, l3]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymEllipsoidJson {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lambda: [f64; 3],
}

impl SymEllipsoidJson {
    pub fn to_ellipsoid(&self) -> Result<SymEllipsoid> {
        SymEllipsoid::new(self.n, self.alpha, self.beta, self.gamma, self.delta)
    }
}
