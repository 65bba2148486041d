//! Coordinates indexed by unordered vertex pairs.
//!
//! A point of R^{C(n,2)} is stored densely. Vertices are 1-based at the API
//! boundary; the flat index is 0-based and follows the lexicographic order of
//! `(i, j)` with `i < j`: `12, 13, ..., 1n, 23, ..., (n-1)n`.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(n, 2)`.
pub const fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidN {
            n,
            reason: "need at least 3 vertices",
        });
    }
    Ok(())
}

/// Flat index of the lexicographic pair `(i, j)`, `i < j`, no bounds checks.
#[inline]
pub(crate) fn flat_unchecked(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j <= n);
    (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
}

/// Flat index of the unordered pair `{i, j}`; symmetric in its arguments.
pub fn flatten(n: usize, i: usize, j: usize) -> Result<usize> {
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidPair { n, i, j });
    }
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    Ok(flat_unchecked(n, lo, hi))
}

/// Inverse of [`flatten`]: returns `(i, j)` with `i < j`.
pub fn unflatten(n: usize, flat: usize) -> Result<(usize, usize)> {
    if flat >= num_pairs(n) {
        return Err(Error::InvalidArgument(format!(
            "flat index {flat} out of range for n = {n}"
        )));
    }
    let mut rest = flat;
    for i in 1..n {
        let row = n - i;
        if rest < row {
            return Ok((i, i + 1 + rest));
        }
        rest -= row;
    }
    unreachable!("flat index already range-checked")
}

/// Iterator over all pairs `(i, j)`, `i < j`, in flat order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
}

/// A validated pair together with its flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairIndex {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub flat: usize,
}

impl PairIndex {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self> {
        let flat = flatten(n, i, j)?;
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Ok(Self { n, i, j, flat })
    }

    pub fn from_flat(n: usize, flat: usize) -> Result<Self> {
        let (i, j) = unflatten(n, flat)?;
        Ok(Self { n, i, j, flat })
    }

    /// Number of vertices shared with another pair (0, 1 or 2).
    pub fn overlap(&self, other: &PairIndex) -> usize {
        [self.i, self.j]
            .iter()
            .filter(|v| **v == other.i || **v == other.j)
            .count()
    }
}

/// A point of R^{C(n,2)}: a symmetric zero-diagonal matrix stored by pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVector {
    n: usize,
    entries: Vec<f64>,
}

impl PairVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; num_pairs(n)],
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            n,
            entries: vec![value; num_pairs(n)],
        }
    }

    /// Unit vector `e_ij`.
    pub fn unit(n: usize, i: usize, j: usize) -> Result<Self> {
        let mut v = Self::zeros(n);
        v.entries[flatten(n, i, j)?] = 1.0;
        Ok(v)
    }

    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != num_pairs(n) {
            return Err(Error::DimensionMismatch {
                expected: num_pairs(n),
                actual: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    /// Builds a vector from a function of the (1-based) pair.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self {
            n,
            entries: pairs(n).map(|(i, j)| f(i, j)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// Entry `d_ij`; panics on an invalid pair.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[flatten(self.n, i, j).expect("valid pair")]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = flatten(self.n, i, j).expect("valid pair");
        self.entries[k] = value;
    }

    pub fn dot(&self, other: &PairVector) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Vertex degrees `s_i = sum_{j != i} x_ij`, 0-based by vertex.
    pub fn degrees(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for ((i, j), x) in pairs(self.n).zip(&self.entries) {
            s[i - 1] += x;
            s[j - 1] += x;
        }
        s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &PairVector) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    /// `self - c * 1`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x - c).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &PairVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for PairVector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.entries[k]
    }
}

impl IndexMut<usize> for PairVector {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.entries[k]
    }
}

/// A permutation of the vertex set `1..=n`.
///
/// Stored as the image list `sigma[v - 1] = σ(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (1..=n).collect(),
        }
    }

    /// From the 1-based image list `[σ(1), ..., σ(n)]`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation { n });
            }
            seen[v - 1] = true;
        }
        Ok(Self { images })
    }

    /// The transposition swapping `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        let mut images: Vec<usize> = (1..=n).collect();
        if a == 0 || b == 0 || a > n || b > n {
            return Err(Error::InvalidPermutation { n });
        }
        images.swap(a - 1, b - 1);
        Ok(Self { images })
    }

    /// Uniformly random permutation.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut images: Vec<usize> = (1..=n).collect();
        images.shuffle(rng);
        Self { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// `σ(v)`.
    pub fn apply_vertex(&self, v: usize) -> usize {
        self.images[v - 1]
    }

    /// `self ∘ other`, i.e. `v ↦ self(other(v))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&v| self.images[v - 1]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v - 1] = k + 1;
        }
        Permutation { images }
    }

    /// For every flat index `ij`, the flat index of `σ(i)σ(j)`.
    pub fn pair_map(&self) -> Vec<usize> {
        let n = self.n();
        pairs(n)
            .map(|(i, j)| {
                flatten(n, self.images[i - 1], self.images[j - 1]).expect("permutation is valid")
            })
            .collect()
    }
}

/// The vertex relabelling action by pull-back: `[σ(x)]_ij = x_{σ(i)σ(j)}`.
///
/// Under this convention `apply(σ, apply(τ, x)) = apply(τ ∘ σ, x)`.
pub fn apply_permutation(sigma: &Permutation, x: &PairVector) -> Result<PairVector> {
    if sigma.n() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            actual: sigma.n(),
        });
    }
    let map = sigma.pair_map();
    Ok(PairVector {
        n: x.n,
        entries: map.iter().map(|&k| x.entries[k]).collect(),
    })
}
