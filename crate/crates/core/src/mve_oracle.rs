//! Generic maximum-volume inscribed ellipsoid of a bounded polytope.
//!
//! Solves
//!
//! ```text
//! maximize   log det A
//! subject to ‖A a_i‖ <= b_i - a_i . c   for every row i,   A ≻ 0
//! ```
//!
//! over all symmetric `A` and centers `c`, with a log-barrier path-following
//! method. Nothing here knows about the vertex-relabelling symmetry of the
//! metric polytope; this is the independent check of the reduced program.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_polytope::Halfspaces;
use crate::pairspace::{check_n, num_pairs, PairIndex};
use crate::sym_ellipsoid::SymEllipsoid;

/// Largest ambient dimension accepted by the oracle.
pub const MAX_ORACLE_DIM: usize = 15;

const MAX_NEWTON_PER_STAGE: usize = 200;
const PHASE1_FINAL_T: f64 = 1e4;
const QUADRATIC_REGION: f64 = 0.05;
const MAX_POLISH: usize = 50;

/// An ellipsoid `A B + c` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralEllipsoid {
    pub a: DMatrix<f64>,
    pub c: DVector<f64>,
}

impl GeneralEllipsoid {
    pub fn new(a: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                actual: c.len(),
            });
        }
        Ok(Self { a, c })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// `log det A`; `None` unless `A` is positive definite.
    pub fn log_det(&self) -> Option<f64> {
        let ch = self.a.clone().cholesky()?;
        Some(2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// `b_i - a_i . c - ‖A a_i‖` for every row.
    pub fn containment_slacks(&self, hs: &Halfspaces) -> Vec<f64> {
        hs.rows
            .iter()
            .map(|(row, b)| {
                let a = DVector::from_column_slice(row);
                b - a.dot(&self.c) - (&self.a * &a).norm()
            })
            .collect()
    }

    /// Shrinks `A` about the same center until the ellipsoid fits in `hs`.
    /// `None` if the center itself is outside.
    pub fn shrink_to_fit(&self, hs: &Halfspaces) -> Option<GeneralEllipsoid> {
        let mut theta: f64 = 1.0;
        for (row, b) in &hs.rows {
            let a = DVector::from_column_slice(row);
            let r = b - a.dot(&self.c);
            if r <= 0.0 {
                return None;
            }
            let w = (&self.a * &a).norm();
            if w > r {
                theta = theta.min(r / w);
            }
        }
        Some(GeneralEllipsoid {
            a: &self.a * theta,
            c: self.c.clone(),
        })
    }

    pub fn to_json(&self) -> GeneralEllipsoidJson {
        let d = self.dim();
        GeneralEllipsoidJson {
            dim: d,
            a: (0..d)
                .flat_map(|r| (0..d).map(move |c| (r, c)))
                .map(|(r, c)| self.a[(r, c)])
                .collect(),
            c: self.c.iter().copied().collect(),
        }
    }
}

/// Wire form: `A` row-major in flat-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralEllipsoidJson {
    pub dim: usize,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

impl GeneralEllipsoidJson {
    pub fn to_ellipsoid(&self) -> Result<GeneralEllipsoid> {
        if self.a.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim * self.dim,
                actual: self.a.len(),
            });
        }
        GeneralEllipsoid::new(
            DMatrix::from_row_slice(self.dim, self.dim, &self.a),
            DVector::from_column_slice(&self.c),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub ellipsoid: GeneralEllipsoid,
    pub log_det: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

impl OracleResult {
    pub fn to_json(&self) -> OracleResultJson {
        OracleResultJson {
            ellipsoid: self.ellipsoid.to_json(),
            log_det: self.log_det,
            iterations: self.iterations,
            kkt_residual: self.kkt_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResultJson {
    #[serde(flatten)]
    pub ellipsoid: GeneralEllipsoidJson,
    pub log_det: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Strictly feasible starting ellipsoid `eps * I + center`.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleStart {
    /// Find a center by a Chebyshev-center phase and size the ball from it.
    Auto,
    Explicit {
        center: Vec<f64>,
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Target bound on the duality gap in `log det`.
    pub tol: f64,
    pub max_stages: usize,
    pub start: OracleStart,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_stages: 500,
            start: OracleStart::Auto,
        }
    }
}

impl OracleOptions {
    /// The start used for `M_n`: the ball of radius 0.05 about `0.6·1`.
    pub fn for_metric_polytope(n: usize) -> Self {
        Self {
            start: OracleStart::Explicit {
                center: vec![0.6; num_pairs(n)],
                radius: 0.05,
            },
            ..Self::default()
        }
    }
}

/// Upper-triangular parametrization of symmetric matrices.
struct SymBasis {
    dim: usize,
    /// `(row, col)`, `row <= col`.
    entries: Vec<(usize, usize)>,
}

impl SymBasis {
    fn new(dim: usize) -> Self {
        let entries = (0..dim)
            .flat_map(|r| (r..dim).map(move |c| (r, c)))
            .collect();
        Self { dim, entries }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn unpack(&self, z: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for (k, &(r, c)) in self.entries.iter().enumerate() {
            a[(r, c)] = z[k];
            a[(c, r)] = z[k];
        }
        let c = z.rows(self.len(), self.dim).into_owned();
        (a, c)
    }

    fn pack(&self, a: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(self.len() + self.dim);
        for (k, &(r, col)) in self.entries.iter().enumerate() {
            z[k] = a[(r, col)];
        }
        z.rows_mut(self.len(), self.dim).copy_from(c);
        z
    }

    /// Nonzero `(a, b)` positions of the basis matrix `E_k = Σ e_a e_bᵀ`.
    fn parts(&self, k: usize) -> Vec<(usize, usize)> {
        let (r, c) = self.entries[k];
        if r == c {
            vec![(r, r)]
        } else {
            vec![(r, c), (c, r)]
        }
    }
}

struct Barrier<'a> {
    hs: &'a Halfspaces,
    basis: SymBasis,
    rows: Vec<DVector<f64>>,
}

struct Eval {
    value: f64,
    a_inv: DMatrix<f64>,
    w: Vec<DVector<f64>>,
    r: Vec<f64>,
    s: Vec<f64>,
}

impl<'a> Barrier<'a> {
    fn new(hs: &'a Halfspaces) -> Self {
        Self {
            hs,
            basis: SymBasis::new(hs.dim),
            rows: hs
                .rows
                .iter()
                .map(|(a, _)| DVector::from_column_slice(a))
                .collect(),
        }
    }

    /// Evaluates at `z`; `None` only if `A` is not positive definite.
    fn eval_raw(&self, z: &DVector<f64>, t: f64) -> Option<Eval> {
        let (a, c) = self.basis.unpack(z);
        let ch = a.clone().cholesky()?;
        let log_det = 2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let mut value = t * log_det;
        let mut ws = Vec::with_capacity(self.rows.len());
        let mut rs = Vec::with_capacity(self.rows.len());
        let mut ss = Vec::with_capacity(self.rows.len());
        for (row, (_, b)) in self.rows.iter().zip(&self.hs.rows) {
            let r = b - row.dot(&c);
            let w = &a * row;
            let s = r * r - w.norm_squared();
            value += s.ln();
            ws.push(w);
            rs.push(r);
            ss.push(s);
        }
        Some(Eval {
            value,
            a_inv: ch.inverse(),
            w: ws,
            r: rs,
            s: ss,
        })
    }

    /// Evaluates at a strictly feasible `z`.
    fn eval(&self, z: &DVector<f64>, t: f64) -> Option<Eval> {
        let ev = self.eval_raw(z, t)?;
        let strict = ev.r.iter().zip(&ev.s).all(|(r, s)| *r > 0.0 && *s > 0.0);
        strict.then_some(ev)
    }

    fn log_det(&self, z: &DVector<f64>) -> f64 {
        let (a, _) = self.basis.unpack(z);
        let ch = a.cholesky().expect("iterate stays positive definite");
        2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Gradient of `log det A` and, per row, the gradient of `s_i`.
    fn gradients(&self, ev: &Eval) -> (DVector<f64>, Vec<DVector<f64>>, Vec<DMatrix<f64>>) {
        let p = self.basis.len();
        let d = self.hs.dim;
        let b = &ev.a_inv;
        let mut g_logdet = DVector::zeros(p + d);
        for k in 0..p {
            let (r, c) = self.basis.entries[k];
            g_logdet[k] = if r == c { b[(r, r)] } else { 2.0 * b[(r, c)] };
        }
        let mut grads = Vec::with_capacity(self.rows.len());
        let mut jacs = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            // column k of J is E_k a
            let mut jac = DMatrix::zeros(d, p);
            for (k, &(r, c)) in self.basis.entries.iter().enumerate() {
                if r == c {
                    jac[(r, k)] = row[r];
                } else {
                    jac[(r, k)] = row[c];
                    jac[(c, k)] = row[r];
                }
            }
            let mut g = DVector::zeros(p + d);
            g.rows_mut(0, p)
                .copy_from(&(jac.transpose() * &ev.w[i] * -2.0));
            g.rows_mut(p, d).copy_from(&(row * (-2.0 * ev.r[i])));
            grads.push(g);
            jacs.push(jac);
        }
        (g_logdet, grads, jacs)
    }

    /// Hessian of `log det A`, padded with zeros on the center block.
    fn log_det_hessian(&self, ev: &Eval) -> DMatrix<f64> {
        let p = self.basis.len();
        let d = self.hs.dim;
        let b = &ev.a_inv;
        let mut h = DMatrix::zeros(p + d, p + d);
        // -tr(B E_k B E_l), with tr(B e_a e_bᵀ B e_c e_dᵀ) = B_bc B_da
        for k in 0..p {
            let pk = self.basis.parts(k);
            for l in k..p {
                let mut acc = 0.0;
                for &(ka, kb) in &pk {
                    for (lc, ld) in self.basis.parts(l) {
                        acc += b[(kb, lc)] * b[(ld, ka)];
                    }
                }
                h[(k, l)] = -acc;
                h[(l, k)] = -acc;
            }
        }
        h
    }

    /// Hessian of `s_i`: `-2 JᵀJ` on the matrix block, `2 a aᵀ` on the center block.
    fn slack_hessian(&self, row: &DVector<f64>, jac: &DMatrix<f64>) -> DMatrix<f64> {
        let p = self.basis.len();
        let d = self.hs.dim;
        let mut h = DMatrix::zeros(p + d, p + d);
        h.view_mut((0, 0), (p, p))
            .copy_from(&(jac.transpose() * jac * -2.0));
        h.view_mut((p, p), (d, d))
            .copy_from(&(row * row.transpose() * 2.0));
        h
    }

    fn derivatives(&self, ev: &Eval, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let (g_logdet, grads, jacs) = self.gradients(ev);
        let mut g = g_logdet * t;
        let mut h = self.log_det_hessian(ev) * t;
        for (i, row) in self.rows.iter().enumerate() {
            let s = ev.s[i];
            let gi = &grads[i];
            g += gi / s;
            h += self.slack_hessian(row, &jacs[i]) / s;
            h -= gi * gi.transpose() / (s * s);
        }
        (g, h)
    }

    /// `‖∇ log det + Σ y_i ∇s_i‖∞` with `y_i = 1 / (t s_i)`.
    fn stationarity(&self, ev: &Eval, t: f64) -> f64 {
        let (g_logdet, grads, _) = self.gradients(ev);
        let mut g = g_logdet;
        for (gi, s) in grads.iter().zip(&ev.s) {
            g += gi / (t * s);
        }
        g.amax()
    }
}

fn newton_step(g: &DVector<f64>, h: &DMatrix<f64>) -> Option<DVector<f64>> {
    let neg = -h;
    neg.cholesky().map(|ch| ch.solve(g))
}

fn center(barrier: &Barrier, z: &mut DVector<f64>, t: f64) -> Result<usize> {
    let mut prev_dec = f64::INFINITY;
    for it in 0..MAX_NEWTON_PER_STAGE {
        let ev = barrier.eval(z, t).ok_or(Error::Infeasible)?;
        let (g, h) = barrier.derivatives(&ev, t);
        let step = newton_step(&g, &h).ok_or(Error::Unbounded)?;
        let dec = g.dot(&step);
        if dec <= 1e-24 {
            return Ok(it);
        }
        if dec < QUADRATIC_REGION {
            // pure Newton: barrier values are too large to compare reliably
            if dec >= prev_dec {
                return Ok(it);
            }
            prev_dec = dec;
            let mut s = 1.0;
            loop {
                let trial = &*z + &step * s;
                if barrier.eval(&trial, t).is_some() {
                    *z = trial;
                    break;
                }
                s *= 0.5;
                if s < 1e-20 {
                    return Ok(it);
                }
            }
            continue;
        }
        let mut s = 1.0;
        let mut accepted = false;
        while s > 1e-20 {
            let trial = &*z + &step * s;
            if let Some(e) = barrier.eval(&trial, t) {
                if e.value >= ev.value + 0.25 * s * dec {
                    *z = trial;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::NotConverged {
                iterations: it,
                residual: dec,
                last: z.iter().copied().collect(),
            });
        }
        if z.amax() > 1e10 {
            return Err(Error::Unbounded);
        }
    }
    Ok(MAX_NEWTON_PER_STAGE)
}

/// Approximate Chebyshev center: maximizes `r` with `a_i . x + r ‖a_i‖ <= b_i`.
fn chebyshev_center(hs: &Halfspaces) -> Result<(DVector<f64>, f64)> {
    let d = hs.dim;
    let rows: Vec<(DVector<f64>, f64, f64)> = hs
        .rows
        .iter()
        .map(|(a, b)| {
            let a = DVector::from_column_slice(a);
            let norm = a.norm();
            (a, *b, norm)
        })
        .collect();
    let slack = |z: &DVector<f64>| -> Option<Vec<f64>> {
        let x = z.rows(0, d);
        let r = z[d];
        let s: Vec<f64> = rows
            .iter()
            .map(|(a, b, nrm)| b - a.dot(&x) - r * nrm)
            .collect();
        s.iter().all(|v| *v > 0.0).then_some(s)
    };
    let mut z = DVector::zeros(d + 1);
    z[d] = rows
        .iter()
        .map(|(_, b, nrm)| b / nrm)
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let value = |z: &DVector<f64>, t: f64| -> Option<f64> {
        slack(z).map(|s| t * z[d] + s.iter().map(|v| v.ln()).sum::<f64>())
    };
    let mut t = 1.0;
    while t <= PHASE1_FINAL_T {
        for _ in 0..MAX_NEWTON_PER_STAGE {
            let s = slack(&z).ok_or(Error::Infeasible)?;
            let mut g = DVector::zeros(d + 1);
            g[d] = t;
            let mut h = DMatrix::zeros(d + 1, d + 1);
            for ((a, _, nrm), si) in rows.iter().zip(&s) {
                let mut ext = DVector::zeros(d + 1);
                ext.rows_mut(0, d).copy_from(a);
                ext[d] = *nrm;
                g -= &ext / *si;
                h -= &ext * ext.transpose() / (si * si);
            }
            let step = newton_step(&g, &h).ok_or(Error::Unbounded)?;
            let dec = g.dot(&step);
            if dec <= 1e-12 {
                break;
            }
            let f0 = value(&z, t).ok_or(Error::Infeasible)?;
            let mut alpha = 1.0;
            loop {
                let trial = &z + &step * alpha;
                if let Some(f1) = value(&trial, t) {
                    if f1 >= f0 + 0.25 * alpha * dec {
                        z = trial;
                        break;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    return Err(Error::Infeasible);
                }
            }
            if z[d] > 1e8 {
                return Err(Error::Unbounded);
            }
        }
        t *= 10.0;
    }
    if z[d] <= 1e-9 {
        return Err(Error::Infeasible);
    }
    Ok((z.rows(0, d).into_owned(), z[d]))
}

/// Maximum-volume ellipsoid inscribed in `{x : a_i . x <= b_i}`.
pub fn solve_mve(hs: &Halfspaces, opts: &OracleOptions) -> Result<OracleResult> {
    let d = hs.dim;
    if d == 0 || d > MAX_ORACLE_DIM {
        return Err(Error::TooLarge {
            n: d,
            limit: MAX_ORACLE_DIM,
            what: "oracle dimension",
        });
    }
    if hs.rows.iter().any(|(a, _)| a.iter().all(|v| *v == 0.0)) {
        return Err(Error::InvalidArgument("constraint with zero normal".into()));
    }
    let (center, radius) = match &opts.start {
        OracleStart::Explicit { center, radius } => {
            if center.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: center.len(),
                });
            }
            (DVector::from_column_slice(center), *radius)
        }
        OracleStart::Auto => {
            let (x, r) = chebyshev_center(hs)?;
            (x, 0.5 * r)
        }
    };
    let barrier = Barrier::new(hs);
    let mut z = barrier
        .basis
        .pack(&(DMatrix::identity(d, d) * radius), &center);
    if barrier.eval(&z, 1.0).is_none() {
        return Err(Error::Infeasible);
    }

    let m = hs.rows.len() as f64;
    let mut t = 1.0;
    let mut iterations = 0;
    let mut stages = 0;
    loop {
        iterations += center_stage(&barrier, &mut z, t, iterations)?;
        stages += 1;
        if 2.0 * m / t <= opts.tol {
            break;
        }
        if stages >= opts.max_stages {
            return Err(Error::NotConverged {
                iterations,
                residual: 2.0 * m / t,
                last: z.iter().copied().collect(),
            });
        }
        t *= 10.0;
    }
    let ev = barrier.eval(&z, t).ok_or(Error::Infeasible)?;
    let mut kkt_residual = barrier.stationarity(&ev, t).max(1.0 / t);
    if let Some((zp, res)) = polish(&barrier, &z, t) {
        if res < kkt_residual {
            z = zp;
            kkt_residual = res;
        }
    }
    let (a, c) = barrier.basis.unpack(&z);
    Ok(OracleResult {
        log_det: barrier.log_det(&z),
        ellipsoid: GeneralEllipsoid { a, c },
        iterations,
        kkt_residual,
    })
}

/// Newton on the KKT system restricted to the constraints with visible
/// barrier multipliers. Returns the improved point and its residual, or
/// `None` when the system is singular or the iterate leaves the domain.
fn polish(barrier: &Barrier, z0: &DVector<f64>, t: f64) -> Option<(DVector<f64>, f64)> {
    let ev = barrier.eval(z0, t)?;
    let y0: Vec<f64> = ev.s.iter().map(|s| 1.0 / (t * s)).collect();
    let ymax = y0.iter().copied().fold(0.0, f64::max);
    let active: Vec<usize> = (0..y0.len()).filter(|&i| y0[i] >= 1e-4 * ymax).collect();
    let nz = z0.len();
    let k = active.len();
    let mut z = z0.clone();
    let mut y = DVector::from_iterator(k, active.iter().map(|&i| y0[i]));
    let mut best: Option<(DVector<f64>, f64)> = None;
    for _ in 0..MAX_POLISH {
        let ev = barrier.eval_raw(&z, t)?;
        let inactive_ok = (0..ev.s.len())
            .filter(|i| !active.contains(i))
            .all(|i| ev.s[i] > 0.0 && ev.r[i] > 0.0);
        if !inactive_ok || y.iter().any(|v| *v < 0.0) {
            break;
        }
        let (g_logdet, grads, jacs) = barrier.gradients(&ev);
        let mut f = DVector::zeros(nz + k);
        let mut stat = g_logdet;
        let mut jac = DMatrix::zeros(nz + k, nz + k);
        let mut h = barrier.log_det_hessian(&ev);
        for (col, &i) in active.iter().enumerate() {
            stat += &grads[i] * y[col];
            h += barrier.slack_hessian(&barrier.rows[i], &jacs[i]) * y[col];
            f[nz + col] = ev.s[i];
            jac.view_mut((0, nz + col), (nz, 1)).copy_from(&grads[i]);
            jac.view_mut((nz + col, 0), (1, nz))
                .copy_from(&grads[i].transpose());
        }
        f.rows_mut(0, nz).copy_from(&stat);
        jac.view_mut((0, 0), (nz, nz)).copy_from(&h);
        let residual = f.amax();
        match &best {
            Some((_, r)) if residual >= *r => break,
            _ => best = Some((z.clone(), residual)),
        }
        if residual <= 1e-15 {
            break;
        }
        let step = jac.lu().solve(&f)?;
        z -= step.rows(0, nz);
        y -= step.rows(nz, k);
    }
    best
}

fn center_stage(barrier: &Barrier, z: &mut DVector<f64>, t: f64, done: usize) -> Result<usize> {
    center(barrier, z, t).map_err(|e| match e {
        Error::NotConverged {
            iterations,
            residual,
            last,
        } => Error::NotConverged {
            iterations: done + iterations,
            residual,
            last,
        },
        other => other,
    })
}

/// Spread (max - min) of the form-matrix entries within each intersection
/// class `[equal, share one vertex, disjoint]`, and of the center entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSpread {
    pub classes: [f64; 3],
    pub center: f64,
}

impl PatternSpread {
    pub fn max(&self) -> f64 {
        self.classes.iter().copied().fold(self.center, f64::max)
    }
}

fn check_pair_dim(e: &GeneralEllipsoid, n: usize) -> Result<Vec<PairIndex>> {
    check_n(n)?;
    if e.dim() != num_pairs(n) {
        return Err(Error::DimensionMismatch {
            expected: num_pairs(n),
            actual: e.dim(),
        });
    }
    Ok((0..e.dim())
        .map(|k| PairIndex::from_flat(n, k).expect("in range"))
        .collect())
}

fn class_of(idx: &[PairIndex], r: usize, c: usize) -> usize {
    match idx[r].overlap(&idx[c]) {
        2 => 0,
        1 => 1,
        _ => 2,
    }
}

/// Averages a pair-indexed ellipsoid over the vertex-relabelling group.
pub fn symmetry_average(e: &GeneralEllipsoid, n: usize) -> Result<SymEllipsoid> {
    let idx = check_pair_dim(e, n)?;
    let mut sums = [0.0; 3];
    let mut counts = [0usize; 3];
    for r in 0..e.dim() {
        for c in 0..e.dim() {
            let k = class_of(&idx, r, c);
            sums[k] += e.a[(r, c)];
            counts[k] += 1;
        }
    }
    let mean = |k: usize| {
        if counts[k] == 0 {
            0.0
        } else {
            sums[k] / counts[k] as f64
        }
    };
    SymEllipsoid::new(n, mean(0), mean(1), mean(2), e.c.mean())
}

pub fn pattern_spread(e: &GeneralEllipsoid, n: usize) -> Result<PatternSpread> {
    let idx = check_pair_dim(e, n)?;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for r in 0..e.dim() {
        for c in 0..e.dim() {
            let k = class_of(&idx, r, c);
            lo[k] = lo[k].min(e.a[(r, c)]);
            hi[k] = hi[k].max(e.a[(r, c)]);
        }
    }
    let spread = |k: usize| if hi[k] >= lo[k] { hi[k] - lo[k] } else { 0.0 };
    Ok(PatternSpread {
        classes: [spread(0), spread(1), spread(2)],
        center: e.c.max() - e.c.min(),
    })
}
