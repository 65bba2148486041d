//! The symmetry-reduced program for the maximum-volume inscribed ellipsoid.
//!
//! Over the invariant family `(α, β, γ, δ)` the problem becomes
//!
//! ```text
//! maximize   log λ1 + (n-1) log λ2 + (C(n,2)-n) log λ3
//! subject to ‖A t‖    <= δ        (triangle facets)
//!            ‖A e_12‖ <= 1 - δ    (diameter bounds)
//!            λ1, λ2, λ3 > 0,  0 < δ < 1
//! ```
//!
//! It is solved with a log-barrier path-following scheme (damped Newton steps,
//! backtracking line search) followed by a Newton refinement of the KKT system
//! with both constraints held active. Internally the objective is divided by
//! `C(n,2)` and the variables are scaled to `(α, nβ, n²γ, δ)`, which keeps
//! the Newton systems well conditioned for large `n`.

use nalgebra::{Matrix4, Matrix6, Vector4, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairspace::{binom, check_n, num_pairs};
use crate::sym_ellipsoid::{SymEllipsoid, SymEllipsoidJson};

pub const DEFAULT_TOL_KKT: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Slack below which a constraint counts as active.
pub const ACTIVE_SLACK: f64 = 1e-8;

/// Starting point `(α, β, γ, δ)`: a centered ball, strictly feasible for all n.
const START: [f64; 4] = [0.2, 0.0, 0.0, 0.5];
/// Barrier parameter of the two cone barriers (2 each) plus three eigenvalue logs.
const BARRIER_WEIGHT: f64 = 7.0;
/// Duality-gap bound at which path following hands over to the KKT refinement.
const HANDOVER_GAP: f64 = 1e-9;
const MAX_NEWTON_PER_STAGE: usize = 200;
const MAX_POLISH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol_kkt: f64,
    /// Cap on barrier stages.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_kkt: DEFAULT_TOL_KKT,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-6).contains(&self.tol_kkt) {
            return Err(Error::InvalidArgument(format!(
                "tol_kkt = {:e} outside [1e-14, 1e-6]",
                self.tol_kkt
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// The reduced program for a fixed `n`, over `x = (α, β, γ, δ)`.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    n: usize,
    /// Eigenvalue multiplicities divided by `C(n,2)`.
    weights: [f64; 3],
    /// `λ_k = rows[k] . x`.
    rows: [Vector4<f64>; 3],
    /// `‖A t‖² = xᵀ p_tri x`.
    p_tri: Matrix4<f64>,
    /// `‖A e_12‖² = xᵀ p_bound x`.
    p_bound: Matrix4<f64>,
    /// Variable scaling to `(α, nβ, n²γ, δ)`.
    scale: Vector4<f64>,
}

impl ReducedProblem {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let nf = n as f64;
        let big_n = num_pairs(n) as f64;
        let c2 = binom(n - 2, 2);
        let weights = [1.0 / big_n, (nf - 1.0) / big_n, (big_n - nf) / big_n];
        let rows = [
            Vector4::new(1.0, 2.0 * (nf - 2.0), c2, 0.0),
            Vector4::new(1.0, nf - 4.0, -(nf - 3.0), 0.0),
            Vector4::new(1.0, -2.0, 1.0, 0.0),
        ];
        #[rustfmt::skip]
        let p_tri = Matrix4::new(
            3.0, -2.0, 0.0, 0.0,
            -2.0, 4.0 * (nf - 2.0), -2.0 * (nf - 3.0), 0.0,
            0.0, -2.0 * (nf - 3.0), big_n - 3.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
        );
        let p_bound = Matrix4::from_diagonal(&Vector4::new(1.0, 2.0 * (nf - 2.0), c2, 0.0));
        Ok(Self {
            n,
            weights,
            rows,
            p_tri,
            p_bound,
            scale: Vector4::new(1.0, 1.0 / nf, 1.0 / (nf * nf), 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// For `n = 3` there are no disjoint pairs and `γ` does not enter.
    fn gamma_inert(&self) -> bool {
        self.n == 3
    }

    /// Indices of the eigenvalues with a nonzero eigenspace.
    fn eigenspaces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(|&k| self.weights[k] > 0.0)
    }

    pub fn lambdas(&self, x: &Vector4<f64>) -> [f64; 3] {
        [
            self.rows[0].dot(x),
            self.rows[1].dot(x),
            self.rows[2].dot(x),
        ]
    }

    /// `log det A = Σ mult_k log λ_k`; `-inf` outside the positive region.
    pub fn objective(&self, x: &Vector4<f64>) -> f64 {
        self.normalized_objective(x) * num_pairs(self.n) as f64
    }

    pub fn normalized_objective(&self, x: &Vector4<f64>) -> f64 {
        let l = self.lambdas(x);
        let mut acc = 0.0;
        for k in self.eigenspaces() {
            if l[k] <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += self.weights[k] * l[k].ln();
        }
        acc
    }

    pub fn objective_gradient(&self, x: &Vector4<f64>) -> Vector4<f64> {
        let l = self.lambdas(x);
        let mut g = Vector4::zeros();
        for k in self.eigenspaces() {
            g += self.rows[k] * (self.weights[k] / l[k]);
        }
        g
    }

    pub fn objective_hessian(&self, x: &Vector4<f64>) -> Matrix4<f64> {
        let l = self.lambdas(x);
        let mut h = Matrix4::zeros();
        for k in self.eigenspaces() {
            h -= self.rows[k] * self.rows[k].transpose() * (self.weights[k] / (l[k] * l[k]));
        }
        h
    }

    /// `[δ² - ‖A t‖², (1-δ)² - ‖A e_12‖²]`.
    pub fn constraints(&self, x: &Vector4<f64>) -> [f64; 2] {
        let d = x[3];
        [
            d * d - x.dot(&(self.p_tri * x)),
            (1.0 - d) * (1.0 - d) - x.dot(&(self.p_bound * x)),
        ]
    }

    /// `[δ - ‖A t‖, 1 - δ - ‖A e_12‖]`.
    pub fn slacks(&self, x: &Vector4<f64>) -> [f64; 2] {
        [
            x[3] - x.dot(&(self.p_tri * x)).max(0.0).sqrt(),
            1.0 - x[3] - x.dot(&(self.p_bound * x)).max(0.0).sqrt(),
        ]
    }

    pub fn constraint_gradients(&self, x: &Vector4<f64>) -> [Vector4<f64>; 2] {
        let mut g1 = -2.0 * self.p_tri * x;
        g1[3] += 2.0 * x[3];
        let mut g2 = -2.0 * self.p_bound * x;
        g2[3] -= 2.0 * (1.0 - x[3]);
        [g1, g2]
    }

    pub fn constraint_hessians(&self) -> [Matrix4<f64>; 2] {
        let mut h1 = -2.0 * self.p_tri;
        h1[(3, 3)] += 2.0;
        let mut h2 = -2.0 * self.p_bound;
        h2[(3, 3)] += 2.0;
        [h1, h2]
    }

    fn in_domain(&self, x: &Vector4<f64>) -> bool {
        if !(x[3] > 0.0 && x[3] < 1.0) {
            return false;
        }
        let c = self.constraints(x);
        if !(c[0] > 0.0 && c[1] > 0.0) {
            return false;
        }
        let l = self.lambdas(x);
        self.eigenspaces().all(|k| l[k] > 0.0)
    }

    fn barrier_value(&self, x: &Vector4<f64>, t: f64) -> f64 {
        if !self.in_domain(x) {
            return f64::NEG_INFINITY;
        }
        let c = self.constraints(x);
        let l = self.lambdas(x);
        let mut v = t * self.normalized_objective(x) + c[0].ln() + c[1].ln();
        for k in self.eigenspaces() {
            v += l[k].ln();
        }
        v
    }

    fn barrier_derivatives(&self, x: &Vector4<f64>, t: f64) -> (Vector4<f64>, Matrix4<f64>) {
        let c = self.constraints(x);
        let gc = self.constraint_gradients(x);
        let hc = self.constraint_hessians();
        let l = self.lambdas(x);
        let mut g = t * self.objective_gradient(x);
        let mut h = t * self.objective_hessian(x);
        for k in 0..2 {
            g += gc[k] / c[k];
            h += hc[k] / c[k] - gc[k] * gc[k].transpose() / (c[k] * c[k]);
        }
        for k in self.eigenspaces() {
            g += self.rows[k] / l[k];
            h -= self.rows[k] * self.rows[k].transpose() / (l[k] * l[k]);
        }
        (g, h)
    }

    /// Gradient and Hessian in scaled coordinates, with `γ` frozen when inert.
    fn to_scaled(&self, g: Vector4<f64>, h: Matrix4<f64>) -> (Vector4<f64>, Matrix4<f64>) {
        let d = Matrix4::from_diagonal(&self.scale);
        let mut gs = d * g;
        let mut hs = d * h * d;
        if self.gamma_inert() {
            gs[2] = 0.0;
            for k in 0..4 {
                hs[(2, k)] = 0.0;
                hs[(k, 2)] = 0.0;
            }
            hs[(2, 2)] = -1.0;
        }
        (gs, hs)
    }

    /// Stationarity residual of the Lagrangian in scaled coordinates.
    fn stationarity(&self, x: &Vector4<f64>, y: [f64; 2]) -> Vector4<f64> {
        let gc = self.constraint_gradients(x);
        let g = self.objective_gradient(x) + gc[0] * y[0] + gc[1] * y[1];
        let mut gs = g.component_mul(&self.scale);
        if self.gamma_inert() {
            gs[2] = 0.0;
        }
        gs
    }

    /// `max(‖∇L‖∞, |c_1|, |c_2|, max(0, -y))` in scaled coordinates.
    pub fn kkt_residual(&self, x: &Vector4<f64>, y: [f64; 2]) -> f64 {
        let c = self.constraints(x);
        self.stationarity(x, y)
            .amax()
            .max(c[0].abs())
            .max(c[1].abs())
            .max((-y[0]).max(0.0))
            .max((-y[1]).max(0.0))
    }
}

/// Optimum of the reduced program.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub ellipsoid: SymEllipsoid,
    /// `log det A_n` at the optimum.
    pub log_volume_factor: f64,
    pub kkt_residual: f64,
    /// Lagrange multipliers of the normalized program (objective / C(n,2)).
    pub multipliers: [f64; 2],
    /// `[δ - ‖A t‖, 1 - δ - ‖A e_12‖]`.
    pub slacks: [f64; 2],
    pub active: [bool; 2],
    /// Newton steps taken, path following and refinement combined.
    pub iterations: usize,
    pub barrier_stages: usize,
}

impl SolveResult {
    pub fn to_json(&self) -> SolveResultJson {
        SolveResultJson {
            n: self.ellipsoid.n,
            inner: self.ellipsoid.to_json(),
            log_volume_factor: self.log_volume_factor,
            kkt_residual: self.kkt_residual,
            multipliers: self.multipliers,
            slacks: self.slacks,
            active: self.active,
            iterations: self.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResultJson {
    pub n: usize,
    pub inner: SymEllipsoidJson,
    pub log_volume_factor: f64,
    pub kkt_residual: f64,
    pub multipliers: [f64; 2],
    pub slacks: [f64; 2],
    pub active: [bool; 2],
    pub iterations: usize,
}

fn newton_direction(g: &Vector4<f64>, h: &Matrix4<f64>) -> Option<Vector4<f64>> {
    let neg = -h;
    if let Some(ch) = neg.cholesky() {
        return Some(ch.solve(g));
    }
    // regularize until the negated Hessian is positive definite
    let mut shift = 1e-12 * neg.diagonal().amax().max(1.0);
    for _ in 0..40 {
        if let Some(ch) = (neg + Matrix4::identity() * shift).cholesky() {
            return Some(ch.solve(g));
        }
        shift *= 10.0;
    }
    None
}

/// Centers the barrier for a fixed `t`; returns the number of Newton steps.
fn center(problem: &ReducedProblem, x: &mut Vector4<f64>, t: f64) -> Result<usize> {
    for it in 0..MAX_NEWTON_PER_STAGE {
        let (g, h) = problem.barrier_derivatives(x, t);
        let (gs, hs) = problem.to_scaled(g, h);
        let step_s = newton_direction(&gs, &hs).ok_or_else(|| Error::NotConverged {
            iterations: it,
            residual: gs.amax(),
            last: x.as_slice().to_vec(),
        })?;
        let decrement_sq = gs.dot(&step_s);
        if decrement_sq <= 1e-18 {
            return Ok(it);
        }
        let step = step_s.component_mul(&problem.scale);
        let f0 = problem.barrier_value(x, t);
        let mut s = 1.0;
        let mut accepted = false;
        while s > 1e-20 {
            let trial = *x + step * s;
            let f1 = problem.barrier_value(&trial, t);
            if f1.is_finite() && f1 >= f0 + 0.25 * s * decrement_sq {
                *x = trial;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            // no representable ascent left; accept if already centered to rounding
            if decrement_sq <= 1e-10 {
                return Ok(it);
            }
            return Err(Error::NotConverged {
                iterations: it,
                residual: decrement_sq,
                last: x.as_slice().to_vec(),
            });
        }
    }
    Ok(MAX_NEWTON_PER_STAGE)
}

/// Newton on the KKT system with both constraints active.
fn polish(problem: &ReducedProblem, x: &mut Vector4<f64>, y: &mut [f64; 2]) -> (usize, f64) {
    let mut best = problem.kkt_residual(x, *y);
    let [h1, h2] = problem.constraint_hessians();
    let d = problem.scale;
    let mut steps = 0;
    for _ in 0..MAX_POLISH {
        let c = problem.constraints(x);
        let gc = problem.constraint_gradients(x);
        let hl = problem.objective_hessian(x) + h1 * y[0] + h2 * y[1];
        let stat = problem.stationarity(x, *y);

        let mut jac = Matrix6::zeros();
        let mut rhs = Vector6::zeros();
        for r in 0..4 {
            for k in 0..4 {
                jac[(r, k)] = d[r] * hl[(r, k)] * d[k];
            }
            jac[(r, 4)] = d[r] * gc[0][r];
            jac[(r, 5)] = d[r] * gc[1][r];
            jac[(4, r)] = gc[0][r] * d[r];
            jac[(5, r)] = gc[1][r] * d[r];
            rhs[r] = -stat[r];
        }
        rhs[4] = -c[0];
        rhs[5] = -c[1];
        if problem.gamma_inert() {
            for k in 0..6 {
                jac[(2, k)] = 0.0;
                jac[(k, 2)] = 0.0;
            }
            jac[(2, 2)] = 1.0;
            rhs[2] = 0.0;
        }
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut trial_x = *x;
        for k in 0..4 {
            trial_x[k] += d[k] * step[k];
        }
        let trial_y = [y[0] + step[4], y[1] + step[5]];
        let r = problem.kkt_residual(&trial_x, trial_y);
        if r.is_nan() || r >= best {
            break;
        }
        *x = trial_x;
        *y = trial_y;
        best = r;
        steps += 1;
        if best <= 1e-16 {
            break;
        }
    }
    (steps, best)
}

/// Maximizes the reduced log-det program for `n` vertices.
pub fn solve_inner(n: usize, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    let problem = ReducedProblem::new(n)?;
    let mut x = Vector4::from(START);
    let mut t = 1.0;
    let mut iterations = 0;
    let mut stages = 0;
    loop {
        iterations += center(&problem, &mut x, t)?;
        stages += 1;
        if BARRIER_WEIGHT / t <= HANDOVER_GAP {
            break;
        }
        if stages >= opts.max_iter {
            let c = problem.constraints(&x);
            return Err(Error::NotConverged {
                iterations,
                residual: BARRIER_WEIGHT / t,
                last: vec![x[0], x[1], x[2], x[3], c[0], c[1]],
            });
        }
        t *= 10.0;
    }

    let c = problem.constraints(&x);
    let mut y = [1.0 / (t * c[0]), 1.0 / (t * c[1])];
    let (steps, residual) = polish(&problem, &mut x, &mut y);
    iterations += steps;
    if residual.is_nan() || residual > opts.tol_kkt {
        return Err(Error::NotConverged {
            iterations,
            residual,
            last: x.as_slice().to_vec(),
        });
    }

    let gamma = if problem.gamma_inert() { 0.0 } else { x[2] };
    let ellipsoid = SymEllipsoid::new(n, x[0], x[1], gamma, x[3])?;
    let slacks = problem.slacks(&x);
    Ok(SolveResult {
        ellipsoid,
        log_volume_factor: problem.objective(&x),
        kkt_residual: residual,
        multipliers: y,
        slacks,
        active: [
            slacks[0].abs() <= ACTIVE_SLACK,
            slacks[1].abs() <= ACTIVE_SLACK,
        ],
        iterations,
        barrier_stages: stages,
    })
}

/// One row of the convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub alpha: f64,
    pub n_beta: f64,
    pub n2_gamma: f64,
    pub delta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub logvol: f64,
    pub kkt: f64,
}

impl TableRow {
    pub const CSV_HEADER: &'static str =
        "n,alpha,n_beta,n2_gamma,delta,lambda1,lambda2,lambda3,logvol,kkt";

    pub fn from_result(r: &SolveResult) -> Self {
        let e = &r.ellipsoid;
        let nf = e.n as f64;
        let s = e.spectrum();
        Self {
            n: e.n,
            alpha: e.alpha,
            n_beta: nf * e.beta,
            n2_gamma: nf * nf * e.gamma,
            delta: e.delta,
            lambda1: s.lambda1,
            lambda2: s.lambda2,
            lambda3: s.lambda3,
            logvol: r.log_volume_factor,
            kkt: r.kkt_residual,
        }
    }

    pub fn values(&self) -> [f64; 9] {
        [
            self.alpha,
            self.n_beta,
            self.n2_gamma,
            self.delta,
            self.lambda1,
            self.lambda2,
            self.lambda3,
            self.logvol,
            self.kkt,
        ]
    }
}

/// Solves every `n` (in parallel); results keep the input order.
pub fn asymptotic_table(
    n_values: &[usize],
    opts: &SolveOptions,
) -> Result<Vec<(TableRow, SolveResult)>> {
    n_values
        .par_iter()
        .map(|&n| solve_inner(n, opts).map(|r| (TableRow::from_result(&r), r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_feasible(p: &ReducedProblem, rng: &mut ChaCha8Rng) -> Vector4<f64> {
        let n = p.n() as f64;
        loop {
            let x = Vector4::new(
                rng.random_range(0.05..0.4),
                rng.random_range(-0.1..0.1) / n,
                rng.random_range(-0.5..0.5) / (n * n),
                rng.random_range(0.3..0.8),
            );
            if p.in_domain(&x) {
                return x;
            }
        }
    }

    fn fd_gradient(
        f: impl Fn(&Vector4<f64>) -> f64,
        x: &Vector4<f64>,
        h: &Vector4<f64>,
    ) -> Vector4<f64> {
        let mut g = Vector4::zeros();
        for k in 0..4 {
            let mut xp = *x;
            let mut xm = *x;
            xp[k] += h[k];
            xm[k] -= h[k];
            g[k] = (f(&xp) - f(&xm)) / (2.0 * h[k]);
        }
        g
    }

    fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [3, 4, 5, 8, 20, 100] {
            let p = ReducedProblem::new(n).unwrap();
            // step 1e-6 in the scaled coordinates
            let h = p.scale * 1e-6;
            for _ in 0..20 {
                let x = random_feasible(&p, &mut rng);
                let g = p.objective_gradient(&x);
                let fd = fd_gradient(|z| p.normalized_objective(z), &x, &h);
                let hs = p.objective_hessian(&x);
                let gc = p.constraint_gradients(&x);
                let hc = p.constraint_hessians();
                for k in 0..4 {
                    let gs = g[k] * p.scale[k];
                    assert!(close(gs, fd[k] * p.scale[k], 1e-6, 1e-9), "n={n} k={k}");
                    for (c, (grad, hess)) in gc.iter().zip(hc.iter()).enumerate() {
                        let fdc = fd_gradient(|z| p.constraints(z)[c], &x, &h);
                        assert!(close(grad[k], fdc[k], 1e-6, 1e-9 / p.scale[k]));
                        let fdh = fd_gradient(|z| p.constraint_gradients(z)[c][k], &x, &h);
                        for m in 0..4 {
                            assert!(close(
                                hess[(k, m)],
                                fdh[m],
                                1e-6,
                                1e-9 / (p.scale[k] * p.scale[m])
                            ));
                        }
                    }
                    let fdh = fd_gradient(|z| p.objective_gradient(z)[k], &x, &h);
                    for m in 0..4 {
                        let a = hs[(k, m)] * p.scale[k] * p.scale[m];
                        let b = fdh[m] * p.scale[k] * p.scale[m];
                        assert!(close(a, b, 1e-6, 1e-9), "n={n} ({k},{m}) {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn start_is_strictly_feasible() {
        for n in [3, 4, 5, 10, 100, 10_000] {
            let p = ReducedProblem::new(n).unwrap();
            assert!(p.in_domain(&Vector4::from(START)));
        }
    }

    #[test]
    fn constraint_values_match_ellipsoid_formulas() {
        let p = ReducedProblem::new(9).unwrap();
        let x = Vector4::new(0.3, 0.01, 0.002, 0.6);
        let e = SymEllipsoid::new(9, 0.3, 0.01, 0.002, 0.6).unwrap();
        let c = p.constraints(&x);
        assert!((c[0] - (0.36 - e.triangle_norm_sq())).abs() < 1e-15);
        assert!((c[1] - (0.16 - e.bound_norm_sq())).abs() < 1e-15);
        let l = p.lambdas(&x);
        assert_eq!(l, e.spectrum().values());
    }

    #[test]
    fn solves_small_n() {
        for n in 3..=12 {
            let r = solve_inner(n, &SolveOptions::default()).unwrap();
            assert!(
                r.kkt_residual <= DEFAULT_TOL_KKT,
                "n={n} kkt={}",
                r.kkt_residual
            );
            assert_eq!(r.active, [true, true], "n={n} slacks={:?}", r.slacks);
            assert!(r.multipliers[0] > 0.0 && r.multipliers[1] > 0.0);
            let e = r.ellipsoid;
            assert!(e.delta > 0.0 && e.delta < 1.0);
            assert!(e.triangle_norm_sq().sqrt() <= e.delta + 1e-10);
            assert!(e.bound_norm_sq().sqrt() <= 1.0 - e.delta + 1e-10);
            let s = e.spectrum();
            s.check_positive().unwrap();
            if n == 3 {
                assert_eq!(e.gamma, 0.0);
            }
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let a = solve_inner(37, &SolveOptions::default()).unwrap();
        let b = solve_inner(37, &SolveOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tight_tolerance_is_reached() {
        for n in [3, 10, 1000] {
            let opts = SolveOptions {
                tol_kkt: 1e-14,
                ..Default::default()
            };
            let r = solve_inner(n, &opts).unwrap();
            assert!(r.kkt_residual <= 1e-14);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let bad = SolveOptions {
            tol_kkt: 1e-3,
            ..Default::default()
        };
        assert!(solve_inner(5, &bad).is_err());
        assert!(solve_inner(2, &SolveOptions::default()).is_err());
        let starved = SolveOptions {
            max_iter: 2,
            ..Default::default()
        };
        assert!(matches!(
            solve_inner(5, &starved),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn perturbations_do_not_improve() {
        for n in [3, 4, 5, 10, 50] {
            let r = solve_inner(n, &SolveOptions::default()).unwrap();
            let p = ReducedProblem::new(n).unwrap();
            let e = r.ellipsoid;
            let x0 = Vector4::new(e.alpha, e.beta, e.gamma, e.delta);
            let f0 = p.objective(&x0);
            for k in 0..4 {
                if k == 2 && n == 3 {
                    continue;
                }
                for sign in [-1.0, 1.0] {
                    let mut x = x0;
                    x[k] += sign * 1e-4;
                    // shrink the form matrix back into the feasible region
                    let t = SymEllipsoid::new(n, x[0], x[1], x[2], x[3]).unwrap();
                    let kappa = (x[3] / t.triangle_norm_sq().sqrt())
                        .min((1.0 - x[3]) / t.bound_norm_sq().sqrt())
                        .min(1.0);
                    for c in 0..3 {
                        x[c] *= kappa;
                    }
                    assert!(p.objective(&x) - f0 <= 1e-9, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn table_keeps_order() {
        let rows = asymptotic_table(&[12, 3, 7], &SolveOptions::default()).unwrap();
        let ns: Vec<usize> = rows.iter().map(|(r, _)| r.n).collect();
        assert_eq!(ns, vec![12, 3, 7]);
        for (row, _) in &rows {
            assert!(row.values().iter().all(|v| v.is_finite()));
            let lam3 =
                row.alpha - 2.0 * row.n_beta / row.n as f64 + row.n2_gamma / (row.n * row.n) as f64;
            assert!((row.lambda3 - lam3).abs() < 1e-14);
        }
    }
}
