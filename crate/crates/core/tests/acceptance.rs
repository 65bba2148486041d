//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (visible without `--nocapture`) and fails if any of its checks fail.

use std::io::Write;
use std::time::{Duration, Instant};

use metric_lj::inner_solver::{solve_inner, SolveOptions, SolveResult};
use metric_lj::metric_polytope::FacetSystem;
use metric_lj::mve_oracle::{pattern_spread, solve_mve, symmetry_average, OracleOptions};
use metric_lj::outer_certificate::{
    center_distances, centered_inscribed_ball, john_certificate, outer_radius, shrink_factor,
};
use metric_lj::pairspace::{apply_permutation, num_pairs, PairVector, Permutation};
use metric_lj::sandwich_analysis::{
    contact_points, containment_audit, corner_audit, cut_profile, min_distance, orbit_check,
    r_lower, r_upper, triangle_image_pattern_error,
};
use metric_lj::sym_ellipsoid::{triangle_normal, SymEllipsoid};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Checks {
    id: u32,
    title: &'static str,
    items: Vec<(String, bool)>,
}

impl Checks {
    fn new(id: u32, title: &'static str) -> Self {
        Self {
            id,
            title,
            items: Vec::new(),
        }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.items.push((label.into(), ok));
    }

    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.check(format!("{label}={got:.9} want {want} ± {tol:e}"), ok);
    }

    fn within(&mut self, label: &str, started: Instant, limit: Duration) {
        let took = started.elapsed();
        self.check(
            format!("{label} runtime {took:.2?} < {limit:?}"),
            took < limit,
        );
    }

    fn finish(self) {
        let failed: Vec<&str> = self
            .items
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(l, _)| l.as_str())
            .collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let detail = if failed.is_empty() {
            format!("{} checks", self.items.len())
        } else {
            failed.join("; ")
        };
        let line = format!(
            "criterion {:>2} [{}]: {verdict} ({detail})\n",
            self.id, self.title
        );
        let _ = std::io::stderr().write_all(line.as_bytes());
        assert!(failed.is_empty(), "{line}");
    }
}

fn solve(n: usize) -> SolveResult {
    solve_inner(n, &SolveOptions::default()).expect("reduced program converges")
}

#[test]
fn criterion_01_outer_certificate() {
    let mut c = Checks::new(1, "outer certificate");
    let t0 = Instant::now();
    for n in 3..=12 {
        let cert = john_certificate(n).unwrap();
        c.check(
            format!("n={n} barycenter {:e}", cert.barycenter_residual),
            cert.barycenter_residual <= 1e-12,
        );
        c.check(
            format!("n={n} identity {:e}", cert.identity_residual),
            cert.identity_residual <= 1e-12,
        );
        c.check(
            format!("n={n} contacts {}", cert.num_contacts()),
            cert.num_contacts() == 1 << (n - 1) && cert.num_contacts() >= num_pairs(n),
        );
    }
    c.within("certificates", t0, Duration::from_secs(10));
    c.finish();
}

#[test]
fn criterion_02_shrink_factor() {
    let mut c = Checks::new(2, "shrink factor");
    let r = 1.0 / (2.0 * 3f64.sqrt());
    for n in 3..=12 {
        c.near(
            &format!("n={n} inscribed"),
            centered_inscribed_ball(n).unwrap(),
            r,
            1e-12,
        );
        c.near(
            &format!("n={n} bound distance"),
            center_distances(n).unwrap().bound,
            0.5,
            1e-12,
        );
        c.near(
            &format!("n={n} shrink"),
            shrink_factor(n).unwrap(),
            (3.0 * num_pairs(n) as f64).sqrt(),
            1e-10,
        );
        let fs = FacetSystem::build(n).unwrap();
        let a = triangle_normal(n);
        let center = PairVector::constant(n, 0.5);
        let outside = center.add_scaled((r + 1e-6) / a.norm(), &a);
        let inside = center.add_scaled((r - 1e-9) / a.norm(), &a);
        c.check(
            format!("n={n} tightness witness"),
            !fs.membership(&outside).unwrap().inside && fs.membership(&inside).unwrap().inside,
        );
    }
    c.near("n=4 outer radius", outer_radius(4).unwrap(), 1.224745, 1e-6);
    c.finish();
}

#[test]
fn criterion_03_spectrum() {
    let mut c = Checks::new(3, "spectrum");
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for n in 4..=12 {
        for _ in 0..100 {
            let e = SymEllipsoid::new(
                n,
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                0.5,
            )
            .unwrap();
            let mut dense: Vec<f64> = SymmetricEigen::new(e.materialize().unwrap())
                .eigenvalues
                .iter()
                .copied()
                .collect();
            dense.sort_by(f64::total_cmp);
            let s = e.spectrum();
            let mut want: Vec<f64> = s
                .values()
                .iter()
                .zip(s.multiplicities())
                .flat_map(|(v, m)| std::iter::repeat_n(*v, m))
                .collect();
            want.sort_by(f64::total_cmp);
            let err = dense
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
        }
    }
    c.check(
        format!("max eigenvalue error {worst:e} <= 1e-10"),
        worst <= 1e-10,
    );
    c.within("eigensolves", t0, Duration::from_secs(30));
    c.finish();
}

#[test]
fn criterion_04_constraint_formulas() {
    let mut c = Checks::new(4, "constraint formulas");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_t, mut worst_b) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(3..=40);
        let nf = n as f64;
        let e = SymEllipsoid::new(
            n,
            rng.random_range(0.1..1.0),
            rng.random_range(-1.0..1.0) / nf,
            rng.random_range(-1.0..1.0) / (nf * nf),
            0.5,
        )
        .unwrap();
        let at = e.matvec(&triangle_normal(n)).unwrap();
        worst_t = worst_t.max((at.dot(&at) - e.triangle_norm_sq()).abs());
        let ae = e.matvec(&PairVector::unit(n, 1, 2).unwrap()).unwrap();
        worst_b = worst_b.max((ae.dot(&ae) - e.bound_norm_sq()).abs());
    }
    c.check(format!("triangle norm error {worst_t:e}"), worst_t <= 1e-12);
    c.check(format!("bound norm error {worst_b:e}"), worst_b <= 1e-12);
    c.finish();
}

#[test]
fn criterion_05_oracle_equivalence() {
    let mut c = Checks::new(5, "oracle equivalence");
    let t0 = Instant::now();
    for n in 3..=5 {
        let hs = FacetSystem::build(n).unwrap().to_halfspaces();
        let oracle = solve_mve(&hs, &OracleOptions::for_metric_polytope(n)).unwrap();
        let inner = solve(n);
        let dense = inner.ellipsoid.materialize().unwrap();
        let entry = (&oracle.ellipsoid.a - &dense).amax();
        let center = oracle
            .ellipsoid
            .c
            .iter()
            .map(|v| (v - inner.ellipsoid.delta).abs())
            .fold(0.0, f64::max);
        c.check(format!("n={n} form entries {entry:e}"), entry <= 1e-5);
        c.check(format!("n={n} center {center:e}"), center <= 1e-5);
        let dl = (oracle.log_det - inner.log_volume_factor).abs();
        c.check(format!("n={n} log-volume {dl:e}"), dl <= 1e-6);
        let spread = pattern_spread(&oracle.ellipsoid, n).unwrap();
        c.check(
            format!("n={n} pattern spread {:e}", spread.max()),
            spread.max() <= 1e-5,
        );
        let avg = symmetry_average(&oracle.ellipsoid, n).unwrap();
        let avg_err = [
            avg.alpha - inner.ellipsoid.alpha,
            avg.beta - inner.ellipsoid.beta,
            avg.gamma - inner.ellipsoid.gamma,
            avg.delta - inner.ellipsoid.delta,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        c.check(
            format!("n={n} averaged parameters {avg_err:e}"),
            avg_err <= 1e-5,
        );
    }
    c.within("oracle runs", t0, Duration::from_secs(300));
    c.finish();
}

const ALPHA: f64 = 0.3660254;
const DELTA: f64 = 0.6339746;
const N_BETA: f64 = 0.046130;
const N2_GAMMA: f64 = 0.639788;
const LAMBDA1: f64 = 0.481718;
const LAMBDA2: f64 = 0.412153;

fn decreasing(errors: &[f64]) -> bool {
    errors.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn criterion_06_asymptotic_constants() {
    let mut c = Checks::new(6, "asymptotic constants");
    let t0 = Instant::now();
    let r = solve(2000);
    c.within("n=2000 solve", t0, Duration::from_secs(60));
    let e = r.ellipsoid;
    let nf = 2000.0;
    let s = e.spectrum();
    c.near("alpha", e.alpha, ALPHA, 1e-3);
    c.near("delta", e.delta, DELTA, 1e-3);
    c.near("n*beta", nf * e.beta, N_BETA, 1e-2);
    c.near("n^2*gamma", nf * nf * e.gamma, N2_GAMMA, 5e-2);
    c.near("lambda1", s.lambda1, LAMBDA1, 1e-3);
    c.near("lambda2", s.lambda2, LAMBDA2, 1e-3);

    let trend: Vec<SymEllipsoid> = [10, 100, 1000]
        .iter()
        .map(|&n| solve(n).ellipsoid)
        .collect();
    let err = |f: &dyn Fn(&SymEllipsoid) -> f64, want: f64| -> Vec<f64> {
        trend.iter().map(|e| (f(e) - want).abs()).collect()
    };
    c.check("alpha trend", decreasing(&err(&|e| e.alpha, ALPHA)));
    c.check("delta trend", decreasing(&err(&|e| e.delta, DELTA)));
    c.check(
        "n*beta trend",
        decreasing(&err(&|e| e.n as f64 * e.beta, N_BETA)),
    );
    c.check(
        "lambda1 trend",
        decreasing(&err(&|e| e.spectrum().lambda1, LAMBDA1)),
    );
    c.check(
        "lambda2 trend",
        decreasing(&err(&|e| e.spectrum().lambda2, LAMBDA2)),
    );
    c.finish();
}

const R_UPPER_SLOPE: f64 = 1.224745;
const R_LOWER_SLOPE: f64 = 0.985776;

#[test]
fn criterion_07_inflation_bounds() {
    let mut c = Checks::new(7, "inflation bounds");
    let e = solve(500).ellipsoid;
    c.near(
        "r_upper(500)/500",
        r_upper(&e).unwrap() / 500.0,
        R_UPPER_SLOPE,
        5e-3,
    );
    c.near(
        "r_lower(500)/500",
        r_lower(&e).unwrap() / 500.0,
        R_LOWER_SLOPE,
        1e-2,
    );
    for n in (3..=50).chain([100, 500, 1000, 2000]) {
        let e = solve(n).ellipsoid;
        let (lo, hi) = (r_lower(&e).unwrap(), r_upper(&e).unwrap());
        c.check(
            format!("n={n} r_lower {lo:.6} <= r_upper {hi:.6}"),
            lo <= hi,
        );
    }
    for n in 3..=12 {
        let p = cut_profile(&solve(n).ellipsoid).unwrap();
        c.check(
            format!(
                "n={n} half cut maximal (argmax size {}, half {})",
                p.argmax_size,
                n / 2
            ),
            p.half_cut_is_max,
        );
    }
    let trend: Vec<SymEllipsoid> = [10, 100, 1000]
        .iter()
        .map(|&n| solve(n).ellipsoid)
        .collect();
    let up: Vec<f64> = trend
        .iter()
        .map(|e| (r_upper(e).unwrap() / e.n as f64 - R_UPPER_SLOPE).abs())
        .collect();
    let low: Vec<f64> = trend
        .iter()
        .map(|e| (r_lower(e).unwrap() / e.n as f64 - R_LOWER_SLOPE).abs())
        .collect();
    c.check("r_upper/n trend", decreasing(&up));
    c.check("r_lower/n trend", decreasing(&low));
    c.finish();
}

#[test]
fn criterion_08_min_distance() {
    let mut c = Checks::new(8, "min distance");
    let limit = 2.0 - 3f64.sqrt();
    c.near(
        "min_distance(2000)",
        min_distance(&solve(2000).ellipsoid),
        0.2679492,
        1e-3,
    );
    let mut worst = 0.0f64;
    for n in 3..=50 {
        let e = solve(n).ellipsoid;
        worst = worst.max((min_distance(&e) - (2.0 * e.delta - 1.0)).abs());
    }
    c.check(
        format!("min_distance = 2δ - 1 on 3..=50, max error {worst:e}"),
        worst <= 1e-9,
    );
    let errs: Vec<f64> = [10, 100, 1000]
        .iter()
        .map(|&n| (min_distance(&solve(n).ellipsoid) - limit).abs())
        .collect();
    c.check("trend", decreasing(&errs));
    c.finish();
}

#[test]
fn criterion_09_contact_points() {
    let mut c = Checks::new(9, "contact points");
    let n = 2000;
    let e = solve(n).ellipsoid;
    let cp = contact_points(&e).unwrap();
    let short = 1.0 - 3f64.sqrt() / 3.0;
    let generic = (3.0 - 3f64.sqrt()) / 2.0;
    // tangent to x_13 <= x_12 + x_23: 13 is the long side
    c.near("p_12", cp.p.get(1, 2), short, 1e-3);
    c.near("p_23", cp.p.get(2, 3), short, 1e-3);
    c.near("p_13", cp.p.get(1, 3), 2.0 * short, 1e-3);
    // relabelled by swapping vertices 1 and 2: long side 23
    let swapped = apply_permutation(&Permutation::transposition(n, 1, 2).unwrap(), &cp.p).unwrap();
    c.near("swapped p_12", swapped.get(1, 2), 0.42265, 1e-3);
    c.near("swapped p_13", swapped.get(1, 3), 0.42265, 1e-3);
    c.near("swapped p_23", swapped.get(2, 3), 0.84530, 1e-3);
    c.near("p generic", cp.p.get(4, 5), 0.633975, 1e-3);
    c.near("p generic far", cp.p.get(n - 1, n), generic, 1e-3);
    c.near("q_12", cp.q.get(1, 2), 1.0, 1e-9);
    c.near("q generic", cp.q.get(4, 5), 0.633975, 1e-3);
    c.check(
        format!("tangency residual {:e}", cp.max_residual()),
        cp.max_residual() <= 1e-7,
    );
    c.check(
        "A t pattern",
        triangle_image_pattern_error(&e).unwrap() <= 1e-12,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sigma = Permutation::random(n, &mut rng);
        let o = orbit_check(&e, &cp.p, &sigma).unwrap();
        worst = worst.max((o.dilation - 1.0).abs()).max(o.facet_slack.abs());
    }
    c.check(
        format!("orbit of p over 100 permutations {worst:e}"),
        worst <= 1e-7,
    );
    let errs: Vec<f64> = [10, 100, 1000]
        .iter()
        .map(|&n| (contact_points(&solve(n).ellipsoid).unwrap().p.get(1, 2) - short).abs())
        .collect();
    c.check("p_12 trend", decreasing(&errs));
    c.finish();
}

#[test]
fn criterion_10_containment_audits() {
    let mut c = Checks::new(10, "containment audits");
    for n in [4, 10, 30] {
        let a = containment_audit(&solve(n).ellipsoid, 10_000, 42).unwrap();
        c.check(
            format!(
                "n={n} min slack {:e}, violations {}",
                a.min_slack, a.violations
            ),
            a.passed && a.min_slack >= -1e-9,
        );
    }
    for (n, points) in [(4, 64), (5, 1024)] {
        let a = corner_audit(&solve(n).ellipsoid, 0, 42).unwrap();
        c.check(
            format!(
                "n={n} corners {} max dilation {:.6} bound {:.6}",
                a.points, a.max_dilation, a.bound
            ),
            a.exhaustive && a.points == points && a.passed,
        );
    }
    c.finish();
}
