//! How far the inner ellipsoid must be inflated to cover `M_n`, and where it
//! touches the boundary.
//!
//! All quantities work on the compact [`SymEllipsoid`] form; the only `O(n^3)`
//! step is facet membership in the sampling audit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner_solver::SolveResult;
use crate::metric_polytope::{cut_metric, cuts, FacetSystem, LinearConstraint, TOL_MEMBERSHIP};
use crate::outer_certificate::{outer_radius, shrink_factor};
use crate::pairspace::{apply_permutation, num_pairs, PairVector, Permutation};
use crate::sym_ellipsoid::{triangle_normal, SymEllipsoid, SymEllipsoidJson};

/// Largest `n` for which dilations of every cut metric are enumerated.
pub const MAX_CUT_PROFILE_N: usize = 12;
/// Largest `n` for which the sampling audit builds the full facet list.
pub const MAX_AUDIT_N: usize = 40;
/// Largest `n` for which every 0/1 vector is enumerated.
pub const MAX_EXHAUSTIVE_CORNER_N: usize = 5;
/// Slack tolerance at the exact contact points.
pub const TOL_TANGENCY: f64 = 1e-7;
const SAMPLE_CHUNK: usize = 1024;

/// Smallest `r` with `x ∈ r·E`: `‖A^{-1}(x - δ·1)‖`.
pub fn dilation_of_point(e: &SymEllipsoid, x: &PairVector) -> Result<f64> {
    e.inv_norm(&x.shifted(e.delta))
}

/// Smallest eigenvalue of the form matrix among those with a nonzero
/// eigenspace. This is `λ3` except when `n = 3`.
fn smallest_eigenvalue(e: &SymEllipsoid) -> Result<f64> {
    let spec = e.spectrum();
    spec.check_positive()?;
    Ok(spec
        .values()
        .iter()
        .zip(spec.multiplicities())
        .filter(|(_, m)| *m > 0)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min))
}

/// `√C(n,2)·δ / λ_min`: every 0/1 vector lies in this inflation of `E`.
pub fn r_upper(e: &SymEllipsoid) -> Result<f64> {
    Ok((e.dim() as f64).sqrt() * e.delta / smallest_eigenvalue(e)?)
}

/// A cut metric with `|S| = ⌊n/2⌋`.
pub fn half_cut(n: usize) -> Result<PairVector> {
    let set: Vec<usize> = (2..2 + n / 2).collect();
    Ok(cut_metric(n, &set)?.vector)
}

/// Dilation of the half cut.
pub fn r_lower(e: &SymEllipsoid) -> Result<f64> {
    dilation_of_point(e, &half_cut(e.n)?)
}

/// Cut-metric dilations grouped by the size `k = min(|S|, n - |S|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutProfile {
    /// `(k, min dilation, max dilation)` over cuts of that size.
    pub by_size: Vec<(usize, f64, f64)>,
    /// Size with the largest dilation.
    pub argmax_size: usize,
    pub max_dilation: f64,
    pub half_cut_is_max: bool,
}

/// Enumerates every cut metric. Limited to `n <= MAX_CUT_PROFILE_N`.
pub fn cut_profile(e: &SymEllipsoid) -> Result<CutProfile> {
    let n = e.n;
    if n > MAX_CUT_PROFILE_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_CUT_PROFILE_N,
            what: "cut profile",
        });
    }
    let mut by_size: Vec<(usize, f64, f64)> = (0..=n / 2)
        .map(|k| (k, f64::INFINITY, f64::NEG_INFINITY))
        .collect();
    for c in cuts(n)? {
        let k = c.size().min(n - c.size());
        let d = dilation_of_point(e, &c.vector)?;
        let slot = &mut by_size[k];
        slot.1 = slot.1.min(d);
        slot.2 = slot.2.max(d);
    }
    let (argmax_size, max_dilation) =
        by_size
            .iter()
            .map(|&(k, _, hi)| (k, hi))
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    Ok(CutProfile {
        half_cut_is_max: argmax_size == n / 2,
        by_size,
        argmax_size,
        max_dilation,
    })
}

/// `δ - ‖A e_12‖`: the smallest value any coordinate takes on `E`.
pub fn min_distance(e: &SymEllipsoid) -> f64 {
    e.delta - e.bound_norm_sq().sqrt()
}

/// `A² v / ‖A v‖`, the offset from the center to the boundary point that
/// maximizes `v . x`.
fn support_offset(e: &SymEllipsoid, v: &PairVector) -> Result<PairVector> {
    let av = e.matvec(v)?;
    let scale = 1.0 / av.norm();
    Ok(e.matvec(&av)?.scaled(scale))
}

/// The boundary point `c - A² e_12 / ‖A e_12‖` where coordinate 12 is minimal.
pub fn min_distance_point(e: &SymEllipsoid) -> Result<PairVector> {
    let off = support_offset(e, &PairVector::unit(e.n, 1, 2)?)?;
    Ok(e.center().add_scaled(-1.0, &off))
}

/// Tangency points with the triangle facet `x_13 <= x_12 + x_23` and the
/// bound facet `x_12 <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPoints {
    pub p: PairVector,
    pub q: PairVector,
    /// `t . p`.
    pub triangle_residual: f64,
    /// `q_12 - 1`.
    pub bound_residual: f64,
    pub dilation_p: f64,
    pub dilation_q: f64,
}

impl ContactPoints {
    pub fn max_residual(&self) -> f64 {
        [
            self.triangle_residual.abs(),
            self.bound_residual.abs(),
            (self.dilation_p - 1.0).abs(),
            (self.dilation_q - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn contact_points(e: &SymEllipsoid) -> Result<ContactPoints> {
    e.spectrum().check_positive()?;
    let t = triangle_normal(e.n);
    let p = e.center().add_scaled(1.0, &support_offset(e, &t)?);
    let q = e
        .center()
        .add_scaled(1.0, &support_offset(e, &PairVector::unit(e.n, 1, 2)?)?);
    Ok(ContactPoints {
        triangle_residual: t.dot(&p),
        bound_residual: q.get(1, 2) - 1.0,
        dilation_p: dilation_of_point(e, &p)?,
        dilation_q: dilation_of_point(e, &q)?,
        p,
        q,
    })
}

/// Largest deviation of `A t` from its four-valued pattern: `-α` at 12 and
/// 23, `α - 2β` at 13, `γ - 2β` at `2l` (`l >= 4`), `-γ` elsewhere.
pub fn triangle_image_pattern_error(e: &SymEllipsoid) -> Result<f64> {
    let at = e.matvec(&triangle_normal(e.n))?;
    let (a, b, g) = (e.alpha, e.beta, e.gamma);
    let want = PairVector::from_fn(e.n, |i, j| match (i, j) {
        (1, 2) | (2, 3) => -a,
        (1, 3) => a - 2.0 * b,
        (2, _) => g - 2.0 * b,
        _ => -g,
    });
    Ok(at.max_abs_diff(&want))
}

/// Image of `p` under `σ` and the facet it should lie on.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCheck {
    pub dilation: f64,
    /// Slack of `σ(p)` in the relabelled triangle facet.
    pub facet_slack: f64,
}

/// `σ(p)` lies on `x_{ac} <= x_{ab} + x_{bc}` with `(a, b, c) = σ^{-1}(1, 2, 3)`.
pub fn orbit_check(e: &SymEllipsoid, p: &PairVector, sigma: &Permutation) -> Result<OrbitCheck> {
    let moved = apply_permutation(sigma, p)?;
    let inv = sigma.inverse();
    let (a, b, c) = (
        inv.apply_vertex(1),
        inv.apply_vertex(2),
        inv.apply_vertex(3),
    );
    let facet = LinearConstraint::triangle(e.n, a, b, c);
    Ok(OrbitCheck {
        dilation: dilation_of_point(e, &moved)?,
        facet_slack: facet.slack(moved.as_slice()),
    })
}

/// Deterministic generator for one chunk of a sampling run.
fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn unit_vector(n: usize, rng: &mut ChaCha8Rng) -> PairVector {
    let g: Vec<f64> = (0..num_pairs(n))
        .map(|_| StandardNormal.sample(rng))
        .collect();
    let g = PairVector::from_entries(n, g).expect("length matches");
    let norm = g.norm();
    g.scaled(1.0 / norm)
}

/// Runs `f` on `samples` boundary points `c + A u`, in parallel chunks with
/// independent generator streams. Results come back in sample order.
fn map_boundary_samples<T: Send>(
    e: &SymEllipsoid,
    samples: usize,
    seed: u64,
    f: impl Fn(&PairVector) -> T + Sync,
) -> Result<Vec<T>> {
    e.spectrum().check_positive()?;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let center = e.center();
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk);
            let count = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
            (0..count)
                .map(|_| {
                    let u = unit_vector(e.n, &mut rng);
                    let x = center.add_scaled(1.0, &e.matvec(&u).expect("dimension matches"));
                    f(&x)
                })
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Smallest coordinate-12 value over sampled boundary points.
pub fn sampled_min_coordinate(e: &SymEllipsoid, samples: usize, seed: u64) -> Result<f64> {
    let vals = map_boundary_samples(e, samples, seed, |x| x.get(1, 2))?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Per-sample outcome: the constraint with the least slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub sample_index: usize,
    pub min_slack_constraint_kind: &'static str,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentAudit {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub min_slack: f64,
    pub violations: usize,
    /// Slack of the triangle facet at `p`.
    pub triangle_contact_slack: f64,
    /// Slack of the bound facet at `q`.
    pub bound_contact_slack: f64,
    pub passed: bool,
    #[serde(skip)]
    pub rows: Vec<AuditRow>,
}

impl ContainmentAudit {
    pub const CSV_HEADER: &'static str = "sample_index,min_slack_constraint_kind,min_slack";
}

/// Samples `c + A u` for uniform unit `u` and checks every facet.
pub fn containment_audit(e: &SymEllipsoid, samples: usize, seed: u64) -> Result<ContainmentAudit> {
    if e.n > MAX_AUDIT_N {
        return Err(Error::TooLarge {
            n: e.n,
            limit: MAX_AUDIT_N,
            what: "containment audit",
        });
    }
    let fs = FacetSystem::build(e.n)?;
    let results = map_boundary_samples(e, samples, seed, |x| {
        let m = fs.membership(x).expect("dimension matches");
        (m.min_slack, fs.constraints()[m.argmin].kind.label())
    })?;
    let rows: Vec<AuditRow> = results
        .into_iter()
        .enumerate()
        .map(|(sample_index, (min_slack, kind))| AuditRow {
            sample_index,
            min_slack_constraint_kind: kind,
            min_slack,
        })
        .collect();
    let min_slack = rows
        .iter()
        .map(|r| r.min_slack)
        .fold(f64::INFINITY, f64::min);
    let violations = rows
        .iter()
        .filter(|r| r.min_slack < -TOL_MEMBERSHIP)
        .count();
    let contacts = contact_points(e)?;
    let triangle_contact_slack = -triangle_normal(e.n).dot(&contacts.p);
    let bound_contact_slack = 1.0 - contacts.q.get(1, 2);
    let passed = violations == 0
        && triangle_contact_slack.abs() <= TOL_TANGENCY
        && bound_contact_slack.abs() <= TOL_TANGENCY;
    Ok(ContainmentAudit {
        n: e.n,
        samples,
        seed,
        min_slack,
        violations,
        triangle_contact_slack,
        bound_contact_slack,
        passed,
        rows,
    })
}

/// Dilations of 0/1 vectors against a bound `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerAudit {
    pub n: usize,
    pub points: usize,
    pub exhaustive: bool,
    pub max_dilation: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Checks `dilation(x) <= r_upper + 1e-9` over all 0/1 vectors when
/// `n <= MAX_EXHAUSTIVE_CORNER_N`, and otherwise over every cut metric plus
/// `samples` random 0/1 vectors.
pub fn corner_audit(e: &SymEllipsoid, samples: usize, seed: u64) -> Result<CornerAudit> {
    let n = e.n;
    let dim = num_pairs(n);
    let bound = r_upper(e)?;
    let (points, max_dilation, exhaustive) = if n <= MAX_EXHAUSTIVE_CORNER_N {
        let mut worst = 0.0f64;
        for mask in 0u64..1 << dim {
            let x =
                PairVector::from_entries(n, (0..dim).map(|k| ((mask >> k) & 1) as f64).collect())?;
            worst = worst.max(dilation_of_point(e, &x)?);
        }
        (1usize << dim, worst, true)
    } else {
        let mut worst = 0.0f64;
        let mut count = 0;
        if n <= crate::metric_polytope::MAX_CUT_ENUMERATION {
            for c in cuts(n)? {
                worst = worst.max(dilation_of_point(e, &c.vector)?);
                count += 1;
            }
        }
        let coin = Bernoulli::new(0.5).expect("valid probability");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x: Vec<f64> = (0..dim)
                .map(|_| coin.sample(&mut rng) as u8 as f64)
                .collect();
            worst = worst.max(dilation_of_point(e, &PairVector::from_entries(n, x)?)?);
            count += 1;
        }
        (count, worst, false)
    };
    Ok(CornerAudit {
        n,
        points,
        exhaustive,
        max_dilation,
        bound,
        passed: max_dilation <= bound + 1e-9,
    })
}

/// Inflation factors, minimal coordinate and contact points for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub n: usize,
    pub inner: SymEllipsoid,
    pub outer_radius: f64,
    pub shrink_factor: f64,
    pub r_upper: f64,
    pub r_lower: f64,
    pub min_distance: f64,
    pub contacts: ContactPoints,
    pub kkt_residual: f64,
}

impl SandwichReport {
    pub fn build(solved: &SolveResult) -> Result<Self> {
        let e = solved.ellipsoid;
        Ok(Self {
            n: e.n,
            inner: e,
            outer_radius: outer_radius(e.n)?,
            shrink_factor: shrink_factor(e.n)?,
            r_upper: r_upper(&e)?,
            r_lower: r_lower(&e)?,
            min_distance: min_distance(&e),
            contacts: contact_points(&e)?,
            kkt_residual: solved.kkt_residual,
        })
    }

    pub fn to_json(&self) -> SandwichReportJson {
        SandwichReportJson {
            n: self.n,
            inner: self.inner.to_json(),
            outer_radius: self.outer_radius,
            shrink_factor: self.shrink_factor,
            r_upper: self.r_upper,
            r_lower: self.r_lower,
            min_distance: self.min_distance,
            contact_triangle: self.contacts.p.as_slice().to_vec(),
            contact_bound: self.contacts.q.as_slice().to_vec(),
            kkt_residual: self.kkt_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SandwichReportJson {
    pub n: usize,
    pub inner: SymEllipsoidJson,
    pub outer_radius: f64,
    pub shrink_factor: f64,
    pub r_upper: f64,
    pub r_lower: f64,
    pub min_distance: f64,
    pub contact_triangle: Vec<f64>,
    pub contact_bound: Vec<f64>,
    pub kkt_residual: f64,
}
