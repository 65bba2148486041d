//! The circumscribed ball of `M_n` and its John certificate.
//!
//! Every cut metric sits at distance `√C(n,2) / 2` from the all-½ point, and
//! the recentred, normalized cut metrics form a tight frame with equal
//! weights. That decomposition certifies the ball as the minimum-volume
//! enclosing ellipsoid.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_polytope::{cuts, ConstraintKind, CutMetric, FacetSystem, LinearConstraint};
use crate::pairspace::{check_n, num_pairs, PairVector};
use crate::sym_ellipsoid::SymEllipsoid;

/// Largest `n` for which the certificate is built (`2^{n-1}` contact points).
pub const MAX_JOHN_N: usize = 16;
/// Residual threshold for a valid certificate.
pub const CERTIFICATE_TOL: f64 = 1e-12;
/// Beyond this `n` facet distances are taken from one representative per family.
const MAX_FACET_SCAN_N: usize = 40;
const CHUNK: usize = 256;

pub fn outer_radius(n: usize) -> Result<f64> {
    check_n(n)?;
    Ok(0.5 * (num_pairs(n) as f64).sqrt())
}

/// The ball of radius `√C(n,2) / 2` about the all-½ point, as the
/// invariant ellipsoid `(r, 0, 0, ½)`.
pub fn outer_ball(n: usize) -> Result<SymEllipsoid> {
    SymEllipsoid::new(n, outer_radius(n)?, 0.0, 0.0, 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohnCertificate {
    pub n: usize,
    pub contact_points: Vec<PairVector>,
    /// Canonical cut side for each contact point.
    pub cut_sets: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    /// `‖Σ λ_i u_i‖∞`.
    pub barycenter_residual: f64,
    /// `‖Σ λ_i u_i u_iᵀ - I‖∞`.
    pub identity_residual: f64,
    /// The same residuals over the nontrivial cuts only, with the weight
    /// `C(n,2) / (2^{n-1} - 1)`.
    pub nontrivial_barycenter_residual: f64,
    pub nontrivial_identity_residual: f64,
}

impl JohnCertificate {
    pub fn num_contacts(&self) -> usize {
        self.contact_points.len()
    }

    pub fn lambda(&self) -> f64 {
        self.weights.first().copied().unwrap_or(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.barycenter_residual <= CERTIFICATE_TOL && self.identity_residual <= CERTIFICATE_TOL
    }

    pub fn to_json(&self, verbose: bool) -> JohnCertificateJson {
        JohnCertificateJson {
            n: self.n,
            num_contacts: self.num_contacts(),
            lambda: self.lambda(),
            barycenter_residual: self.barycenter_residual,
            identity_residual: self.identity_residual,
            nontrivial_barycenter_residual: verbose.then_some(self.nontrivial_barycenter_residual),
            nontrivial_identity_residual: verbose.then_some(self.nontrivial_identity_residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnCertificateJson {
    pub n: usize,
    pub num_contacts: usize,
    pub lambda: f64,
    pub barycenter_residual: f64,
    pub identity_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nontrivial_barycenter_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nontrivial_identity_residual: Option<f64>,
}

/// `(2 δ(S) - 1) / √C(n,2)`.
pub fn contact_point(cut: &CutMetric) -> PairVector {
    let scale = 1.0 / (cut.vector.len() as f64).sqrt();
    let mut u = cut.vector.shifted(0.5);
    for v in u.as_mut_slice() {
        *v *= 2.0 * scale;
    }
    u
}

/// `(Σ w u, Σ w u uᵀ)` accumulated in fixed chunks and summed in order.
fn accumulate(points: &[PairVector], weight: f64, dim: usize) -> (Vec<f64>, DMatrix<f64>) {
    let partials: Vec<(Vec<f64>, DMatrix<f64>)> = points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut s = vec![0.0; dim];
            let mut m = DMatrix::zeros(dim, dim);
            for u in chunk {
                let u = u.as_slice();
                for k in 0..dim {
                    s[k] += weight * u[k];
                    let wk = weight * u[k];
                    for l in 0..dim {
                        m[(k, l)] += wk * u[l];
                    }
                }
            }
            (s, m)
        })
        .collect();
    let mut s = vec![0.0; dim];
    let mut m = DMatrix::zeros(dim, dim);
    for (ps, pm) in partials {
        for (a, b) in s.iter_mut().zip(ps) {
            *a += b;
        }
        m += pm;
    }
    (s, m)
}

fn residuals(s: &[f64], mut m: DMatrix<f64>) -> (f64, f64) {
    let bary = s.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for k in 0..m.nrows() {
        m[(k, k)] -= 1.0;
    }
    (bary, m.amax())
}

/// Contact points and weights over all `2^{n-1}` cuts, including `δ(∅)`.
pub fn john_certificate(n: usize) -> Result<JohnCertificate> {
    check_n(n)?;
    if n > MAX_JOHN_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_JOHN_N,
            what: "John certificate",
        });
    }
    let dim = num_pairs(n);
    let (cut_sets, contact_points): (Vec<_>, Vec<_>) =
        cuts(n)?.map(|c| (c.set.clone(), contact_point(&c))).unzip();
    let m = contact_points.len();
    let lambda = dim as f64 / m as f64;
    let (s, mm) = accumulate(&contact_points, lambda, dim);
    let (barycenter_residual, identity_residual) = residuals(&s, mm);

    // the trivial cut comes first
    let lambda_nt = dim as f64 / (m - 1) as f64;
    let (s, mm) = accumulate(&contact_points[1..], lambda_nt, dim);
    let (nontrivial_barycenter_residual, nontrivial_identity_residual) = residuals(&s, mm);

    Ok(JohnCertificate {
        n,
        contact_points,
        cut_sets,
        weights: vec![lambda; m],
        barycenter_residual,
        identity_residual,
        nontrivial_barycenter_residual,
        nontrivial_identity_residual,
    })
}

/// Distances from the all-½ point to the nearest triangle facet and to the
/// nearest diameter-bound facet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterDistances {
    pub triangle: f64,
    pub bound: f64,
}

fn facet_distance(c: &LinearConstraint, p: &PairVector) -> f64 {
    c.slack(p.as_slice()) / c.normal_norm()
}

pub fn center_distances(n: usize) -> Result<CenterDistances> {
    check_n(n)?;
    let p = PairVector::constant(n, 0.5);
    let mut out = CenterDistances {
        triangle: f64::INFINITY,
        bound: f64::INFINITY,
    };
    let facets: Vec<LinearConstraint> = if n <= MAX_FACET_SCAN_N {
        FacetSystem::build(n)?.constraints().to_vec()
    } else {
        vec![
            LinearConstraint::triangle(n, 1, 2, 3),
            LinearConstraint::bound(n, 1, 2),
        ]
    };
    for c in &facets {
        let d = facet_distance(c, &p);
        let slot = match c.kind {
            ConstraintKind::Triangle { .. } => &mut out.triangle,
            ConstraintKind::DiameterBound { .. } => &mut out.bound,
        };
        *slot = slot.min(d);
    }
    Ok(out)
}

/// Radius of the largest ball about the all-½ point inside `M_n`.
pub fn centered_inscribed_ball(n: usize) -> Result<f64> {
    let d = center_distances(n)?;
    Ok(d.triangle.min(d.bound))
}

/// Outer radius over the centred inscribed radius.
pub fn shrink_factor(n: usize) -> Result<f64> {
    Ok(outer_radius(n)? / centered_inscribed_ball(n)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterReport {
    pub n: usize,
    pub radius: f64,
    pub center: f64,
    pub inscribed_radius: f64,
    pub triangle_distance: f64,
    pub bound_distance: f64,
    pub shrink_factor: f64,
}

pub fn outer_report(n: usize) -> Result<OuterReport> {
    let ball = outer_ball(n)?;
    let d = center_distances(n)?;
    let inscribed = d.triangle.min(d.bound);
    Ok(OuterReport {
        n,
        radius: ball.alpha,
        center: ball.delta,
        inscribed_radius: inscribed,
        triangle_distance: d.triangle,
        bound_distance: d.bound,
        shrink_factor: ball.alpha / inscribed,
    })
}
