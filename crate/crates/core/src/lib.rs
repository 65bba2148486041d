//! Inner and outer Löwner-John ellipsoids of the metric polytope `M_n`.
//!
//! `M_n` is the set of all `n`-point metric spaces with diameter at most 1,
//! viewed as a polytope in `R^{C(n,2)}`. This crate builds its facets and cut
//! metrics, solves the symmetry-reduced program for its maximum-volume
//! inscribed ellipsoid, cross-checks it against a generic inscribed-ellipsoid
//! solver, certifies the circumscribed ball through a John decomposition over
//! cut metrics, and reports the resulting sandwich factors.

pub mod error;
pub mod inner_solver;
pub mod metric_polytope;
pub mod mve_oracle;
pub mod outer_certificate;
pub mod pairspace;
pub mod report;
pub mod sandwich_analysis;
pub mod sym_ellipsoid;

pub use error::{Error, Result};
pub use inner_solver::{asymptotic_table, solve_inner, SolveOptions, SolveResult};
pub use metric_polytope::{all_cuts, cut_metric, FacetSystem, Halfspaces};
pub use mve_oracle::{solve_mve, symmetry_average, GeneralEllipsoid, OracleOptions, OracleResult};
pub use outer_certificate::{
    centered_inscribed_ball, john_certificate, outer_ball, JohnCertificate,
};
pub use pairspace::{apply_permutation, flatten, num_pairs, unflatten, PairVector, Permutation};
pub use sandwich_analysis::SandwichReport;
pub use sym_ellipsoid::{Spectrum, SymEllipsoid};
