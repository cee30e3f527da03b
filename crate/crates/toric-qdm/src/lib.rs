//! Exact-arithmetic workbench for the genus-zero quantum geometry of toric bundles.
//!
//! Given a toric bundle `E → B` presented by GIT data (an integer matrix `c`,
//! a set of fixed-point subsets `F`, and twisting classes `Λ_j` on the base),
//! this crate computes — entirely over exact rational functions in the torus
//! parameters `λ` — the truncated hypergeometric I-function of `E`, its
//! Birkhoff factorization (mirror map `σ̂` and gauge `R̂`), the equivariant
//! quantum product of `E`, the Landau–Ginzburg critical branches and formal
//! stationary-phase data of the fiber, and the fixed-point decomposition of
//! the quantum D-module of `E` into copies of that of `B`.
//!
//! Layering (bottom up):
//! - [`coeffs`]: rationals, multivariate polynomials in `λ`, their fraction
//!   field, and adjoined algebraic branch symbols.
//! - [`algebra`]: finite-rank graded cohomology algebras with Poincaré pairing.
//! - [`series`]: truncated multivariate power series (Novikov + parameters,
//!   Laurent in `z` within a window) with algebra-valued coefficients.
//! - [`toric`]: the bundle data model, fixed-point restrictions, localization.
//! - [`base`]: genus-zero data of the base (quantum product, fundamental
//!   solution, J-function; built-ins for the point and projective spaces).
//! - [`mirror`]: Landau–Ginzburg charts, critical branches, stationary phase.
//! - [`brown`]: the I-function, the big I-function, Γ̂/Exc bookkeeping, the
//!   M-matrix, and the hypergeometric identity check.
//! - [`decomp`]: the Birkhoff engine and the full decomposition pipeline with
//!   its verification suite.
//! - [`config`] / [`report`]: run configuration and machine-readable reports.

pub mod error;

pub mod coeffs;

pub mod algebra;
pub mod series;
pub mod toric;

pub mod base;
pub mod brown;
pub mod decomp;
pub mod mirror;

pub mod config;
pub mod presets;
pub mod report;

pub use error::{Error, Result};
