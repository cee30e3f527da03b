//! Truncated multivariate series with a Laurent window in `z`.
//!
//! All generating-function objects of the workbench (I-functions, fundamental
//! solutions, gauge transformations, mirror maps, …) are stored as truncated
//! series in commuting "deformation" variables — Novikov variables first,
//! then parameter directions — whose coefficients are exact rational
//! functions of the torus parameters times integer powers of `z`.
//!
//! Series are truncated two ways:
//! - in the deformation variables, by per-variable caps and total-order caps
//!   fixed in a shared [`VariableScheme`] (quotient-ring semantics: products
//!   simply drop monomials beyond the caps, and coefficients within the caps
//!   stay exact);
//! - in `z`, by an *exactness window*: a contiguous range of `z`-powers where
//!   the stored coefficients are exactly right. Objects expanded at `z = ∞`
//!   have unknown coefficients below the window, objects expanded at `z = 0`
//!   above it; arithmetic tracks how windows shrink so that any in-window
//!   read is trustworthy and any out-of-window read is a hard error.

mod map;
mod matrix;
mod scheme;
mod trunc;

pub use map::{SeriesMap, VarImage};
pub use matrix::{ratfun_mat_inverse, ratfun_mat_mul, ratfun_mat_vec, SeriesMat};
pub use scheme::VariableScheme;
pub use trunc::{TruncSeries, Z_MAX, Z_MIN};
