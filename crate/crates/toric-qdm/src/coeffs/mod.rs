//! Exact scalar coefficients.
//!
//! The scalar ring of the whole workbench is the field of rational functions
//! in the torus parameters `λ_1, …, λ_N` (plus, where a computation fixes a
//! branch of an algebraic function, an adjoined symbol with a monic defining
//! relation). This module provides:
//!
//! - [`Mono`]: exponent vectors with graded-lexicographic order,
//! - [`VarTable`]: the shared list of generators, their grading weights, and
//!   any adjoined branch relations,
//! - [`Poly`]: multivariate polynomials with `BigRational` coefficients,
//! - [`poly_gcd`]: exact multivariate GCD (primitive pseudo-remainder
//!   sequences),
//! - [`RatFun`]: the fraction field in canonical normalized form.

mod gcd;
mod monomial;
mod poly;
mod ratfun;
mod vars;

pub use gcd::poly_gcd;
pub use monomial::Mono;
pub use poly::Poly;
pub use ratfun::RatFun;
pub use vars::{BranchRel, VarTable};

/// Exact rational number used for all scalar coefficients.
pub type Rat = num::BigRational;

/// The integer `n` as a [`Rat`].
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// The fraction `n / d` as a [`Rat`]. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "rational with zero denominator");
    Rat::new(n.into(), d.into())
}
