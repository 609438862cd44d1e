//! Certified Szemerédi-type regularity decompositions `f = f_str + f_err +
//! f_unf` over finite probability spaces, for arbitrary k-semirings of
//! structured sets, driven by a martingale energy-increment loop.
//!
//! The crate provides:
//! - finite measure substrate (spaces, subsets, partitions, conditional
//!   expectation) in [`space`],
//! - k-semiring families and constructive set subtraction in [`semiring`],
//! - uniformity norms with exact and heuristic witness oracles in
//!   [`uniformity`],
//! - martingale difference sequences and L_p inequality verifiers in
//!   [`martingale`],
//! - the decomposition loop and its exact big-integer complexity bounds in
//!   [`decompose`] and [`bounds`],
//! - uniform partitions, hypercube regularity and graphon regularity in
//!   [`applications`].

pub mod applications;
pub mod bounds;
pub mod decompose;
pub mod error;
pub mod growth;
pub mod martingale;
pub mod semiring;
pub mod space;
pub mod uniformity;

pub use error::{Error, Result};

/// Default absolute tolerance for certificate comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
