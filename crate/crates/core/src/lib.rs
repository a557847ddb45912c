//! Zeros of random polynomials and their limiting distributions.
//!
//! The crate draws random polynomials from several ensembles (i.i.d.
//! coefficients on monomials, orthonormal bases or weighted arrays, and a
//! two-variable family), finds their zeros, and measures how far the
//! normalized zero-counting measure is from the predicted limit.

pub mod bases;
pub mod ensembles;
pub mod ext;
pub mod harness;
pub mod potential;
pub mod rngdist;
pub mod roots;
pub mod stats;
