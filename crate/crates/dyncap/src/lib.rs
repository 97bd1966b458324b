//! Arithmetic dynamics on the projective line over the rationals.
//!
//! This crate computes the quantities attached to a rational map
//! `phi : P^1 -> P^1` of degree `d >= 2` with rational coefficients that
//! potential theory and height theory care about:
//!
//! - normalized absolute values on Q and the product formula ([`places`]);
//! - exact arithmetic on homogeneous lifts `F = (F1, F2)`, resultants,
//!   iteration, and the per-place growth constants ([`forms`]);
//! - homogeneous local dynamical heights with certified error bounds and
//!   filled-Julia-set membership ([`local_heights`]);
//! - preimages, exceptional points, and backward-iteration sampling of the
//!   canonical measure ([`dynamics`]);
//! - the dynamical Arakelov Green's function and discrete energies
//!   ([`greens`]);
//! - global canonical heights of rational and algebraic points and the
//!   adelic pairing identity ([`global_heights`]);
//! - homogeneous transfinite diameters and the resultant determinant
//!   identity ([`capacities`]);
//! - equidistribution experiments for families of small points
//!   ([`equilab`]).
//!
//! Everything that can be exact is exact: coefficients, resultants and
//! determinants are arbitrary-precision rationals, finite-place absolute
//! values are tracked as integer valuations, and floating point enters only
//! through archimedean iteration (with explicit error bounds) and logs.
//!
//! The `dyncap` binary exposes each operation as a scriptable subcommand;
//! see the crate README for usage.

pub mod arith;
pub mod capacities;
pub mod dynamics;
pub mod equilab;
mod error;
pub mod forms;
pub mod global_heights;
pub mod greens;
pub mod local_heights;
pub mod places;
pub mod poly;
pub mod roots;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
