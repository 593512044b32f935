//! Exact computation with bi-indexed q-analogues of multiple zeta values.
//!
//! The crate provides:
//!
//! - [`exact`]: Bernoulli numbers, Eulerian polynomials and binomials over ℚ.
//! - [`qseries`]: truncated power series in `q` with exact rational
//!   coefficients, including the normalized Eisenstein series `G̃_k`.
//! - [`brackets`]: the bi-indexed q-series `g(k₁,…,k_r; d₁,…,d_r)` together
//!   with their stuffle product, shuffle product, partition relation and
//!   derivative formula, all as exact linear combinations that can be
//!   evaluated and checked coefficientwise.
//! - [`mseries`]: total-degree-truncated power series in `X₁, X₂, Y₁, Y₂`
//!   over a pluggable coefficient ring, with linear substitution and divided
//!   differences. This is the engine behind all generating-series identities.
//! - [`formal`]: the formal double zeta space and the formal double
//!   Eisenstein space as exact rational vector spaces, with span-membership
//!   certificates obtained by Gaussian elimination.
//! - [`realize`]: the Bernoulli and Eisenstein realizations of the formal
//!   double Eisenstein space, used to derive identities among quasi-modular
//!   forms (e.g. the Ramanujan differential equations) as exact certificates.
//! - [`analytic`]: floating-point oracles for multiple zeta values and the
//!   `q → 1` limits of the q-series.
//!
//! All algebraic computations are exact; floating point only appears in
//! [`analytic`].

pub mod analytic;
pub mod brackets;
pub mod error;
pub mod exact;
pub mod formal;
pub mod mseries;
pub mod qseries;
pub mod rational;
pub mod realize;

pub use error::Error;
pub use rational::{parse_rat, rat, rat_int, Int, Rat};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
