//! Spectral counting, Weyl-law error terms and moment statistics for the
//! (2l+1)-dimensional Heisenberg manifolds `(H_l/Γ, g_l)`.
//!
//! Everything is expressed in the normalised spectral variable `x = t/(2π)`.
//! The crate is organised bottom-up:
//!
//! - [`params`]: the dimension parameter `l` and its derived constants.
//! - [`spectrum`]: exact eigenvalue counts and the sawtooth (ψ) expression of
//!   the error term `R(2πx)`.
//! - [`tau`]: the divisor-type coefficient `τ_l(n)` and its truncated variant.
//! - [`surd`]: exact square-root relations and the singular series
//!   `s_{k;v}(f; y)`, `B_k(f; y)`.
//! - [`expansion`]: finite Fourier approximation of ψ and the truncated
//!   cosine expansion `F₁(x)`.
//! - [`moments`]: Monte-Carlo moments and distribution of the normalised
//!   error term, with predicted main terms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expansion;
pub mod moments;
pub mod params;
pub mod sampling;
pub mod spectrum;
pub mod surd;
pub mod tau;

pub use error::{Error, Result};
pub use params::ManifoldParams;
