//! Verification toolkit for the Hankel-minor positivity conditions of the
//! Riemann xi kernel
//!
//! ```text
//!   Phi(u) = sum_{n>=1} (2 pi^2 n^4 e^{9u} - 3 pi n^2 e^{5u}) exp(-pi n^2 e^{4u})
//! ```
//!
//! The crate evaluates `Phi`, its derivatives and cumulants at arbitrary
//! precision, the moments `beta_n`, the minors `D(n, r)` of the Toeplitz
//! matrix built from them, Wronskian sign-regularity scans, and the exact
//! polynomial machinery (Csordas-Varga polynomials, Wronskian polynomials,
//! Gamma-ratio determinants and their large-`n` expansion coefficients).
//!
//! Floating values are MPFR numbers carried with an absolute error estimate
//! ([`HPReal`]); exact values are GMP integers and rationals.

pub mod asymptotics;
pub mod checks;
pub mod cvpoly;
pub mod determinant;
mod error;
pub mod numerics;
pub mod phi;
pub mod quadrature;
pub mod sign_regularity;

pub use error::{Error, Result};
pub use numerics::{HPReal, IntPoly, PrecCtx, RatPoly};
