//! Arithmetic layer: precision context, error-carrying reals, exact
//! polynomials and determinant evaluators.

mod det;
mod hpreal;
mod poly;
mod prec;

pub use det::{det_exact, det_float, det_int, det_poly, DetFloatOptions};
pub use hpreal::HPReal;
pub(crate) use hpreal::float_to_decimal;
pub use poly::{IntPoly, RatPoly};
pub use prec::{ensure_wide_exponents, escalate, factorial, Escalated, PrecCtx, ESCALATION_CEILING};

use rug::Float;

/// Precision (bits) used for error bounds.
pub(crate) const ERR_PREC: u32 = 64;

/// `log10 |x|` as an f64 (no overflow for huge exponents).
pub fn log10_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if !x.is_finite() {
        return f64::INFINITY;
    }
    // exponents can exceed i32 with the widened MPFR range
    let mut exp: std::os::raw::c_long = 0;
    let mant = unsafe { gmp_mpfr_sys::mpfr::get_d_2exp(&mut exp, x.as_raw(), gmp_mpfr_sys::mpfr::rnd_t::RNDN) };
    mant.abs().log10() + exp as f64 * std::f64::consts::LOG10_2
}

