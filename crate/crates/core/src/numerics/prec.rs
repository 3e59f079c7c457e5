use std::cell::Cell;

use gmp_mpfr_sys::mpfr;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Working-precision context shared by every floating computation.
///
/// `digits` is the decimal precision results are expected to carry;
/// `guard` extra digits absorb rounding and series truncation, which is cut
/// below `10^-(digits + guard)` relative to the leading term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecCtx {
    digits: u32,
    guard: u32,
}

impl Default for PrecCtx {
    fn default() -> Self {
        PrecCtx {
            digits: Self::DEFAULT_DIGITS,
            guard: Self::DEFAULT_GUARD,
        }
    }
}

impl PrecCtx {
    pub const DEFAULT_DIGITS: u32 = 100;
    pub const DEFAULT_GUARD: u32 = 20;
    pub const MIN_DIGITS: u32 = 30;
    pub const MIN_GUARD: u32 = 10;

    pub fn new(digits: u32, guard: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::invalid(format!(
                "precision must be at least {} digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        if guard < Self::MIN_GUARD {
            return Err(Error::invalid(format!(
                "guard must be at least {} digits, got {guard}",
                Self::MIN_GUARD
            )));
        }
        Ok(PrecCtx { digits, guard })
    }

    pub fn with_digits(digits: u32) -> Result<Self> {
        Self::new(digits, Self::DEFAULT_GUARD)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// Series and quadrature tails are cut below `10^-tail_tol_exponent`.
    pub fn tail_tol_exponent(&self) -> u32 {
        self.digits + self.guard
    }

    /// MPFR mantissa bits for `digits + guard` decimal digits.
    pub fn bits(&self) -> u32 {
        ensure_wide_exponents();
        (f64::from(self.digits + self.guard) * std::f64::consts::LOG2_10).ceil() as u32 + 8
    }

    /// Same guard, doubled digits.
    pub fn escalated(&self) -> Self {
        PrecCtx {
            digits: self.digits * 2,
            guard: self.guard,
        }
    }
}

/// Widen the MPFR exponent range of the current thread to the maximum
/// supported. `Phi` at `u = 10` is about `10^(-3e17)`, far below the default
/// range. MPFR keeps the range per thread.
pub fn ensure_wide_exponents() {
    thread_local!(static WIDE: Cell<bool> = const { Cell::new(false) });
    WIDE.with(|w| {
        if !w.get() {
            unsafe {
                mpfr::set_emin(mpfr::get_emin_min());
                mpfr::set_emax(mpfr::get_emax_max());
            }
            w.set(true);
        }
    });
}

/// `n!` exactly.
pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Outcome of an escalating evaluation.
#[derive(Clone, Debug)]
pub struct Escalated<T> {
    pub value: T,
    pub ctx: PrecCtx,
    pub escalations: u32,
}

/// Highest precision reached by [`escalate`].
pub const ESCALATION_CEILING: u32 = 3200;

/// Run `f` at `ctx`, doubling the digits while it reports
/// [`Error::PrecisionExhausted`] or `accept` rejects the value.
pub fn escalate<T>(
    ctx: &PrecCtx,
    what: &str,
    mut f: impl FnMut(&PrecCtx) -> Result<T>,
    accept: impl Fn(&T) -> bool,
) -> Result<Escalated<T>> {
    let mut c = *ctx;
    let mut escalations = 0;
    loop {
        match f(&c) {
            Ok(v) if accept(&v) => {
                return Ok(Escalated {
                    value: v,
                    ctx: c,
                    escalations,
                })
            }
            Ok(_) | Err(Error::PrecisionExhausted { .. }) => {}
            Err(e) => return Err(e),
        }
        if c.digits() * 2 > ESCALATION_CEILING {
            return Err(Error::EscalationCeiling {
                what: what.to_string(),
                ceiling: ESCALATION_CEILING,
            });
        }
        c = c.escalated();
        escalations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(PrecCtx::new(29, 20).is_err());
        assert!(PrecCtx::new(30, 9).is_err());
        assert!(PrecCtx::new(30, 10).is_ok());
    }

    #[test]
    fn bits_cover_digits() {
        let ctx = PrecCtx::default();
        assert!(f64::from(ctx.bits()) >= 120.0 * std::f64::consts::LOG2_10);
        assert_eq!(ctx.escalated().digits(), 200);
    }

    #[test]
    fn escalation_doubles_until_accepted() {
        let ctx = PrecCtx::with_digits(50).unwrap();
        let r = escalate(&ctx, "probe", |c| Ok(c.digits()), |d| *d >= 300).unwrap();
        assert_eq!(r.value, 400);
        assert_eq!(r.escalations, 3);
        let e = escalate(&ctx, "probe", |c| Ok(c.digits()), |_| false);
        assert!(matches!(e, Err(Error::EscalationCeiling { .. })));
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(5), 120);
        assert_eq!(factorial(20), Integer::from(2432902008176640000u64));
        for n in 0..50u32 {
            assert_eq!(factorial(n + 1), factorial(n) * (n + 1));
        }
    }
}
