use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Round;
use rug::ops::{AddAssignRound, AssignRound};
use rug::Float;

use super::{ensure_wide_exponents, log10_abs, ERR_PREC};

/// Arbitrary-precision real paired with an absolute error estimate.
///
/// Arithmetic propagates the bound to first order and adds one rounding unit
/// of the result.
#[derive(Clone, Debug)]
pub struct HPReal {
    value: Float,
    err: Float,
}

fn up(x: &Float) -> Float {
    let mut e = Float::new(ERR_PREC);
    e.assign_round(&*x.as_abs(), Round::Up);
    e
}

fn rounding_unit(v: &Float) -> Float {
    // |v| * 2^(1 - prec)
    let mut e = up(v);
    e >>= v.prec().saturating_sub(1);
    e
}

impl HPReal {
    pub fn new(value: Float, err: Float) -> Self {
        ensure_wide_exponents();
        assert!(err.is_finite() && !err.is_sign_negative(), "error bound must be finite and nonnegative");
        HPReal {
            value,
            err: up(&err),
        }
    }

    /// A value with only its own rounding as error.
    pub fn rounded(value: Float) -> Self {
        let err = rounding_unit(&value);
        HPReal { value, err }
    }

    pub fn exact(value: Float) -> Self {
        HPReal {
            value,
            err: Float::new(ERR_PREC),
        }
    }

    pub fn from_int(prec: u32, v: i64) -> Self {
        Self::exact(Float::with_val(prec, v))
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn err(&self) -> &Float {
        &self.err
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.value, self.err)
    }

    pub fn prec(&self) -> u32 {
        self.value.prec()
    }

    /// Add `extra` to the error bound.
    pub fn widen(mut self, extra: &Float) -> Self {
        self.err.add_assign_round(&up(extra), Round::Up);
        self
    }

    /// Sign that survives the error bound, `None` if `|value| <= err`.
    pub fn certain_sign(&self) -> Option<Ordering> {
        if self.value.clone().abs() > self.err {
            self.value.cmp0()
        } else {
            None
        }
    }

    pub fn is_certainly_positive(&self) -> bool {
        self.certain_sign() == Some(Ordering::Greater)
    }

    pub fn is_certainly_negative(&self) -> bool {
        self.certain_sign() == Some(Ordering::Less)
    }

    /// Decimal digits separating `|value|` from `err` (`log10(|v|/err)`).
    pub fn significant_digits(&self) -> f64 {
        if self.err.is_zero() {
            return f64::INFINITY;
        }
        log10_abs(&self.value) - log10_abs(&self.err)
    }

    /// Value as a decimal string with `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        float_to_decimal(&self.value, sig)
    }

    pub fn err_decimal(&self) -> String {
        float_to_decimal(&self.err, 6)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn abs(&self) -> HPReal {
        HPReal {
            value: self.value.clone().abs(),
            err: self.err.clone(),
        }
    }

    pub fn mul_float(&self, k: &Float) -> HPReal {
        let value = Float::with_val(self.prec(), &self.value * k);
        let mut err = up(&Float::with_val(ERR_PREC, &self.err * k));
        err.add_assign_round(&rounding_unit(&value), Round::Up);
        HPReal { value, err }
    }

    pub fn div(&self, rhs: &HPReal) -> HPReal {
        let prec = self.prec().max(rhs.prec());
        let value = Float::with_val(prec, &self.value / &rhs.value);
        // |d(a/b)| <= (err_a + |a/b| err_b) / |b|
        let q = up(&value);
        let mut e = Float::with_val(ERR_PREC, &q * &rhs.err);
        e.add_assign_round(&self.err, Round::Up);
        let b = Float::with_val(ERR_PREC, &*rhs.value.as_abs());
        let mut err = Float::with_val(ERR_PREC, &e / &b);
        err.add_assign_round(&rounding_unit(&value), Round::Up);
        HPReal { value, err }
    }

    pub fn square(&self) -> HPReal {
        self * self
    }

    pub fn pow_u(&self, k: u32) -> HPReal {
        let mut acc = HPReal::from_int(self.prec(), 1);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

/// Scientific-notation decimal rendering, `d.ddd…e±x`.
pub(crate) fn float_to_decimal(x: &Float, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    // exponents can exceed i32 with the widened MPFR range
    let exp2 = if x.is_finite() { unsafe { gmp_mpfr_sys::mpfr::get_exp(x.as_raw()) } } else { 0 };
    if exp2.unsigned_abs() < 1 << 20 {
        return format!("{:.*e}", sig.max(1), x);
    }
    // the formatter sizes its buffer from the binary exponent, so split off
    // the decimal exponent first
    let prec = x.prec() + 64;
    let ln_abs = Float::with_val(prec, x.as_abs().ln_ref());
    let ln10 = Float::with_val(prec, 10u32).ln();
    let mut e10 = Float::with_val(prec, &ln_abs / &ln10).floor().to_integer().unwrap_or_default();
    let mut mant = Float::with_val(prec, &ln_abs - Float::with_val(prec, &ln10 * &e10)).exp();
    if mant >= 10u32 {
        mant /= 10u32;
        e10 += 1u32;
    } else if mant < 1u32 {
        mant *= 10u32;
        e10 -= 1u32;
    }
    if x.is_sign_negative() {
        mant = -mant;
    }
    let m = format!("{:.*e}", sig.max(1), Float::with_val(x.prec(), &mant));
    let (digits, exp) = m.split_once('e').unwrap_or((&m, "0"));
    let e = e10 + exp.parse::<i64>().unwrap_or(0);
    format!("{digits}e{e}")
}

impl fmt::Display for HPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.to_decimal(20), self.err_decimal())
    }
}

impl Add for &HPReal {
    type Output = HPReal;
    fn add(self, rhs: &HPReal) -> HPReal {
        let prec = self.prec().max(rhs.prec());
        let value = Float::with_val(prec, &self.value + &rhs.value);
        let mut err = self.err.clone();
        err.add_assign_round(&rhs.err, Round::Up);
        err.add_assign_round(&rounding_unit(&value), Round::Up);
        HPReal { value, err }
    }
}

impl Sub for &HPReal {
    type Output = HPReal;
    fn sub(self, rhs: &HPReal) -> HPReal {
        let prec = self.prec().max(rhs.prec());
        let value = Float::with_val(prec, &self.value - &rhs.value);
        let mut err = self.err.clone();
        err.add_assign_round(&rhs.err, Round::Up);
        err.add_assign_round(&rounding_unit(&value), Round::Up);
        HPReal { value, err }
    }
}

impl Mul for &HPReal {
    type Output = HPReal;
    fn mul(self, rhs: &HPReal) -> HPReal {
        let prec = self.prec().max(rhs.prec());
        let value = Float::with_val(prec, &self.value * &rhs.value);
        // |a| e_b + |b| e_a + e_a e_b
        let a = up(&self.value);
        let b = up(&rhs.value);
        let mut err = Float::with_val(ERR_PREC, &a * &rhs.err);
        err.add_assign_round(&Float::with_val(ERR_PREC, &b * &self.err), Round::Up);
        err.add_assign_round(&Float::with_val(ERR_PREC, &self.err * &rhs.err), Round::Up);
        err.add_assign_round(&rounding_unit(&value), Round::Up);
        HPReal { value, err }
    }
}

impl Neg for &HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal {
            value: Float::with_val(self.prec(), -&self.value),
            err: self.err.clone(),
        }
    }
}

impl Neg for HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal {
            value: -self.value,
            err: self.err,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for HPReal {
            type Output = HPReal;
            fn $m(self, rhs: HPReal) -> HPReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&HPReal> for HPReal {
            type Output = HPReal;
            fn $m(self, rhs: &HPReal) -> HPReal {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
