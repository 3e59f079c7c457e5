use std::fmt;

use rug::{Float, Integer, Rational};

/// Dense polynomial with big-integer coefficients, `coeffs[i]` multiplies `y^i`.
///
/// Invariant: the highest stored coefficient is nonzero; the zero polynomial
/// has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

/// Dense polynomial with big-rational coefficients. Same invariant as
/// [`IntPoly`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Integer::from(1))
    }

    pub fn constant(c: Integer) -> Self {
        Self::new(vec![c])
    }

    /// `a + b y`
    pub fn linear(a: i64, b: i64) -> Self {
        Self::from_i64(&[a, b])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Coefficient of `y^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Integer {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    /// Index of the lowest nonzero coefficient.
    pub fn lowest_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    pub fn derivative(&self) -> IntPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c * i as u64))
                .collect(),
        )
    }

    pub fn scale(&self, k: &Integer) -> IntPoly {
        Self::new(self.coeffs.iter().map(|c| Integer::from(c * k)).collect())
    }

    /// Multiply by `y^k`.
    pub fn shift(&self, k: usize) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![Integer::new(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPoly { coeffs }
    }

    pub fn eval_int(&self, y: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    pub fn eval_rational(&self, y: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    /// Horner evaluation at working precision `prec`.
    pub fn eval_float(&self, y: &Float, prec: u32) -> Float {
        let mut acc = Float::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    /// `Σ |c_i|`; bounds `|p(y)| / y^deg` for `y ≥ 1`.
    pub fn abs_coeff_sum(&self) -> Integer {
        self.coeffs.iter().map(|c| Integer::from(c.abs_ref())).sum()
    }

    /// Exact quotient `self / d`.
    ///
    /// Returns `None` if `d` is zero or the division leaves a remainder or a
    /// non-integral quotient coefficient.
    pub fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        let dd = d.degree()?;
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        let nd = self.degree()?;
        if nd < dd {
            return None;
        }
        let lead = d.leading()?;
        let mut rem = self.coeffs.clone();
        let mut q = vec![Integer::new(); nd - dd + 1];
        for i in (0..=nd - dd).rev() {
            let top = &rem[i + dd];
            if *top == 0 {
                continue;
            }
            if !top.is_divisible(lead) {
                return None;
            }
            let qi = Integer::from(top.div_exact_ref(lead));
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i + j] -= Integer::from(&qi * dc);
            }
            q[i] = qi;
        }
        if rem.iter().any(|c| *c != 0) {
            return None;
        }
        Some(IntPoly::new(q))
    }

    pub fn to_rat(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(Rational::from).collect())
    }
}

fn add_vecs<T: Clone + Default>(a: &[T], b: &[T], f: impl Fn(&T, &T) -> T) -> Vec<T> {
    let n = a.len().max(b.len());
    let zero = T::default();
    (0..n)
        .map(|i| f(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
        .collect()
}

impl std::ops::Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        IntPoly::new(add_vecs(&self.coeffs, &rhs.coeffs, |a, b| Integer::from(a + b)))
    }
}

impl std::ops::Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        IntPoly::new(add_vecs(&self.coeffs, &rhs.coeffs, |a, b| Integer::from(a - b)))
    }
}

impl std::ops::Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += Integer::from(a * b);
            }
        }
        IntPoly::new(out)
    }
}

impl std::ops::Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| Integer::from(-c)).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().map(|c| (c.cmp0(), c.to_string())))
    }
}

fn write_terms(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (std::cmp::Ordering, String)>,
) -> fmt::Result {
    let mut first = true;
    for (i, (sign, s)) in terms.enumerate() {
        if sign == std::cmp::Ordering::Equal {
            continue;
        }
        let body = s.trim_start_matches('-');
        let neg = sign == std::cmp::Ordering::Less;
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { "-" } else { "+" })?;
        }
        match i {
            0 => write!(f, "{body}")?,
            1 => write!(f, "{body}y")?,
            _ => write!(f, "{body}y^{i}")?,
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn scale(&self, k: &Rational) -> RatPoly {
        Self::new(self.coeffs.iter().map(|c| Rational::from(c * k)).collect())
    }

    pub fn eval(&self, y: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, y: &Float, prec: u32) -> Float {
        let mut acc = Float::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= y;
            acc += c;
        }
        acc
    }

    /// The integer polynomial, if every coefficient is integral.
    pub fn to_int(&self) -> Option<IntPoly> {
        self.coeffs
            .iter()
            .map(|c| (*c.denom() == 1).then(|| c.numer().clone()))
            .collect::<Option<Vec<_>>>()
            .map(IntPoly::new)
    }
}

impl std::ops::Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        RatPoly::new(add_vecs(&self.coeffs, &rhs.coeffs, |a, b| Rational::from(a + b)))
    }
}

impl std::ops::Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        RatPoly::new(add_vecs(&self.coeffs, &rhs.coeffs, |a, b| Rational::from(a - b)))
    }
}

impl std::ops::Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        RatPoly::new(out)
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().map(|c| (c.cmp0(), c.to_string())))
    }
}
