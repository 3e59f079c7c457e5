//! Minors `D(n, r) = det[beta_{n+j-i}]` of the Toeplitz matrix of moments,
//! the Gamma-ratio determinants `Delta(n, r)` and their normalised
//! polynomial form, and the power series of `Xi`.

use rug::{Float, Integer, Rational};

use crate::cvpoly::epsilon;
use crate::numerics::{det_exact, det_float, escalate, factorial, HPReal, IntPoly, PrecCtx, ERR_PREC};
use crate::quadrature::{b_moment, beta, beta_with_table, BetaTable};
use crate::{Error, Result};

/// Significant digits a minor must keep before it is reported.
pub const MIN_SIG_DIGITS: f64 = 10.0;

/// Order `r` minor starting at column offset `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MinorSpec {
    pub n: usize,
    pub r: usize,
}

impl MinorSpec {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("minor order must be positive"));
        }
        Ok(MinorSpec { n, r })
    }

    /// Moment index at `(i, j)` (zero based), `None` below the band.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        (self.n + j).checked_sub(i)
    }

    /// Number of structural zeros.
    pub fn zero_count(&self) -> usize {
        (0..self.r)
            .flat_map(|i| (0..self.r).map(move |j| (i, j)))
            .filter(|&(i, j)| self.index(i, j).is_none())
            .count()
    }
}

/// A minor with the precision it needed.
#[derive(Clone, Debug)]
pub struct MinorValue {
    pub spec: MinorSpec,
    pub value: HPReal,
    pub digits_used: u32,
    pub escalations: u32,
}

fn accept(v: &HPReal) -> bool {
    if v.value().is_zero() {
        return false;
    }
    let ten_err = Float::with_val(ERR_PREC, v.err() * 10u32);
    v.significant_digits() >= MIN_SIG_DIGITS && *v.value().as_abs() > ten_err
}

/// The matrix of `D(n, r)` at `ctx`, zeros below the band.
pub fn minor_matrix(spec: MinorSpec, ctx: &PrecCtx, table: &BetaTable) -> Result<Vec<Vec<HPReal>>> {
    let bits = ctx.bits();
    table.ensure(spec.n + spec.r - 1, ctx)?;
    (0..spec.r)
        .map(|i| {
            (0..spec.r)
                .map(|j| match spec.index(i, j) {
                    Some(k) => beta_with_table(k, ctx, table),
                    None => Ok(HPReal::exact(Float::new(bits))),
                })
                .collect()
        })
        .collect()
}

/// `D(n, r)` with precision doubled until it keeps [`MIN_SIG_DIGITS`] and
/// clears ten times its error bound.
pub fn minor_with_table(spec: MinorSpec, ctx: &PrecCtx, table: &BetaTable) -> Result<MinorValue> {
    let what = format!("D({}, {})", spec.n, spec.r);
    let r = escalate(ctx, &what, |c| det_float(&minor_matrix(spec, c, table)?, c), accept)?;
    Ok(MinorValue {
        spec,
        value: r.value,
        digits_used: r.ctx.digits(),
        escalations: r.escalations,
    })
}

pub fn minor_report(spec: MinorSpec, ctx: &PrecCtx) -> Result<MinorValue> {
    minor_with_table(spec, ctx, BetaTable::global())
}

/// `D(n, r)`.
pub fn minor(spec: MinorSpec, ctx: &PrecCtx) -> Result<HPReal> {
    Ok(minor_report(spec, ctx)?.value)
}

/// `D(n, r)` assembled from the raw moments `b_k / (2k)!`; defined for `n > r`.
pub fn minor_via_bn(spec: MinorSpec, ctx: &PrecCtx) -> Result<HPReal> {
    if spec.n <= spec.r {
        return Err(Error::invalid(format!(
            "the raw-moment form needs n > r, got n = {}, r = {}",
            spec.n, spec.r
        )));
    }
    let what = format!("D({}, {}) from raw moments", spec.n, spec.r);
    let r = escalate(
        ctx,
        &what,
        |c| {
            let bits = c.bits();
            let m = (0..spec.r)
                .map(|i| {
                    (0..spec.r)
                        .map(|j| {
                            let k = spec.n + j - i;
                            let f = HPReal::rounded(Float::with_val(bits, factorial(2 * k as u32)));
                            Ok(b_moment(k, c)?.div(&f))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            det_float(&m, c)
        },
        accept,
    )?;
    Ok(r.value)
}

/// One checked inequality.
#[derive(Clone, Debug)]
pub struct ScanItem {
    pub label: String,
    pub value: HPReal,
    pub digits_used: u32,
    pub pass: bool,
    /// Relative margin or scaled value where one is meaningful.
    pub aux: Option<f64>,
}

/// A list of checked inequalities.
#[derive(Clone, Debug, Default)]
pub struct ScanReport {
    pub title: String,
    pub items: Vec<ScanItem>,
    /// Finite-grid evidence rather than a proof.
    pub non_rigorous: bool,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> Vec<&ScanItem> {
        self.items.iter().filter(|i| !i.pass).collect()
    }
}

/// `beta_n² - ((n+1)/n) beta_{n-1} beta_{n+1} > 0` for `n = 1..=n_max`.
///
/// `aux` is `beta_n² n / (beta_{n-1} beta_{n+1} (n+1)) - 1`.
pub fn turan_check(n_max: usize, ctx: &PrecCtx) -> Result<ScanReport> {
    if n_max < 1 {
        return Err(Error::invalid("turan_check needs n_max >= 1"));
    }
    let bits = ctx.bits();
    let b: Vec<HPReal> = (0..=n_max + 1).map(|k| beta(k, ctx)).collect::<Result<_>>()?;
    let mut items = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let k = HPReal::rounded(Float::with_val(bits, Rational::from((n as u32 + 1, n as u32))));
        let prod = &b[n - 1] * &b[n + 1];
        let value = &b[n].square() - &(&k * &prod);
        let ratio = b[n].square().div(&(&k * &prod));
        items.push(ScanItem {
            label: format!("n={n}"),
            pass: value.is_certainly_positive(),
            value,
            digits_used: ctx.digits(),
            aux: Some(ratio.to_f64() - 1.0),
        });
    }
    Ok(ScanReport {
        title: "Turan inequalities".into(),
        items,
        non_rigorous: false,
    })
}

/// The tabulated small-order values of `eta(r)`, `r = 2..=9`.
pub fn table_eta(r: usize) -> Option<usize> {
    const ETA: [usize; 8] = [1, 2, 3, 5, 6, 7, 8, 10];
    r.checked_sub(2).and_then(|i| ETA.get(i).copied())
}

/// Tabulated smallest sign-regular cumulant order for `r = 2..=9`.
pub fn table_m(r: usize) -> Option<usize> {
    const M: [usize; 8] = [0, 0, 0, 1, 1, 1, 2, 4];
    r.checked_sub(2).and_then(|i| M.get(i).copied())
}

/// `k_L = n_L + r - 1` with `n_L = ceil(m/2)`.
pub fn eta_from_m(r: usize, m: usize) -> usize {
    m.div_ceil(2) + r - 1
}

/// `D(n, r) > 0` for `n = 0..=eta(r)`, `r = 2..=r_max`. `eta` overrides the
/// tabulated values when given (indexed by `r`).
pub fn exceptional_scan(r_max: usize, eta: Option<&dyn Fn(usize) -> usize>, ctx: &PrecCtx) -> Result<ScanReport> {
    let mut items = Vec::new();
    for r in 2..=r_max {
        let top = match eta {
            Some(f) => f(r),
            None => table_eta(r).ok_or_else(|| Error::invalid(format!("no tabulated eta for r = {r}")))?,
        };
        for n in 0..=top {
            let v = minor_report(MinorSpec::new(n, r)?, ctx)?;
            items.push(ScanItem {
                label: format!("D({n},{r})"),
                pass: v.value.is_certainly_positive(),
                digits_used: v.digits_used,
                value: v.value,
                aux: None,
            });
        }
    }
    Ok(ScanReport {
        title: "exceptional minors".into(),
        items,
        non_rigorous: false,
    })
}

/// A permutation of `0..r` with its sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perm {
    pub image: Vec<usize>,
    pub sign: i32,
}

impl Perm {
    /// Offsets `image[i] - i`.
    pub fn offsets(&self) -> Vec<i64> {
        self.image.iter().enumerate().map(|(i, &q)| q as i64 - i as i64).collect()
    }
}

/// All permutations of `0..r` in lexicographic order (identity first).
pub fn permutations(r: usize) -> Vec<Perm> {
    let mut cur: Vec<usize> = (0..r).collect();
    let mut out = Vec::new();
    loop {
        let inversions = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .filter(|&(i, j)| cur[i] > cur[j])
            .count();
        out.push(Perm {
            image: cur.clone(),
            sign: if inversions % 2 == 0 { 1 } else { -1 },
        });
        // next lexicographic permutation
        let Some(i) = (0..r.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..r).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Multiplicity of `(1 + a y)` in the normalising prefactor.
fn prefactor_mult(r: usize, a: usize) -> i64 {
    r as i64 - a.div_ceil(2) as i64
}

/// Normalised Gamma-ratio term of one permutation as a polynomial in
/// `y = 1/(2n)`.
pub fn perm_component(r: usize, perm: &Perm) -> Result<IntPoly> {
    let mut mult: Vec<i64> = (0..=2 * (r - 1)).map(|a| if a == 0 { 0 } else { prefactor_mult(r, a) }).collect();
    let mut poly = IntPoly::one();
    for nu in perm.offsets() {
        if nu > 0 {
            for a in 1..=(2 * nu) as usize {
                if a >= mult.len() {
                    return Err(Error::invalid("Gamma-ratio factor outside the prefactor range"));
                }
                mult[a] -= 1;
            }
        } else {
            for a in 1..(2 * -nu) {
                poly = &poly * &IntPoly::linear(1, -a);
            }
        }
    }
    for (a, &k) in mult.iter().enumerate().skip(1) {
        if k < 0 {
            return Err(Error::invalid(format!("uncancelled denominator (2n+{a}) for r = {r}")));
        }
        for _ in 0..k {
            poly = &poly * &IntPoly::linear(1, a as i64);
        }
    }
    Ok(poly)
}

/// `bar Delta(n, r)` as an exact polynomial in `y = 1/(2n)` with its
/// per-permutation components.
#[derive(Clone, Debug)]
pub struct DeltaBarPoly {
    pub r: usize,
    pub poly: IntPoly,
    pub components: Vec<(Perm, IntPoly)>,
}

impl DeltaBarPoly {
    /// Coefficient of `y^i`.
    pub fn delta(&self, i: usize) -> Integer {
        self.poly.coeff(i)
    }

    pub fn coefficients(&self) -> Vec<Rational> {
        (0..=self.r * (self.r - 1)).map(|i| Rational::from(self.delta(i))).collect()
    }
}

pub fn delta_bar_poly(r: usize) -> Result<DeltaBarPoly> {
    if r < 2 {
        return Err(Error::invalid("delta_bar_poly needs r >= 2"));
    }
    let mut poly = IntPoly::zero();
    let mut components = Vec::new();
    for p in permutations(r) {
        let c = perm_component(r, &p)?;
        poly = if p.sign > 0 { &poly + &c } else { &poly - &c };
        components.push((p, c));
    }
    if poly.degree().is_some_and(|d| d > r * (r - 1)) {
        return Err(Error::invalid("normalised determinant exceeds its degree bound"));
    }
    Ok(DeltaBarPoly { r, poly, components })
}

/// `Gamma(2n+1) / Gamma(2(n+k)+1)` exactly.
fn gamma_ratio(n: usize, k: i64) -> Rational {
    let m = 2 * n as i64 + 2 * k;
    if m < 0 {
        return Rational::new();
    }
    Rational::from((factorial(2 * n as u32), factorial(m as u32)))
}

/// `Delta(n, r) = det[Gamma(2n+1) / Gamma(2(n+j-i)+1)]` exactly.
pub fn delta_exact(n: usize, r: usize) -> Result<Rational> {
    let m: Vec<Vec<Rational>> = (0..r)
        .map(|i| (0..r).map(|j| gamma_ratio(n, j as i64 - i as i64)).collect())
        .collect();
    det_exact(&m)
}

/// `(2n)^{-r(r-1)} Π_{i<r} ((2n+2i)(2n+2i-1))^{r-i}`.
pub fn delta_bar_prefactor(n: usize, r: usize) -> Rational {
    let mut num = Integer::from(1);
    for i in 1..r {
        let g = Integer::from(2 * n + 2 * i) * Integer::from(2 * n + 2 * i - 1);
        for _ in 0..r - i {
            num *= &g;
        }
    }
    let den = Integer::from(Integer::u_pow_u(2 * n as u32, (r * (r - 1)) as u32));
    Rational::from((num, den))
}

/// Row-reversed determinant sign: `det(J A) = epsilon(r) det A`.
pub fn row_reversal_sign(r: usize) -> i32 {
    epsilon(r)
}

/// Partial sum of `Xi(t) = Σ beta_n (-t²)^n`.
#[derive(Clone, Debug)]
pub struct XiValue {
    pub value: HPReal,
    pub terms: usize,
    /// Magnitude of the first omitted term.
    pub next_term: f64,
}

/// `Σ_{n < n_terms} beta_n (-t²)^n` with the tail bounded by twice the first
/// omitted term once the terms are decreasing geometrically.
pub fn xi_eval(t: &HPReal, n_terms: usize, ctx: &PrecCtx) -> Result<XiValue> {
    if n_terms < 2 {
        return Err(Error::invalid("xi_eval needs at least two terms"));
    }
    let bits = ctx.bits();
    let z = -&t.square();
    let mut sum = HPReal::exact(Float::new(bits));
    let mut zp = HPReal::exact(Float::with_val(bits, 1));
    let mut terms = Vec::with_capacity(n_terms + 2);
    for n in 0..n_terms + 2 {
        let term = &beta(n, ctx)? * &zp;
        if n < n_terms {
            sum = &sum + &term;
        }
        terms.push(term);
        zp = &zp * &z;
    }
    let a = |k: usize| Float::with_val(ERR_PREC, &*terms[k].value().as_abs());
    let (t0, t1, t2) = (a(n_terms - 1), a(n_terms), a(n_terms + 1));
    // successive ratios must be at most 1/2 for the doubled term to bound the tail
    let decreasing = Float::with_val(ERR_PREC, &t1 * 2u32) <= t0 && Float::with_val(ERR_PREC, &t2 * 2u32) <= t1;
    let tail = Float::with_val(ERR_PREC, &t1 * 2u32);
    let tol = Float::with_val(ERR_PREC, &*sum.value().as_abs())
        * Float::with_val(ERR_PREC, -f64::from(ctx.digits()) * std::f64::consts::LN_10).exp();
    if !decreasing || tail > tol {
        return Err(Error::TailTooLarge {
            tail: format!("{:.3e}", tail.to_f64()),
            tol: format!("{:.3e}", tol.to_f64()),
        });
    }
    Ok(XiValue {
        next_term: t1.to_f64(),
        value: sum.widen(&tail),
        terms: n_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::det_float;
    use crate::quadrature::{default_tol, integrate, QuadSpec};

    fn ctx() -> PrecCtx {
        PrecCtx::with_digits(60).unwrap()
    }

    #[test]
    fn small_minors_are_positive() {
        let c = ctx();
        let d13 = minor_report(MinorSpec::new(1, 3).unwrap(), &c).unwrap();
        assert!(d13.value.is_certainly_positive());
        let m = minor_matrix(MinorSpec::new(1, 3).unwrap(), &c, BetaTable::global()).unwrap();
        assert!(m[2][0].value().is_zero());
        assert_eq!(m[2][1].value(), beta(0, &c).unwrap().value());
        assert_eq!(m[2][2].value(), beta(1, &c).unwrap().value());

        let d00 = minor(MinorSpec::new(0, 1).unwrap(), &c).unwrap();
        assert_eq!(d00.value(), beta(0, &c).unwrap().value());

        let d52 = minor(MinorSpec::new(5, 2).unwrap(), &c).unwrap();
        let b: Vec<HPReal> = (4..=6).map(|k| beta(k, &c).unwrap()).collect();
        let direct = &b[1].square() - &(&b[0] * &b[2]);
        assert!(d52.is_certainly_positive());
        let diff = Float::with_val(c.bits(), d52.value() - direct.value()).abs();
        assert!(diff <= Float::with_val(ERR_PREC, d52.err() + direct.err()));
    }

    #[test]
    fn zero_padding_counts() {
        for r in 1..6 {
            for n in 0..6 {
                let s = MinorSpec::new(n, r).unwrap();
                let k = (r - 1).saturating_sub(n);
                assert_eq!(s.zero_count(), k * (k + 1) / 2, "n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn raw_moment_form_agrees() {
        let c = ctx();
        for (n, r) in [(6, 2), (8, 3), (10, 4)] {
            let s = MinorSpec::new(n, r).unwrap();
            let a = minor(s, &c).unwrap();
            let b = minor_via_bn(s, &c).unwrap();
            let diff = Float::with_val(c.bits(), a.value() - b.value()).abs();
            assert!(diff <= Float::with_val(ERR_PREC, a.err() + b.err()), "({n},{r})");
        }
        assert!(minor_via_bn(MinorSpec::new(3, 3).unwrap(), &c).is_err());
    }

    #[test]
    fn turan_holds_with_shrinking_margin() {
        let c = ctx();
        let rep = turan_check(12, &c).unwrap();
        assert!(rep.passed());
        let m: Vec<f64> = rep.items.iter().map(|i| i.aux.unwrap()).collect();
        assert!(m.last().unwrap() < m.first().unwrap());
    }

    #[test]
    fn eta_formula_matches_table() {
        let m = [0, 0, 0, 1, 1, 1, 2, 4];
        for (i, &mr) in m.iter().enumerate() {
            let r = i + 2;
            assert_eq!(eta_from_m(r, mr), table_eta(r).unwrap(), "r = {r}");
        }
    }

    #[test]
    fn permutation_enumeration() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0].image, vec![0, 1, 2]);
        assert_eq!(p[0].sign, 1);
        assert_eq!(p.iter().map(|q| q.sign).sum::<i32>(), 0);
        for q in &p {
            assert_eq!(q.offsets().iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn order_two_components() {
        let d = delta_bar_poly(2).unwrap();
        assert_eq!(d.components[0].1, IntPoly::from_i64(&[1, 3, 2]));
        assert_eq!(d.components[1].1, IntPoly::from_i64(&[1, -1]));
        assert_eq!(d.poly, IntPoly::from_i64(&[0, 4, 2]));
    }

    #[test]
    fn leading_zeros_of_normalised_determinant() {
        for r in 2..=5 {
            let d = delta_bar_poly(r).unwrap();
            for i in 0..r * (r - 1) / 2 {
                assert_eq!(d.delta(i), 0, "r = {r}, i = {i}");
            }
            assert!(d.poly.degree().unwrap() <= r * (r - 1));
        }
    }

    #[test]
    fn polynomial_form_matches_rational_determinant() {
        for r in 2..=5 {
            let d = delta_bar_poly(r).unwrap();
            for n in [r + 1, r + 4, 17, 40] {
                let exact = delta_exact(n, r).unwrap();
                assert!(exact > 0, "Delta({n},{r})");
                let y = Rational::from((1, 2 * n as u32));
                let lhs = d.poly.eval_rational(&y);
                let rhs = delta_bar_prefactor(n, r) * exact;
                assert_eq!(lhs, rhs, "n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn row_reversal_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for r in [3usize, 4] {
            for _ in 0..5 {
                let a: Vec<Vec<Rational>> = (0..r)
                    .map(|_| (0..r).map(|_| Rational::from((rng.gen_range(-9i32..10), rng.gen_range(1u32..5)))).collect())
                    .collect();
                let rev: Vec<Vec<Rational>> = a.iter().rev().cloned().collect();
                let d = det_exact(&a).unwrap();
                assert_eq!(det_exact(&rev).unwrap(), d * row_reversal_sign(r));
            }
        }
    }

    #[test]
    fn xi_series() {
        let c = ctx();
        let bits = c.bits();
        let zero = HPReal::exact(Float::new(bits));
        let x0 = xi_eval(&zero, 5, &c).unwrap();
        assert_eq!(x0.value.value(), beta(0, &c).unwrap().value());

        let t = HPReal::exact(Float::with_val(bits, 1));
        let x1 = xi_eval(&t, 30, &c).unwrap();
        assert!(x1.value.is_certainly_positive());
        // oracle: cosine transform by quadrature
        let f = |p: &crate::quadrature::QuadPoint<'_>| -> Result<HPReal> {
            let u = Float::with_val(bits + 20, p.lower + p.offset);
            let phi = crate::phi::phi_derivs(&u, 0, &crate::phi::PhiSeriesParams::new(c))?.pop().unwrap();
            Ok(phi.mul_float(&Float::with_val(bits, u.cos_ref())))
        };
        let spec = QuadSpec::finite(Float::new(bits), Float::with_val(bits, 2.5), default_tol(&c));
        let q = integrate(&f, &spec, &c).unwrap();
        let diff = Float::with_val(bits, q.value() - x1.value.value()).abs();
        assert!(diff < 1e-50_f64, "{diff}");
        assert!(xi_eval(&HPReal::exact(Float::with_val(bits, 40)), 5, &c).is_err());
    }

    #[test]
    fn escalation_reports_digits() {
        let c = PrecCtx::with_digits(30).unwrap();
        let v = minor_report(MinorSpec::new(2, 4).unwrap(), &c).unwrap();
        assert!(v.value.is_certainly_positive());
        assert!(v.digits_used >= 30);
        let m = minor_matrix(MinorSpec::new(2, 4).unwrap(), &PrecCtx::with_digits(v.digits_used).unwrap(), BetaTable::global()).unwrap();
        let again = det_float(&m, &PrecCtx::with_digits(v.digits_used).unwrap()).unwrap();
        assert_eq!(again.value(), v.value.value());
    }
}
