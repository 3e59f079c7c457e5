//! Exact Csordas-Varga polynomials and the Wronskian polynomials built from
//! them.
//!
//! The polynomials satisfy `p_1 = 2y - 3` and
//! `p_{k+1}(y) = 4y p_k'(y) + (5 - 4y) p_k(y)`, and the `n`-th term of the
//! `j`-th derivative of `Phi` is `pi n^2 p_{j+1}(pi n^2 e^{4u}) exp(5u - pi n^2 e^{4u})`.
//! Their coefficients `d(j, k)` have two closed forms (a "lower" one as a sum
//! over `(4 eta + 5)^{k-1}` and an "upper" one through the symmetric sums
//! `s_5`, `s_9`), both cross-checked against the recurrence.

use std::sync::{OnceLock, RwLock};

use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::numerics::{det_int, det_poly, factorial, IntPoly, PrecCtx};
use crate::{Error, Result};

/// `r(r-1)/2`.
pub fn mu(r: usize) -> usize {
    r * (r.saturating_sub(1)) / 2
}

/// `(-1)^{r(r-1)/2}`.
pub fn epsilon(r: usize) -> i32 {
    if mu(r).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// A CV polynomial together with its order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvPoly {
    pub k: usize,
    pub poly: IntPoly,
}

fn table() -> &'static RwLock<Vec<IntPoly>> {
    static TABLE: OnceLock<RwLock<Vec<IntPoly>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![IntPoly::from_i64(&[-3, 2])]))
}

fn next_cv(p: &IntPoly) -> IntPoly {
    let four_y = IntPoly::from_i64(&[0, 4]);
    let five_minus = IntPoly::from_i64(&[5, -4]);
    &(&four_y * &p.derivative()) + &(&five_minus * p)
}

/// `p_1, …, p_{k_max}` (index `k - 1`), memoized for the process.
pub fn cv_table(k_max: usize) -> Vec<IntPoly> {
    {
        let t = table().read().unwrap();
        if t.len() >= k_max {
            return t[..k_max].to_vec();
        }
    }
    let mut t = table().write().unwrap();
    while t.len() < k_max {
        let next = next_cv(t.last().unwrap());
        t.push(next);
    }
    t[..k_max].to_vec()
}

/// `p_k` by iterating the recurrence.
pub fn cv_poly(k: usize) -> Result<CvPoly> {
    if k == 0 {
        return Err(Error::invalid("CV polynomials start at k = 1"));
    }
    let poly = cv_table(k).pop().unwrap();
    Ok(CvPoly { k, poly })
}

/// Coefficient `d(j, k)` of `y^j` in `p_k`.
pub fn d_coeff(j: usize, k: usize) -> Integer {
    cv_poly(k).map(|p| p.poly.coeff(j)).unwrap_or_default()
}

/// `c(j, eta) = (-1)^{eta+1} (2 eta + 3) / (eta! (j - eta)!)`.
pub fn c_coeff(j: usize, eta: usize) -> Rational {
    assert!(eta <= j, "c(j, eta) needs eta <= j");
    let num = Integer::from(2 * eta + 3);
    let den = factorial(eta as u32) * factorial((j - eta) as u32);
    let v = Rational::from((num, den));
    if eta.is_multiple_of(2) {
        -v
    } else {
        v
    }
}

/// Lower representation `d(j, k) = Σ_{eta ≤ j} c(j, eta) (4 eta + 5)^{k-1}`.
///
/// The sum is defined for every `j`; it is an integer equal to the recurrence
/// coefficient for `j ≤ k` and vanishes for `j > k`.
pub fn lower_rep_coeff(j: usize, k: usize) -> Rational {
    assert!(k >= 1);
    (0..=j)
        .map(|eta| {
            let pow = Integer::from(Integer::u_pow_u(4 * eta as u32 + 5, k as u32 - 1));
            c_coeff(j, eta) * pow
        })
        .sum()
}

/// Table of the integers `s(i, j)` for a fixed base `k` (5 or 9).
///
/// Initialised with `s(i, 0) = 1`, `s(1, j) = k^j` and filled by
/// `s(i+1, j) = s(i, j) + s(i+1, j-1)(k + 4i)`; out-of-range indices
/// (`i ≤ 0` with `j ≥ 1`, or `j < 0`) read as zero.
#[derive(Clone, Debug)]
pub struct UpperRepTable {
    k_base: u32,
    s: Vec<Vec<Integer>>,
}

impl UpperRepTable {
    pub fn build(k_base: u32, i_max: usize, j_max: usize) -> Self {
        let mut s = vec![vec![Integer::new(); j_max + 1]; i_max + 1];
        for row in s.iter_mut().skip(1) {
            row[0] = Integer::from(1);
        }
        if i_max >= 1 {
            for j in 1..=j_max {
                s[1][j] = Integer::from(Integer::u_pow_u(k_base, j as u32));
            }
        }
        for i in 1..i_max {
            for j in 1..=j_max {
                let step = Integer::from(k_base + 4 * i as u32);
                let v = Integer::from(&s[i][j]) + Integer::from(&s[i + 1][j - 1] * &step);
                s[i + 1][j] = v;
            }
        }
        UpperRepTable { k_base, s }
    }

    pub fn k_base(&self) -> u32 {
        self.k_base
    }

    pub fn get(&self, i: i64, j: i64) -> Integer {
        if j < 0 || i <= 0 {
            return Integer::new();
        }
        self.s[i as usize][j as usize].clone()
    }
}

/// Symmetric-sum closed form: `s(i, j) = Σ Π_a (k + 4(a-1))^{ν_a}` over all
/// `ν ∈ N^i` with `|ν| = j`.
pub fn s_closed_form(k_base: u32, i: usize, j: usize) -> Integer {
    compositions(i, j)
        .iter()
        .map(|nu| {
            nu.iter()
                .enumerate()
                .map(|(a, &e)| Integer::from(Integer::u_pow_u(k_base + 4 * a as u32, e)))
                .product::<Integer>()
        })
        .sum()
}

/// All `ν ∈ N^i` with entries summing to `j`.
pub fn compositions(i: usize, j: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, j: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == 1 {
            prefix.push(j);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=j).rev() {
            prefix.push(first);
            rec(i - 1, j - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if i >= 1 {
        rec(i, j as u32, &mut Vec::new(), &mut out);
    }
    out
}

/// `N(i, j) = (i + j - 1)! / (j! (i - 1)!)`, the number of compositions.
pub fn partition_count(i: usize, j: usize) -> Result<Integer> {
    if i == 0 {
        return Err(Error::invalid("N(i, j) needs i >= 1"));
    }
    Ok(Integer::from(Integer::binomial_u(
        (i + j - 1) as u32,
        j as u32,
    )))
}

/// Upper representation
/// `d(i, i+j) = -3 (-4)^i s_5(i+1, j-1) + 2 (-4)^{i-1} s_9(i, j)`.
///
/// For `i = 0` the second term vanishes (`s_9(0, j) = 0`); `(0, 0)` has no
/// polynomial behind it and is rejected.
pub fn upper_rep_coeff(i: usize, j: usize) -> Result<Integer> {
    if i + j == 0 {
        return Err(Error::invalid("d(0, 0) is not a CV coefficient"));
    }
    let s5 = UpperRepTable::build(5, i + 1, j);
    let s9 = UpperRepTable::build(9, i.max(1), j);
    Ok(upper_rep_with(&s5, &s9, i, j))
}

fn neg4_pow(e: u32) -> Integer {
    let v = Integer::from(Integer::u_pow_u(4, e));
    if e.is_multiple_of(2) {
        v
    } else {
        -v
    }
}

fn upper_rep_with(s5: &UpperRepTable, s9: &UpperRepTable, i: usize, j: usize) -> Integer {
    let first = Integer::from(-3) * neg4_pow(i as u32) * s5.get(i as i64 + 1, j as i64 - 1);
    if i == 0 {
        return first;
    }
    let second = Integer::from(2) * neg4_pow(i as u32 - 1) * s9.get(i as i64, j as i64);
    first + second
}

/// Outcome of comparing the recurrence with both closed forms.
#[derive(Clone, Debug, Serialize)]
pub struct RepresentationReport {
    pub k_max: usize,
    pub checked: usize,
    pub mismatches: Vec<(usize, usize)>,
}

/// Compare recurrence, lower and upper representations for `0 ≤ j ≤ k ≤ k_max`.
pub fn check_representations(k_max: usize) -> RepresentationReport {
    let polys = cv_table(k_max);
    let s5 = UpperRepTable::build(5, k_max + 1, k_max);
    let s9 = UpperRepTable::build(9, k_max + 1, k_max);
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for k in 1..=k_max {
        for j in 0..=k {
            let rec = polys[k - 1].coeff(j);
            let lower = lower_rep_coeff(j, k);
            let upper = upper_rep_with(&s5, &s9, j, k - j);
            checked += 1;
            if lower != rec || upper != rec {
                mismatches.push((j, k));
            }
        }
    }
    RepresentationReport {
        k_max,
        checked,
        mismatches,
    }
}

/// The coefficients `gamma(j, r)` of `eps_r W_r(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrPoly {
    pub r: usize,
    pub gamma: Vec<Integer>,
}

impl WrPoly {
    pub fn as_poly(&self) -> IntPoly {
        IntPoly::new(self.gamma.clone())
    }

    pub fn degree(&self) -> Option<usize> {
        self.gamma.len().checked_sub(1)
    }
}

/// `W_r(y) = det[p_{i+j-1}(y)]_{i,j=1..r}` (no sign normalisation).
pub fn w_poly(r: usize) -> Result<IntPoly> {
    if r == 0 {
        return Err(Error::invalid("W_r needs r >= 1"));
    }
    let p = cv_table(2 * r - 1);
    let m: Vec<Vec<IntPoly>> = (0..r)
        .map(|i| (0..r).map(|j| p[i + j].clone()).collect())
        .collect();
    det_poly(&m)
}

/// `eps_r W_r(y)` as its coefficient list.
pub fn wr_poly(r: usize) -> Result<WrPoly> {
    let w = w_poly(r)?;
    let signed = if epsilon(r) < 0 { -&w } else { w };
    Ok(WrPoly {
        r,
        gamma: signed.coeffs().to_vec(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma61Report {
    pub r: usize,
    pub mu_r: usize,
    pub lowest_nonzero: Option<usize>,
    pub holds: bool,
}

/// `gamma(j, r) = 0` for every `j < mu(r)`.
pub fn check_lemma61(r: usize) -> Result<Lemma61Report> {
    if r < 2 {
        return Err(Error::invalid("the vanishing pattern is stated for r >= 2"));
    }
    let w = wr_poly(r)?.as_poly();
    let lowest = w.lowest_nonzero();
    Ok(Lemma61Report {
        r,
        mu_r: mu(r),
        lowest_nonzero: lowest,
        holds: lowest.is_some_and(|l| l >= mu(r)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Conjecture2Report {
    pub r: usize,
    pub degree: Option<usize>,
    pub expected_degree: usize,
    pub leading: String,
    pub holds: bool,
}

/// Degree of `eps_r W_r` is exactly `mu(r+1)` with a positive top coefficient.
pub fn check_conjecture2(r: usize) -> Result<Conjecture2Report> {
    if r < 2 {
        return Err(Error::invalid("the degree pattern is stated for r >= 2"));
    }
    let w = wr_poly(r)?.as_poly();
    let lead = w.leading().cloned().unwrap_or_default();
    let degree = w.degree();
    Ok(Conjecture2Report {
        r,
        degree,
        expected_degree: mu(r + 1),
        holds: degree == Some(mu(r + 1)) && lead > 0,
        leading: lead.to_string(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaMuReport {
    pub r: usize,
    pub mu_r: usize,
    /// `Π_{j<r} c(j, j)`
    pub c_product: String,
    /// `det[(5 + 4i)^j]_{i,j<r}`
    pub vandermonde: String,
    /// `c_product · vandermonde²`
    pub closed_form: String,
    pub epsilon_r: i32,
    /// `gamma(mu(r), r)` from the exact Wronskian polynomial.
    pub gamma_mu: String,
    /// `gamma(mu(r), r) == eps_r · closed_form`
    pub matches_signed: bool,
    /// `gamma(mu(r), r) == closed_form` (literal reading)
    pub matches_unsigned: bool,
}

/// Closed form for the lowest surviving coefficient of the Wronskian
/// polynomial, compared with the exact coefficient under both sign readings.
pub fn gamma_mu_closed_form(r: usize) -> Result<GammaMuReport> {
    if r < 2 {
        return Err(Error::invalid("closed form is stated for r >= 2"));
    }
    let c_product: Rational = (0..r).map(|j| c_coeff(j, j)).product();
    let vm: Vec<Vec<Integer>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| Integer::from(Integer::u_pow_u(5 + 4 * i as u32, j as u32)))
                .collect()
        })
        .collect();
    let vandermonde = det_int(&vm)?;
    let closed = Rational::from(&c_product * Integer::from(vandermonde.square_ref()));
    let gamma = wr_poly(r)?.as_poly().coeff(mu(r));
    let eps = epsilon(r);
    let signed = Rational::from(&closed * eps);
    Ok(GammaMuReport {
        r,
        mu_r: mu(r),
        c_product: c_product.to_string(),
        vandermonde: vandermonde.to_string(),
        closed_form: closed.to_string(),
        epsilon_r: eps,
        matches_signed: signed == gamma,
        matches_unsigned: closed == gamma,
        gamma_mu: gamma.to_string(),
    })
}

/// One row of the bound table for the order-2 Wronskian.
#[derive(Clone, Debug, Serialize)]
pub struct BoundEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub value: String,
    pub value_f64: f64,
    /// The same bound with the literally printed `C_j`.
    pub value_literal_cj: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub entries: Vec<BoundEntry>,
    /// `W_2(pi) = 16 pi (-15 + 12 pi - 4 pi^2)`
    pub w2_at_pi: f64,
    pub w2_below_minus_843: bool,
    /// `W_2(pi) + Σ |T_i|` bounds.
    pub bound_sum: f64,
    pub bound_sum_negative: bool,
    /// The total quoted alongside the original table.
    pub quoted_total: f64,
    /// `C_j(pi)` as used: `(1 - e^{-2y} 2^{j+2})^{-1}`.
    pub c_adopted: [f64; 3],
    /// `C_j(pi)` as literally printed: `(1 - e^{-2y} 2^{2j+4} / 2)^{-1}`.
    pub c_literal: [f64; 3],
}

/// `C_j(y) = (1 - e^{-2y} 2^{j+2})^{-1}`.
pub fn c_bound(j: u32, y: &Float) -> Float {
    let prec = y.prec();
    let e = Float::with_val(prec, -2 * y.clone()).exp();
    let t = e * Float::with_val(prec, Float::u_pow_u(2, j + 2));
    Float::with_val(prec, 1) / (Float::with_val(prec, 1) - t)
}

fn c_bound_literal(j: u32, y: &Float) -> Float {
    let prec = y.prec();
    let e = Float::with_val(prec, -2 * y.clone()).exp();
    let t = e * Float::with_val(prec, Float::u_pow_u(2, 2 * j + 4)) / 2u32;
    Float::with_val(prec, 1) / (Float::with_val(prec, 1) - t)
}

/// Recompute the order-2 Wronskian bound table at `y = pi`.
pub fn bounds_lemma25(ctx: &PrecCtx) -> BoundsReport {
    let prec = ctx.bits();
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let pi4 = Float::with_val(prec, pi.clone().square().square());
    let e3 = Float::with_val(prec, -3 * pi.clone()).exp();
    let e6 = Float::with_val(prec, -6 * pi.clone()).exp();
    let c: Vec<Float> = (0..3).map(|j| c_bound(j, &pi)).collect();
    let cl: Vec<Float> = (0..3).map(|j| c_bound_literal(j, &pi)).collect();
    let pow2 = |e: u32| Float::with_val(prec, Float::u_pow_u(2, e));

    let t1 = |cc: &[Float]| pow2(14) * &cc[2] * &pi4 * &e3;
    let t2 = |cc: &[Float]| pow2(10) * &cc[0] * &pi4 * &e3;
    let t3 = |cc: &[Float]| pow2(13) * &cc[1] * &pi4 * &e3;
    let t4 = |cc: &[Float]| pow2(18) * &cc[0] * &cc[2] * &pi4 * &e6;

    let w2 = {
        let inner = Float::with_val(prec, -15) + 12 * pi.clone() - 4 * pi.clone().square();
        Float::with_val(prec, 16 * pi.clone() * inner)
    };

    let mk = |name, formula, v: Float, lit: Option<Float>| BoundEntry {
        name,
        formula,
        value: format!("{:.20e}", v),
        value_f64: v.to_f64(),
        value_literal_cj: lit.map(|l| l.to_f64()),
    };
    let entries = vec![
        mk("W_2", "16 y (-15 + 12y - 4y^2) at y = pi", w2.clone(), None),
        mk("|T_1|", "2^14 C_2(pi) pi^4 e^{-3 pi}", t1(&c), Some(t1(&cl))),
        mk("|T_2|", "2^10 C_0(pi) pi^4 e^{-3 pi}", t2(&c), Some(t2(&cl))),
        mk("|T_3|", "2^13 C_1(pi) pi^4 e^{-3 pi}", t3(&c), Some(t3(&cl))),
        mk("|T_4|", "2^18 C_0(pi) C_2(pi) pi^4 e^{-6 pi}", t4(&c), Some(t4(&cl))),
        mk("|T_5|", "0 (T_5 = -Upsilon_1^2 <= 0)", Float::new(prec), None),
    ];
    let sum: f64 = entries.iter().map(|e| e.value_f64).sum();
    BoundsReport {
        w2_at_pi: w2.to_f64(),
        w2_below_minus_843: w2 < -843,
        bound_sum: sum,
        bound_sum_negative: sum < 0.0,
        quoted_total: -635.80,
        c_adopted: [c[0].to_f64(), c[1].to_f64(), c[2].to_f64()],
        c_literal: [cl[0].to_f64(), cl[1].to_f64(), cl[2].to_f64()],
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_polynomials() {
        assert_eq!(cv_poly(1).unwrap().poly, IntPoly::from_i64(&[-3, 2]));
        assert_eq!(cv_poly(2).unwrap().poly, IntPoly::from_i64(&[-15, 30, -8]));
        assert_eq!(cv_poly(3).unwrap().poly, IntPoly::from_i64(&[-75, 330, -224, 32]));
        let p4 = cv_poly(4).unwrap().poly;
        assert_eq!(p4.degree(), Some(4));
        assert_eq!(*p4.leading().unwrap(), -128);
        assert_eq!(p4.coeff(0), -375);
        assert!(cv_poly(0).is_err());
    }

    #[test]
    fn leading_and_constant_coefficients() {
        for k in 1..=30usize {
            let p = cv_poly(k).unwrap().poly;
            assert_eq!(p.degree(), Some(k));
            let lead = Integer::from(2) * Integer::from(Integer::u_pow_u(4, k as u32 - 1));
            let lead = if k % 2 == 1 { lead } else { -lead };
            assert_eq!(*p.leading().unwrap(), lead, "k = {k}");
            let c0 = Integer::from(-3) * Integer::from(Integer::u_pow_u(5, k as u32 - 1));
            assert_eq!(p.coeff(0), c0);
        }
    }

    #[test]
    fn c_table_values() {
        assert_eq!(c_coeff(0, 0), -3);
        assert_eq!(c_coeff(1, 1), 5);
        assert_eq!(c_coeff(2, 2), Rational::from((-7, 2)));
        assert_eq!(c_coeff(3, 0), Rational::from((-3, 6)));
        assert_eq!(c_coeff(4, 4), Rational::from((-11, 24)));
        assert_eq!(c_coeff(4, 1), Rational::from((5, 6)));
    }

    #[test]
    fn lower_representation_values() {
        assert_eq!(lower_rep_coeff(1, 2), 30);
        assert_eq!(lower_rep_coeff(4, 3), 0);
        for k in 1..8 {
            for j in k + 1..k + 4 {
                assert_eq!(lower_rep_coeff(j, k), 0, "j = {j}, k = {k}");
            }
        }
    }

    #[test]
    fn upper_representation_values() {
        assert_eq!(upper_rep_coeff(1, 1).unwrap(), 30);
        for k in 1..12 {
            let c0 = Integer::from(-3) * Integer::from(Integer::u_pow_u(5, k as u32 - 1));
            assert_eq!(upper_rep_coeff(0, k).unwrap(), c0);
        }
        assert!(upper_rep_coeff(0, 0).is_err());
        let s5 = UpperRepTable::build(5, 3, 3);
        assert_eq!(s5.get(2, 2), 151);
        assert_eq!(s5.get(2, 0), 1);
        assert_eq!(s5.get(0, 2), 0);
        assert_eq!(UpperRepTable::build(9, 2, 2).get(1, 1), 9);
    }

    #[test]
    fn triple_equality_to_order_30() {
        let rep = check_representations(30);
        assert_eq!(rep.checked, (1..=30).map(|k| k + 1).sum::<usize>());
        assert!(rep.mismatches.is_empty(), "{:?}", rep.mismatches);
    }

    #[test]
    fn printed_diagonal_initialisation_is_not_the_recurrence() {
        // the extra diagonal condition would make s(i, i) alternate in sign,
        // while the symmetric sums are all positive
        for k in [5u32, 9] {
            let t = UpperRepTable::build(k, 6, 6);
            for i in 1..=6i64 {
                let printed = Integer::from(2) * neg4_pow(i as u32 - 1);
                assert!(t.get(i, i) > 0);
                assert_ne!(t.get(i, i), printed);
            }
        }
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partition_count(2, 2).unwrap(), 3);
        for j in 0..10 {
            assert_eq!(partition_count(1, j).unwrap(), 1);
        }
        for i in 1..10 {
            assert_eq!(partition_count(i, 1).unwrap(), i as u32);
        }
        assert!(partition_count(0, 1).is_err());
        for i in 1..=12 {
            for j in 1..=12 {
                let lhs = partition_count(i + 1, j).unwrap();
                let rhs = partition_count(i, j).unwrap() + partition_count(i + 1, j - 1).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        for i in 1..=6 {
            for j in 0..=6 {
                assert_eq!(
                    Integer::from(compositions(i, j).len()),
                    partition_count(i, j).unwrap()
                );
            }
        }
    }

    #[test]
    fn symmetric_sums_match_recurrence() {
        for k in [5u32, 9] {
            let t = UpperRepTable::build(k, 6, 6);
            for i in 1..=6 {
                for j in 0..=6 {
                    assert_eq!(t.get(i as i64, j as i64), s_closed_form(k, i, j), "k={k} i={i} j={j}");
                }
            }
        }
        assert_eq!(s_closed_form(5, 2, 2), 151);
    }

    #[test]
    fn wronskian_polynomials_small_r() {
        assert_eq!(wr_poly(1).unwrap().as_poly(), IntPoly::from_i64(&[-3, 2]));
        assert_eq!(w_poly(2).unwrap(), IntPoly::from_i64(&[0, -240, 192, -64]));
        assert_eq!(wr_poly(2).unwrap().as_poly(), IntPoly::from_i64(&[0, 240, -192, 64]));
        assert_eq!(
            wr_poly(3).unwrap().as_poly(),
            IntPoly::from_i64(&[0, 0, 0, -860160, 737280, -294912, 65536])
        );
        assert_eq!(
            wr_poly(4).unwrap().as_poly(),
            IntPoly::from_i64(&[
                0,
                0,
                0,
                0,
                0,
                0,
                190253629440,
                -169114337280,
                72477573120,
                -19327352832,
                3221225472
            ])
        );
    }

    #[test]
    fn vanishing_and_degree_patterns() {
        for r in 2..=7 {
            assert!(check_lemma61(r).unwrap().holds, "r = {r}");
            let c2 = check_conjecture2(r).unwrap();
            assert!(c2.holds, "r = {r}: {c2:?}");
        }
        assert_eq!(check_lemma61(7).unwrap().lowest_nonzero, Some(21));
        assert_eq!(check_conjecture2(3).unwrap().leading, "65536");
        assert!(check_lemma61(1).is_err());
    }

    #[test]
    fn closed_form_lowest_coefficient() {
        let g2 = gamma_mu_closed_form(2).unwrap();
        assert_eq!(g2.closed_form, "-240");
        assert_eq!(g2.gamma_mu, "240");
        assert!(g2.matches_signed && !g2.matches_unsigned);
        let g3 = gamma_mu_closed_form(3).unwrap();
        assert_eq!(g3.closed_form, "860160");
        assert_eq!(g3.gamma_mu, "-860160");
        assert!(g3.matches_signed);
        let g4 = gamma_mu_closed_form(4).unwrap();
        assert_eq!(g4.gamma_mu, "190253629440");
        assert!(g4.matches_signed);
    }

    #[test]
    fn bound_table() {
        let rep = bounds_lemma25(&PrecCtx::default());
        assert!((rep.w2_at_pi + 843.4).abs() < 0.05);
        assert!(rep.w2_below_minus_843);
        let v = |name: &str| rep.entries.iter().find(|e| e.name == name).unwrap().value_f64;
        assert!((v("|T_1|") - 132.76).abs() <= 1.0);
        assert!((v("|T_2|") - 8.30).abs() <= 0.3);
        assert!((v("|T_3|") - 64.88).abs() <= 1.0);
        assert!((v("|T_4|") - 0.17).abs() <= 0.02);
        assert!(rep.bound_sum < -600.0);
    }
}
