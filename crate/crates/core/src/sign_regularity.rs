//! Wronskian sign scans for the kernels `Psi_m(u + v)`, the search for the
//! smallest cumulant order that makes a given order sign-regular on a grid,
//! and the three-point determinant `q(u, v)` built from `f = Phi'`.
//!
//! All scans are finite-grid evidence, not proofs.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::cvpoly::{cv_table, epsilon, w_poly};
use crate::determinant::{ScanItem, ScanReport, MIN_SIG_DIGITS};
use crate::numerics::{det_float, HPReal, PrecCtx, ERR_PREC, ESCALATION_CEILING};
use crate::phi::{assemble_kernel, cumulants, phi_derivs, PhiSeriesParams};
use crate::{Error, Result};

/// Parse a decimal such as `0.01`, `3`, `-1.5e-2` or a fraction `1/3` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains('/') {
        return Rational::from_str(s).map_err(|e| Error::invalid(format!("bad number {s:?}: {e}")));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|e| Error::invalid(format!("bad exponent in {s:?}: {e}")))?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() || !(int_part.chars().chain(frac_part.chars())).all(|c| c.is_ascii_digit()) {
        return Err(Error::invalid(format!("bad number {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let num = Integer::from_str(if digits.is_empty() { "0" } else { &digits }).unwrap();
    let scale = exp - frac_part.len() as i32;
    let pow10 = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    let mut q = if scale >= 0 {
        Rational::from(num * pow10)
    } else {
        Rational::from((num, pow10))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Evenly spaced exact grid `u_min, u_min + step, …, ≤ u_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub u_min: Rational,
    pub u_max: Rational,
    pub step: Rational,
    pub refine_near_failure: bool,
}

impl GridSpec {
    pub fn new(u_min: Rational, u_max: Rational, step: Rational, refine_near_failure: bool) -> Result<Self> {
        if u_min < 0 {
            return Err(Error::invalid("grid must start at u >= 0"));
        }
        if step <= 0 {
            return Err(Error::invalid("grid step must be positive"));
        }
        if u_max < u_min {
            return Err(Error::invalid("grid end precedes its start"));
        }
        Ok(GridSpec {
            u_min,
            u_max,
            step,
            refine_near_failure,
        })
    }

    /// `[0, 3]` with step `1/100`.
    pub fn standard() -> Self {
        GridSpec::new(Rational::new(), Rational::from(3), Rational::from((1, 100)), true).unwrap()
    }

    pub fn len(&self) -> usize {
        let k = Rational::from(&self.u_max - &self.u_min) / &self.step;
        usize::try_from(k.floor().numer()).unwrap_or(usize::MAX) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<Rational> {
        (0..self.len())
            .map(|k| &self.u_min + (&self.step * Rational::from(k as u64)))
            .collect()
    }
}

fn rat_float(q: &Rational, bits: u32) -> Float {
    Float::with_val(bits, q)
}

/// Short decimal form of a grid value.
pub fn rat_str(q: &Rational) -> String {
    if q.denom() == &1 {
        return q.numer().to_string();
    }
    // exact decimal when the denominator is 2^a 5^b
    let mut d = q.denom().clone();
    let mut places = 0u32;
    for f in [2u32, 5] {
        let mut k = 0;
        while d.is_divisible_u(f) {
            d /= f;
            k += 1;
        }
        places = places.max(k);
    }
    if d != 1 {
        return q.to_string();
    }
    let scaled = (q.numer() * Integer::from(Integer::u_pow_u(10, places))) / q.denom();
    let neg = scaled < 0;
    let digits = scaled.abs().to_string();
    let width = places as usize + 1;
    let padded = format!("{digits:0>width$}");
    let (int, frac) = padded.split_at(padded.len() - places as usize);
    format!("{}{int}.{frac}", if neg { "-" } else { "" })
}

#[derive(Clone, Debug)]
struct KernelData {
    digits: u32,
    psi: Vec<HPReal>,
    phi: Vec<HPReal>,
}

/// Derivative data `Psi_0..Psi_M` and `Phi^{(0..D)}` per grid point, kept at
/// the highest precision requested so far.
#[derive(Debug, Default)]
pub struct KernelCache {
    map: Mutex<HashMap<Rational, KernelData>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Kernel derivatives `0..=d_max` of `Psi_m` at `u` with at least
    /// `digits` digits; returns the digits actually carried.
    fn kernel(&self, u: &Rational, m: usize, d_max: usize, digits: u32) -> Result<(Vec<HPReal>, u32)> {
        let need_psi = m;
        let need_phi = d_max.saturating_sub(m);
        let cached = self.map.lock().unwrap().get(u).cloned();
        let data = match cached {
            Some(k) if k.digits >= digits && k.psi.len() > need_psi && k.phi.len() > need_phi => k,
            other => {
                let (psi_n, phi_n, dg) = match &other {
                    Some(k) => (
                        need_psi.max(k.psi.len() - 1),
                        need_phi.max(k.phi.len() - 1),
                        digits.max(k.digits),
                    ),
                    None => (need_psi, need_phi, digits),
                };
                let params = PhiSeriesParams::new(PrecCtx::with_digits(dg)?);
                let uf = rat_float(u, params.ctx.bits() + 16);
                let psi = cumulants(&uf, psi_n, &params)?;
                let phi = phi_derivs(&uf, phi_n, &params)?;
                let k = KernelData { digits: dg, psi, phi };
                self.map.lock().unwrap().insert(u.clone(), k.clone());
                k
            }
        };
        let psi = &data.psi[..=need_psi];
        Ok((assemble_kernel(psi, &data.phi, m, d_max), data.digits))
    }
}

/// A Wronskian value with the precision it needed.
#[derive(Clone, Debug)]
pub struct WronskianValue {
    pub value: HPReal,
    pub digits_used: u32,
}

fn sign_settled(v: &HPReal) -> bool {
    if v.value().is_zero() {
        return false;
    }
    let ten_err = Float::with_val(ERR_PREC, v.err() * 10u32);
    v.significant_digits() >= MIN_SIG_DIGITS && *v.value().as_abs() > ten_err
}

fn round_up_25(d: f64) -> u32 {
    ((d / 25.0).ceil() * 25.0) as u32
}

/// Evaluate `f` starting at `start` digits; when cancellation eats the
/// precision, jump to the measured loss plus a margin (or double when the
/// result was pure noise).
fn with_escalation(
    what: &str,
    start: u32,
    mut f: impl FnMut(u32) -> Result<(HPReal, u32)>,
) -> Result<(HPReal, u32)> {
    let mut digits = start.max(PrecCtx::MIN_DIGITS);
    loop {
        let (lost, used) = match f(digits) {
            Ok((v, used)) if sign_settled(&v) => return Ok((v, used)),
            Ok((v, used)) => (f64::from(used) - v.significant_digits(), used),
            Err(Error::PrecisionExhausted { lost_digits, digits }) => (lost_digits, digits),
            Err(e) => return Err(e),
        };
        let used = used.max(digits);
        let next = if lost.is_finite() && lost < f64::from(used) - 5.0 {
            round_up_25(lost + MIN_SIG_DIGITS + 30.0).max(used + 25)
        } else {
            used * 2
        };
        if next > ESCALATION_CEILING {
            return Err(Error::EscalationCeiling {
                what: what.to_string(),
                ceiling: ESCALATION_CEILING,
            });
        }
        digits = next;
    }
}

fn hankel(k: &[HPReal], p: usize) -> Vec<Vec<HPReal>> {
    (0..p).map(|i| (0..p).map(|j| k[i + j].clone()).collect()).collect()
}

fn wronskian_cached(u: &Rational, p: usize, m: usize, start: u32, cache: &KernelCache) -> Result<WronskianValue> {
    if p == 0 {
        return Err(Error::invalid("Wronskian order must be positive"));
    }
    let what = format!("w_{p}(u = {}) for m = {m}", rat_str(u));
    let (value, digits_used) = with_escalation(&what, start, |d| {
        let (k, carried) = cache.kernel(u, m, 2 * p - 2, d)?;
        let ctx = PrecCtx::with_digits(carried)?;
        Ok((det_float(&hankel(&k, p), &ctx)?, carried))
    })?;
    Ok(WronskianValue { value, digits_used })
}

/// `w_p(u) = det[psi^{(i+j)}(u)]_{i,j<p}` for `psi = Psi_m` (`Psi_0 = Phi`).
pub fn wronskian(u: &Rational, p: usize, m: usize, ctx: &PrecCtx) -> Result<WronskianValue> {
    if *u < 0 {
        return Err(Error::invalid("Wronskians are evaluated for u >= 0"));
    }
    wronskian_cached(u, p, m, ctx.digits(), &KernelCache::new())
}

/// First failing point of a scan.
#[derive(Clone, Debug)]
pub struct Witness {
    pub u: Rational,
    /// `epsilon_p w_p(u)`.
    pub value: HPReal,
    /// Bracket `[a, b]` of a sign change found by bisection.
    pub bracket: Option<(Rational, Rational)>,
}

/// One grid point of a scan.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub u: Rational,
    /// `epsilon_p w_p(u)`.
    pub value: HPReal,
    pub digits_used: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    AllPositive,
    Failure,
}

/// Result of scanning one order `p` for one cumulant order `m`.
#[derive(Clone, Debug)]
pub struct SignScanResult {
    pub p: usize,
    pub m: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Smallest `epsilon_p w_p(u) / psi(u)^p` seen.
    pub min_scaled_value: Option<HPReal>,
    pub points: Vec<ScanPoint>,
    pub note: &'static str,
}

impl SignScanResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::AllPositive
    }
}

const SCAN_NOTE: &str = "non-rigorous: finite grid; past the grid end the first term of the series dominates \
                         and the sign follows the leading coefficient of the CV Wronskian polynomial";

fn signed(v: &HPReal, p: usize) -> HPReal {
    if epsilon(p) < 0 {
        -v
    } else {
        v.clone()
    }
}

fn bisect(
    p: usize,
    m: usize,
    mut a: Rational,
    mut b: Rational,
    mut start: u32,
    cache: &KernelCache,
) -> Result<(Rational, Rational)> {
    for _ in 0..24 {
        let mid = Rational::from(&a + &b) / 2u32;
        let w = wronskian_cached(&mid, p, m, start, cache)?;
        start = start.max(w.digits_used);
        if signed(&w.value, p).is_certainly_positive() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}

/// Scan one `(p, m)` pair over the grid, stopping at the first failure.
pub fn scan_order(p: usize, m: usize, grid: &GridSpec, ctx: &PrecCtx, cache: &KernelCache) -> Result<SignScanResult> {
    let mut points = Vec::new();
    let mut start = ctx.digits();
    let mut min_scaled: Option<HPReal> = None;
    let mut witness = None;
    for u in grid.points() {
        let w = wronskian_cached(&u, p, m, start, cache)?;
        // the loss grows slowly with u; reuse the measured loss plus a margin
        let lost = f64::from(w.digits_used) - w.value.significant_digits();
        if lost.is_finite() {
            start = start.max(round_up_25(lost + MIN_SIG_DIGITS + 30.0));
        }
        let s = signed(&w.value, p);
        let (k, _) = cache.kernel(&u, m, 0, w.digits_used)?;
        let scaled = s.div(&k[0].pow_u(p as u32));
        if min_scaled.as_ref().is_none_or(|mv| scaled.value() < mv.value()) {
            min_scaled = Some(scaled);
        }
        let ok = s.is_certainly_positive();
        points.push(ScanPoint {
            u: u.clone(),
            value: s.clone(),
            digits_used: w.digits_used,
        });
        if !ok {
            let bracket = match (grid.refine_near_failure, points.len() >= 2) {
                (true, true) => {
                    let a = points[points.len() - 2].u.clone();
                    Some(bisect(p, m, a, u.clone(), start, cache)?)
                }
                _ => None,
            };
            witness = Some(Witness { u, value: s, bracket });
            break;
        }
    }
    Ok(SignScanResult {
        p,
        m,
        verdict: if witness.is_some() { Verdict::Failure } else { Verdict::AllPositive },
        witness,
        min_scaled_value: min_scaled,
        points,
        note: SCAN_NOTE,
    })
}

/// `epsilon_p w_p(u) > 0` over the grid for every `p ≤ p_max`.
pub fn sign_scan(p_max: usize, m: usize, grid: &GridSpec, ctx: &PrecCtx) -> Result<Vec<SignScanResult>> {
    let cache = KernelCache::new();
    (1..=p_max).map(|p| scan_order(p, m, grid, ctx, &cache)).collect()
}

/// Smallest cumulant order found sign-regular for one `r`.
#[derive(Clone, Debug)]
pub struct MrResult {
    pub r: usize,
    pub m: usize,
    pub eta: usize,
    /// First failing `(m, p)` scans below the accepted order.
    pub rejected: Vec<SignScanResult>,
}

/// Memo of completed `(p, m)` scans over one grid.
#[derive(Debug)]
pub struct ScanSession {
    pub grid: GridSpec,
    pub ctx: PrecCtx,
    pub cache: KernelCache,
    done: Mutex<HashMap<(usize, usize), SignScanResult>>,
}

impl ScanSession {
    pub fn new(grid: GridSpec, ctx: PrecCtx) -> Self {
        ScanSession {
            grid,
            ctx,
            cache: KernelCache::new(),
            done: Mutex::new(HashMap::new()),
        }
    }

    pub fn scan(&self, p: usize, m: usize) -> Result<SignScanResult> {
        if let Some(r) = self.done.lock().unwrap().get(&(p, m)) {
            return Ok(r.clone());
        }
        let r = scan_order(p, m, &self.grid, &self.ctx, &self.cache)?;
        self.done.lock().unwrap().insert((p, m), r.clone());
        Ok(r)
    }

    /// Smallest `m ≤ m_cap` with every `p ≤ r` sign-regular on the grid.
    pub fn find_mr(&self, r: usize, m_cap: usize) -> Result<MrResult> {
        if r < 2 {
            return Err(Error::invalid("find_mr needs r >= 2"));
        }
        let mut rejected = Vec::new();
        'm: for m in 0..=m_cap {
            // the top order is the likeliest to fail
            for p in (1..=r).rev() {
                let s = self.scan(p, m)?;
                if !s.passed() {
                    rejected.push(s);
                    continue 'm;
                }
            }
            return Ok(MrResult {
                r,
                m,
                eta: crate::determinant::eta_from_m(r, m),
                rejected,
            });
        }
        Err(Error::NotFound { r, m_cap })
    }
}

/// `(m(r), eta(r))` on the grid.
pub fn find_mr(r: usize, m_cap: usize, grid: &GridSpec, ctx: &PrecCtx) -> Result<(usize, usize)> {
    let s = ScanSession::new(grid.clone(), *ctx);
    let res = s.find_mr(r, m_cap)?;
    Ok((res.m, res.eta))
}

/// `w_p(u) / [(π e^{5u-y})^p W_p(y)]` with `y = π e^{4u}`, `W_p` the CV
/// Hankel polynomial.
pub fn scaled_wronskian_ratio(u: &Rational, p: usize, ctx: &PrecCtx) -> Result<HPReal> {
    let w = wronskian(u, p, 0, ctx)?;
    let bits = ctx.bits().max(w.value.prec());
    let uf = rat_float(u, bits + 64);
    let pi = Float::with_val(bits + 64, Constant::Pi);
    let y = Float::with_val(bits + 64, &uf * 4u32).exp() * &pi;
    let scale = Float::with_val(bits + 64, Float::with_val(bits + 64, &uf * 5u32) - &y).exp() * &pi;
    let poly = w_poly(p)?.eval_float(&y, bits + 64);
    let mut sp = Float::with_val(bits + 64, 1);
    for _ in 0..p {
        sp *= &scale;
    }
    let den = Float::with_val(bits, sp * poly);
    Ok(w.value.div(&HPReal::rounded(den)))
}

/// `q(u, v)` with `f = Phi'`:
///
/// ```text
/// | 0      f(v)      f'(v)    |
/// | f(u)   f(u+v)    f'(u+v)  |
/// | f'(u)  f'(u+v)   f''(u+v) |
/// ```
pub fn q_eval(u: &Rational, v: &Rational, ctx: &PrecCtx) -> Result<HPReal> {
    if *u <= 0 || *v <= 0 {
        return Err(Error::invalid("q(u, v) needs u, v > 0"));
    }
    let what = format!("q({}, {})", rat_str(u), rat_str(v));
    let (val, _) = with_escalation(&what, ctx.digits(), |d| {
        let c = PrecCtx::with_digits(d)?;
        let params = PhiSeriesParams::new(c);
        let bits = c.bits() + 16;
        let fu = phi_derivs(&rat_float(u, bits), 2, &params)?;
        let fv = phi_derivs(&rat_float(v, bits), 2, &params)?;
        let fs = phi_derivs(&rat_float(&Rational::from(u + v), bits), 3, &params)?;
        Ok((q_from_derivs(&fu, &fv, &fs), d))
    })?;
    Ok(val)
}

/// Cofactor expansion along the zero corner; the Hadamard cancellation test
/// of the general evaluator is far too pessimistic here because the entries
/// at `u + v` are tiny next to those at `u` and `v`.
fn q_from_derivs(fu: &[HPReal], fv: &[HPReal], fs: &[HPReal]) -> HPReal {
    let first = &(&fu[1] * &fs[3]) - &(&fu[2] * &fs[2]);
    let second = &(&fu[1] * &fs[2]) - &(&fu[2] * &fs[1]);
    &(&fv[2] * &second) - &(&fv[1] * &first)
}

/// Extremes of `q` over a two-dimensional grid.
#[derive(Clone, Debug)]
pub struct QScanReport {
    pub points: usize,
    pub max: HPReal,
    pub argmax: (Rational, Rational),
    pub min: HPReal,
    pub argmin: (Rational, Rational),
    /// Every point certainly positive.
    pub all_positive: bool,
    /// Points where `q` was not certainly negative.
    pub report: ScanReport,
    /// Every evaluated `(u, v, q)`.
    pub values: Vec<(Rational, Rational, HPReal)>,
}

impl QScanReport {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.max.is_certainly_negative()
    }
}

/// `q < 0` on the product grid (both grids must avoid 0). Only `u ≥ v` is
/// evaluated when the grids coincide, by symmetry.
pub fn q_scan(grid_u: &GridSpec, grid_v: &GridSpec, ctx: &PrecCtx) -> Result<QScanReport> {
    let us = grid_u.points();
    let vs = grid_v.points();
    if us.iter().chain(vs.iter()).any(|x| *x <= 0) {
        return Err(Error::invalid("q-scan grids must be strictly positive"));
    }
    let symmetric = grid_u == grid_v;
    let pairs: Vec<(usize, usize)> = (0..us.len())
        .flat_map(|i| (0..vs.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| !symmetric || j <= i)
        .collect();
    let results: Vec<Result<HPReal>> = pairs.par_iter().map(|&(i, j)| q_eval(&us[i], &vs[j], ctx)).collect();
    let mut best: Option<(HPReal, usize, usize)> = None;
    let mut worst: Option<(HPReal, usize, usize)> = None;
    let mut all_positive = true;
    let mut items = Vec::new();
    let mut values = Vec::with_capacity(pairs.len());
    for (&(i, j), r) in pairs.iter().zip(results) {
        let q = r?;
        values.push((us[i].clone(), vs[j].clone(), q.clone()));
        all_positive &= q.is_certainly_positive();
        if worst.as_ref().is_none_or(|(b, _, _)| q.value() < b.value()) {
            worst = Some((q.clone(), i, j));
        }
        if !q.is_certainly_negative() {
            items.push(ScanItem {
                label: format!("q({}, {})", rat_str(&us[i]), rat_str(&vs[j])),
                value: q.clone(),
                digits_used: ctx.digits(),
                pass: false,
                aux: None,
            });
        }
        if best.as_ref().is_none_or(|(b, _, _)| q.value() > b.value()) {
            best = Some((q, i, j));
        }
    }
    let (max, i, j) = best.ok_or_else(|| Error::invalid("empty q-scan grid"))?;
    let (min, k, l) = worst.expect("non-empty grid");
    Ok(QScanReport {
        points: pairs.len(),
        max,
        argmax: (us[i].clone(), vs[j].clone()),
        min,
        argmin: (us[k].clone(), vs[l].clone()),
        all_positive,
        report: ScanReport {
            title: "q(u, v) < 0".into(),
            items,
            non_rigorous: true,
        },
        values,
    })
}

/// First-term approximation of `q` from the CV polynomials alone.
pub fn q_first_term(u: &Rational, v: &Rational, ctx: &PrecCtx) -> Result<HPReal> {
    let bits = ctx.bits() + 64;
    let ps = cv_table(4);
    let approx = |x: &Rational, j_max: usize| -> Vec<HPReal> {
        let xf = rat_float(x, bits + 64);
        let pi = Float::with_val(bits + 64, Constant::Pi);
        let y = Float::with_val(bits + 64, &xf * 4u32).exp() * &pi;
        let pref = Float::with_val(bits + 64, Float::with_val(bits + 64, &xf * 5u32) - &y).exp() * &pi;
        (0..=j_max)
            .map(|j| HPReal::rounded(Float::with_val(bits, ps[j].eval_float(&y, bits + 64) * &pref)))
            .collect()
    };
    let fu = approx(u, 2);
    let fv = approx(v, 2);
    let fs = approx(&Rational::from(u + v), 3);
    Ok(q_from_derivs(&fu, &fv, &fs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::omega_upsilon_split;

    fn ctx() -> PrecCtx {
        PrecCtx::with_digits(60).unwrap()
    }

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("0.01"), Rational::from((1, 100)));
        assert_eq!(q("3"), Rational::from(3));
        assert_eq!(q("-1.5e-2"), Rational::from((-3, 200)));
        assert_eq!(q("2/6"), Rational::from((1, 3)));
        assert_eq!(q(".5"), Rational::from((1, 2)));
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn grid_points_are_exact() {
        let g = GridSpec::standard();
        let pts = g.points();
        assert_eq!(pts.len(), 301);
        assert_eq!(pts[300], Rational::from(3));
        assert_eq!(pts[7], Rational::from((7, 100)));
        assert_eq!(rat_str(&pts[7]), "0.07");
        assert_eq!(rat_str(&q("-2.5")), "-2.5");
        assert_eq!(rat_str(&q("1/3")), "1/3");
        assert_eq!(rat_str(&q("3")), "3");
    }

    #[test]
    fn low_orders() {
        let c = ctx();
        let u = q("0.3");
        let w1 = wronskian(&u, 1, 0, &c).unwrap();
        let phi = phi_derivs(&Float::with_val(c.bits() + 16, &u), 0, &PhiSeriesParams::new(c)).unwrap();
        assert_eq!(w1.value.value(), phi[0].value());
        assert!(wronskian(&u, 2, 0, &c).unwrap().value.is_certainly_negative());
    }

    #[test]
    fn order_two_sign_matches_split_form() {
        // w_2 = (π e^{5u-y})² (Ω_0 Ω_2 - Ω_1²)
        let c = ctx();
        let params = PhiSeriesParams::new(c);
        for s in ["0.1", "0.8", "1.7"] {
            let u = q(s);
            let w = wronskian(&u, 2, 0, &c).unwrap().value;
            let uf = Float::with_val(c.bits() + 64, &u);
            let y = HPReal::exact(Float::with_val(c.bits() + 64, &uf * 4u32).exp() * Float::with_val(c.bits() + 64, Constant::Pi));
            let o: Vec<HPReal> = (0..3).map(|j| omega_upsilon_split(&y, j, &params).unwrap().omega).collect();
            let big_w = &(&o[0] * &o[2]) - &o[1].square();
            assert_eq!(w.certain_sign(), big_w.certain_sign(), "u = {s}");
        }
    }

    #[test]
    fn first_term_hand_off() {
        let c = ctx();
        for s in ["1.5", "2"] {
            for p in 1..=3 {
                let r = scaled_wronskian_ratio(&q(s), p, &c).unwrap();
                let d = (r.to_f64() - 1.0).abs();
                assert!(d < 1e-20, "u = {s}, p = {p}: {d}");
            }
        }
    }

    #[test]
    fn cancellation_triggers_escalation() {
        let c = PrecCtx::with_digits(40).unwrap();
        let w = wronskian(&q("2.5"), 5, 0, &c).unwrap();
        assert!(w.digits_used > 40);
        assert!(w.value.significant_digits() >= MIN_SIG_DIGITS);
    }

    #[test]
    fn coarse_scans() {
        let c = PrecCtx::with_digits(40).unwrap();
        let g = GridSpec::new(q("0"), q("1"), q("0.1"), true).unwrap();
        let res = sign_scan(4, 0, &g, &c).unwrap();
        assert!(res.iter().all(|r| r.passed()));
        assert!(res.iter().all(|r| r.points.len() == 11));
        let s = ScanSession::new(g, c);
        assert_eq!(s.find_mr(3, 2).unwrap().m, 0);
    }

    #[test]
    fn q_is_symmetric_and_positive() {
        let c = ctx();
        let a = q_eval(&q("0.3"), &q("0.7"), &c).unwrap();
        let b = q_eval(&q("0.7"), &q("0.3"), &c).unwrap();
        let d = Float::with_val(c.bits(), a.value() - b.value()).abs();
        assert!(d <= Float::with_val(ERR_PREC, a.err() + b.err()));
        assert!(q_eval(&q("0.5"), &q("0.5"), &c).unwrap().is_certainly_positive());
        assert!(q_eval(&q("0"), &q("0.5"), &c).is_err());
    }

    #[test]
    fn q_far_out_matches_first_term() {
        let c = ctx();
        let v = q_eval(&q("3"), &q("3"), &c).unwrap();
        assert!(v.is_certainly_positive());
        let a = q_first_term(&q("3"), &q("3"), &c).unwrap();
        let rel = Float::with_val(c.bits(), (v.value() - a.value().clone()) / a.value()).abs();
        assert!(rel < 1e-40_f64, "{rel}");
    }

    #[test]
    fn q_scan_small_grid() {
        let c = PrecCtx::with_digits(30).unwrap();
        let g = GridSpec::new(q("0.5"), q("1.5"), q("0.5"), false).unwrap();
        let r = q_scan(&g, &g, &c).unwrap();
        assert_eq!(r.points, 6);
        assert!(r.all_positive);
        assert!(!r.passed());
        assert!(r.min.value() <= r.max.value());
    }
}
