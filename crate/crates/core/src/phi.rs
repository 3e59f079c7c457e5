//! The kernel `Phi(u) = Σ_n (2π²n⁴e^{9u} − 3πn²e^{5u}) exp(−πn²e^{4u})`, its
//! derivatives, the head/tail split of the scaled series and the cumulants
//! `Psi_m(u) = (1/(m-1)!) ∫_u^∞ Phi(t) (t-u)^{m-1} dt`.
//!
//! With `y = π e^{4u}` every derivative is `Phi^{(j)}(u) = π e^{5u-y} Ω_j(y)`
//! where `Ω_j(y) = Σ_n n² p_{j+1}(n²y) e^{-(n²-1)y}`; the `n = 1` term is the
//! CV polynomial itself and the rest is the tail `Υ_j`. All orders at one
//! point share the same exponentials.

use rug::float::{Constant, Round};
use rug::ops::AddAssignRound;
use rug::{Float, Integer};

use crate::cvpoly::cv_table;
use crate::numerics::{ensure_wide_exponents, factorial, log10_abs, HPReal, PrecCtx, ERR_PREC};
use crate::quadrature::{default_tol, integrate_many, log_concave_cutoff, QuadPoint, QuadSpec};
use crate::{Error, Result};

const LN_10: f64 = std::f64::consts::LN_10;

/// Series controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiSeriesParams {
    pub ctx: PrecCtx,
    /// Hard cap on the summation index.
    pub n_max_hard: usize,
    /// Highest derivative order served.
    pub deriv_ceiling: usize,
}

impl PhiSeriesParams {
    pub const DEFAULT_N_MAX: usize = 200;
    pub const DEFAULT_DERIV_CEILING: usize = 60;

    pub fn new(ctx: PrecCtx) -> Self {
        PhiSeriesParams {
            ctx,
            n_max_hard: Self::DEFAULT_N_MAX,
            deriv_ceiling: Self::DEFAULT_DERIV_CEILING,
        }
    }
}

impl Default for PhiSeriesParams {
    fn default() -> Self {
        Self::new(PrecCtx::default())
    }
}

fn up64(x: &Float) -> Float {
    let mut e = Float::new(ERR_PREC);
    rug::ops::AssignRound::assign_round(&mut e, &*x.as_abs(), Round::Up);
    e
}

fn pow2_neg(bits: u32) -> Float {
    let mut e = Float::with_val(ERR_PREC, 1);
    e >>= bits;
    e
}

fn ln_abs(x: &Float) -> f64 {
    log10_abs(x) * LN_10
}

/// Head (`n = 1`) and tail (`n ≥ 2`) of `Σ n² p_k(n²y) e^{-(n²-1)y}` for
/// `k = 1..=k_max`, each with an absolute error bound.
struct SplitSums {
    head: Vec<Float>,
    head_err: Vec<Float>,
    tail: Vec<Float>,
    tail_err: Vec<Float>,
    /// `|p_k|(y)`, the absolute-coefficient polynomial at `y`
    head_abs: Vec<Float>,
}

struct PolySet {
    coeffs: Vec<Vec<Float>>,
    abs: Vec<Vec<Float>>,
    ln_s: Vec<f64>,
}

fn poly_set(k_max: usize, bits: u32) -> PolySet {
    let polys = cv_table(k_max);
    let mut coeffs = Vec::with_capacity(k_max);
    let mut abs = Vec::with_capacity(k_max);
    let mut ln_s = Vec::with_capacity(k_max);
    for p in &polys {
        coeffs.push(p.coeffs().iter().map(|c| Float::with_val(bits, c)).collect());
        abs.push(
            p.coeffs()
                .iter()
                .map(|c| Float::with_val_round(ERR_PREC, Integer::from(c.abs_ref()), Round::Up).0)
                .collect::<Vec<_>>(),
        );
        ln_s.push(ln_abs(&Float::with_val(ERR_PREC, p.abs_coeff_sum())));
    }
    PolySet { coeffs, abs, ln_s }
}

fn horner(c: &[Float], x: &Float, bits: u32) -> Float {
    let mut acc = Float::new(bits);
    for a in c.iter().rev() {
        acc *= x;
        acc += a;
    }
    acc
}

fn horner_up(c: &[Float], x: &Float) -> Float {
    let mut acc = Float::new(ERR_PREC);
    for a in c.iter().rev() {
        acc = Float::with_val_round(ERR_PREC, &acc * x, Round::Up).0;
        acc.add_assign_round(a, Round::Up);
    }
    acc
}

/// `ln` of the bound on `Σ_{n > N} n² S_k (n²y)^k e^{-(n²-1)y}`, or `None`
/// while the term ratio is not yet below one.
fn ln_tail_bound(ln_s: f64, k: usize, ln_y: f64, y: f64, n_done: usize) -> Option<f64> {
    let n1 = (n_done + 1) as f64;
    let kf = k as f64;
    let ln_rho = (2.0 * kf + 2.0) * ((n1 + 1.0) / n1).ln() - (2.0 * n1 + 1.0) * y;
    if ln_rho >= -1e-3 {
        return None;
    }
    let ln_h = ln_s + (2.0 * kf + 2.0) * n1.ln() + kf * ln_y - (n1 * n1 - 1.0) * y;
    Some(ln_h - (-(ln_rho.exp_m1())).ln() + std::f64::consts::LN_2)
}

fn split_sums(y: &Float, k_max: usize, bits: u32, params: &PhiSeriesParams) -> Result<SplitSums> {
    let ps = poly_set(k_max, bits);
    let ln_y = ln_abs(y);
    let yf = y.to_f64();
    let tol_ln = -f64::from(params.ctx.tail_tol_exponent()) * LN_10;
    let eps = pow2_neg(bits);

    let xy = Float::with_val(bits, y);
    let y_up = up64(&xy);
    let mut head = Vec::with_capacity(k_max);
    let mut head_err = Vec::with_capacity(k_max);
    let mut head_abs = Vec::with_capacity(k_max);
    for k in 0..k_max {
        head.push(horner(&ps.coeffs[k], &xy, bits));
        let a = horner_up(&ps.abs[k], &y_up);
        head_err.push(Float::with_val(ERR_PREC, &a * &eps) * (3 * k as u32 + 11));
        head_abs.push(a);
    }
    let mut tail = vec![Float::new(bits); k_max];
    let mut tail_err = vec![Float::new(ERR_PREC); k_max];

    // e^{-(n²-1)y} by recurrence from e^{-y}; each product adds one
    // rounding at 16 extra bits, far below the per-term allowance
    let wbits = bits + 16;
    let q = Float::with_val(wbits, Float::with_val(y.prec(), -y).exp());
    let q2 = Float::with_val(wbits, &q * &q);
    let mut step = Float::with_val(wbits, &q2 * &q);
    let mut e_cur = Float::with_val(wbits, 1);
    let mut n = 1usize;
    loop {
        let bounds: Vec<Option<f64>> = (0..k_max)
            .map(|k| ln_tail_bound(ps.ln_s[k], k + 1, ln_y, yf, n))
            .collect();
        let done = bounds.iter().enumerate().all(|(k, b)| match b {
            Some(b) => *b <= ps.ln_s[k] + (k + 1) as f64 * ln_y + tol_ln,
            None => false,
        });
        if done {
            for (k, b) in bounds.into_iter().enumerate() {
                let t = Float::with_val(ERR_PREC, b.unwrap()).exp();
                tail_err[k].add_assign_round(&t, Round::Up);
            }
            break;
        }
        n += 1;
        if n > params.n_max_hard {
            return Err(Error::TailTooLarge {
                tail: format!("series still above tolerance at n = {}", params.n_max_hard),
                tol: format!("1e-{}", params.ctx.tail_tol_exponent()),
            });
        }
        let n2 = (n * n) as u32;
        let x = Float::with_val(bits, y * n2);
        // E_n = E_{n-1} D_{n-1}, D_n = D_{n-1} e^{-2y}
        e_cur *= &step;
        step *= &q2;
        let e = Float::with_val(bits, &e_cur);
        let e_up = up64(&e);
        let x_up = up64(&x);
        let scale = Float::with_val(bits, &e * n2);
        for k in 0..k_max {
            let v = horner(&ps.coeffs[k], &x, bits) * &scale;
            tail[k] += v;
            let a = Float::with_val(ERR_PREC, horner_up(&ps.abs[k], &x_up) * &e_up) * n2;
            let r = Float::with_val(ERR_PREC, &a * &eps) * (3 * k as u32 + 12 + n as u32);
            tail_err[k].add_assign_round(&r, Round::Up);
        }
    }
    Ok(SplitSums {
        head,
        head_err,
        tail,
        tail_err,
        head_abs,
    })
}

/// `Phi^{(j)}(u)` for `j = 0..=j_max` at an exact abscissa.
fn phi_core(u: &Float, j_max: usize, bits: u32, params: &PhiSeriesParams) -> Result<Vec<HPReal>> {
    ensure_wide_exponents();
    if u.is_sign_negative() && !u.is_zero() {
        return Err(Error::invalid("Phi is evaluated for u >= 0 only"));
    }
    let uf = u.to_f64();
    let log2_y = (std::f64::consts::PI.ln() + 4.0 * uf) / std::f64::consts::LN_2;
    let ext = (bits + log2_y.max(0.0).ceil() as u32 + 24).max(u.prec());
    let y = Float::with_val(ext, u * 4u32).exp() * Float::with_val(ext, Constant::Pi);
    phi_at_y(&y, j_max, bits, params)
}

/// `Phi^{(j)}` at the point with `π e^{4u} = y`; `y` should carry enough
/// bits for `e^{-y}` to keep full relative accuracy.
pub(crate) fn phi_at_y(y: &Float, j_max: usize, bits: u32, params: &PhiSeriesParams) -> Result<Vec<HPReal>> {
    let s = split_sums(y, j_max + 1, bits, params)?;
    let wp = bits + 16;
    let pi = Float::with_val(wp, Constant::Pi);
    // π (y/π)^{5/4} e^{-y}
    let ratio = Float::with_val(wp, y / &pi);
    let pw = Float::with_val(wp, ratio.sqrt_ref()).sqrt() * &ratio;
    let e = Float::with_val(wp, Float::with_val(y.prec(), -y).exp());
    let pref = Float::with_val(bits, pw * e * &pi);
    let pref_up = up64(&pref);
    let eps = pow2_neg(bits);
    let mut out = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let tot = Float::with_val(bits, &s.head[j] + &s.tail[j]);
        let value = Float::with_val(bits, &tot * &pref);
        let mut err = Float::with_val(ERR_PREC, &s.head_err[j] + &s.tail_err[j]);
        err *= &pref_up;
        let r = Float::with_val(ERR_PREC, up64(&value) * &eps) * 8u32;
        err.add_assign_round(&r, Round::Up);
        out.push(HPReal::new(value, err));
    }
    Ok(out)
}

fn check_order(j: usize, params: &PhiSeriesParams) -> Result<()> {
    if j > params.deriv_ceiling {
        return Err(Error::DerivativeCeiling {
            order: j,
            ceiling: params.deriv_ceiling,
        });
    }
    Ok(())
}

/// `Phi^{(j)}(u)` for every `j ≤ j_max` at an exact point.
pub fn phi_derivs(u: &Float, j_max: usize, params: &PhiSeriesParams) -> Result<Vec<HPReal>> {
    check_order(j_max, params)?;
    phi_core(u, j_max, params.ctx.bits(), params)
}

/// `Phi^{(j)}(u)`; an uncertain `u` widens the result by `2 |Phi^{(j+1)}| err_u`.
pub fn phi_deriv(u: &HPReal, j: usize, params: &PhiSeriesParams) -> Result<HPReal> {
    check_order(j, params)?;
    if u.err().is_zero() {
        return Ok(phi_core(u.value(), j, params.ctx.bits(), params)?.swap_remove(j));
    }
    let mut v = phi_core(u.value(), j + 1, params.ctx.bits(), params)?;
    let next = v.pop().unwrap();
    let spread = Float::with_val(ERR_PREC, up64(next.value()) * u.err()) * 2u32;
    Ok(v.swap_remove(j).widen(&spread))
}

/// `Ω_j(y) = p_{j+1}(y) + Υ_j(y)`.
#[derive(Clone, Debug)]
pub struct OmegaSplit {
    pub omega: HPReal,
    pub head: HPReal,
    pub upsilon: HPReal,
}

/// Split of the scaled series at `y ≥ π` into its CV head and `n ≥ 2` tail.
pub fn omega_upsilon_split(y: &HPReal, j: usize, params: &PhiSeriesParams) -> Result<OmegaSplit> {
    check_order(j, params)?;
    ensure_wide_exponents();
    let bits = params.ctx.bits();
    let pi = Float::with_val(y.prec().max(bits), Constant::Pi);
    if *y.value() < pi {
        return Err(Error::invalid("the split is defined for y >= pi"));
    }
    let s = split_sums(y.value(), j + 1, bits, params)?;
    let mut spread = Float::new(ERR_PREC);
    if !y.err().is_zero() {
        // |d/dy Ω_j| ≤ 2 |p_{j+1}'|(y) on the head's scale
        let p = cv_table(j + 1).pop().unwrap().derivative();
        let c: Vec<Float> = p
            .coeffs()
            .iter()
            .map(|c| Float::with_val_round(ERR_PREC, Integer::from(c.abs_ref()), Round::Up).0)
            .collect();
        let d = horner_up(&c, &up64(y.value()));
        spread = Float::with_val(ERR_PREC, &d * y.err()) * 2u32;
    }
    let head = HPReal::new(s.head[j].clone(), s.head_err[j].clone());
    let upsilon = HPReal::new(s.tail[j].clone(), s.tail_err[j].clone());
    let omega = (&head + &upsilon).widen(&spread);
    let _ = &s.head_abs;
    Ok(OmegaSplit {
        omega,
        head: head.widen(&spread),
        upsilon,
    })
}

/// `ln` of the single-term majorant `4π² e^{9t} e^{-π e^{4t}}` of `Phi`.
pub fn ln_phi_majorant(t: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (4.0 * pi * pi).ln() + 9.0 * t - pi * (4.0 * t).exp()
}

/// Slope of [`ln_phi_majorant`].
pub fn ln_phi_majorant_slope(t: f64) -> f64 {
    9.0 - 4.0 * std::f64::consts::PI * (4.0 * t).exp()
}

/// A cumulant value together with its order and abscissa.
#[derive(Clone, Debug)]
pub struct CumulantValue {
    pub m: usize,
    pub u: HPReal,
    pub value: HPReal,
}

/// `Psi_0(u), …, Psi_{m_max}(u)` at an exact point, the positive orders from
/// one vector quadrature over `[u, u + 2T]`.
pub fn cumulants(u: &Float, m_max: usize, params: &PhiSeriesParams) -> Result<Vec<HPReal>> {
    ensure_wide_exponents();
    if u.is_sign_negative() && !u.is_zero() {
        return Err(Error::invalid("Phi is evaluated for u >= 0 only"));
    }
    let bits = params.ctx.bits();
    let uf = u.to_f64();
    let ln_y = std::f64::consts::PI.ln() + 4.0 * uf;
    let ext = (bits + (ln_y / std::f64::consts::LN_2).max(0.0).ceil() as u32 + 24).max(u.prec());
    let y = Float::with_val(ext, u * 4u32).exp() * Float::with_val(ext, Constant::Pi);
    let phi0 = phi_at_y(&y, 0, bits, params)?.pop().unwrap();
    let mut out = vec![phi0];
    if m_max == 0 {
        return Ok(out);
    }
    // integrate in w = π e^{4t}, offset x = w - y:
    // Psi_m = ∫_0^∞ Phi (ln(1 + x/y)/4)^{m-1}/(m-1)! dx/(4w)
    let yf = ln_y.exp();
    let ln_rate = (4.0 * yf + 9.0).ln();
    let tol_ln = -f64::from(params.ctx.tail_tol_exponent()) * LN_10;
    let ln_fact: Vec<f64> = (0..m_max)
        .map(|k| ln_abs(&Float::with_val(ERR_PREC, factorial(k as u32))))
        .collect();
    let pi = std::f64::consts::PI;
    let base = |x: f64| {
        let w = yf + x;
        (4.0 * pi * pi).ln() + 2.25 * (w / pi).ln() - x - (4.0 * w).ln()
    };
    let base_slope = |x: f64| {
        let w = yf + x;
        1.25 / w - 1.0
    };
    let g = |m: usize| {
        let lf = ln_fact[m - 1];
        move |x: f64| {
            base(x) - yf + (m as f64 - 1.0) * ((x / yf).ln_1p() / 4.0).max(1e-300).ln() - lf
        }
    };
    let dg = |m: usize| {
        move |x: f64| {
            let w = yf + x;
            let l = (x / yf).ln_1p().max(1e-300);
            base_slope(x) + (m as f64 - 1.0) / (w * l)
        }
    };
    let mut b: f64 = 0.0;
    for m in 1..=m_max {
        let scale = ln_phi_majorant(uf) - m as f64 * ln_rate;
        let (bm, _) = log_concave_cutoff(&g(m), &dg(m), 0.0, scale + tol_ln)?;
        b = b.max(bm);
    }
    let upper = 2.0 * b;
    let tails: Vec<Float> = (1..=m_max)
        .map(|m| {
            let lt = g(m)(upper) - (-dg(m)(upper)).ln();
            Float::with_val(ERR_PREC, lt).exp()
        })
        .collect();

    let w_bits = ext + 8;
    let inv_fact: Vec<Float> = (0..m_max)
        .map(|k| Float::with_val(bits, factorial(k as u32)).recip())
        .collect();
    let integrand = |p: &QuadPoint<'_>| -> Result<Vec<HPReal>> {
        let w = Float::with_val(w_bits, &y + p.offset);
        let phi = phi_at_y(&w, 0, bits, params)?.pop().unwrap();
        let jac = HPReal::rounded(Float::with_val(bits, &w * 4u32).recip());
        let base = &phi * &jac;
        let lr = Float::with_val(bits + 8, p.offset / &y).ln_1p() / 4u32;
        let lr = HPReal::rounded(Float::with_val(bits, lr));
        let mut vals = Vec::with_capacity(m_max);
        let mut pw = HPReal::exact(Float::with_val(bits, 1));
        for (k, f) in inv_fact.iter().enumerate() {
            if k > 0 {
                pw = &pw * &lr;
            }
            vals.push((&base * &pw).mul_float(f));
        }
        Ok(vals)
    };
    let spec = QuadSpec::finite(Float::new(bits), Float::with_val(bits, upper), default_tol(&params.ctx));
    let res = integrate_many(&integrand, &spec, &params.ctx)?;
    for (v, t) in res.values.into_iter().zip(tails.iter()) {
        out.push(v.widen(t));
    }
    Ok(out)
}

/// `Psi_m(u)`; `Psi_0 = Phi`.
pub fn cumulant(u: &HPReal, m: usize, params: &PhiSeriesParams) -> Result<CumulantValue> {
    let mut all = cumulants(u.value(), m, params)?;
    let mut value = all.pop().unwrap();
    if !u.err().is_zero() {
        // Psi_m' = -Psi_{m-1}
        let slope = if m == 0 {
            phi_deriv(&HPReal::exact(u.value().clone()), 1, params)?
        } else {
            all.pop().unwrap()
        };
        let spread = Float::with_val(ERR_PREC, up64(slope.value()) * u.err()) * 2u32;
        value = value.widen(&spread);
    }
    Ok(CumulantValue {
        m,
        u: u.clone(),
        value,
    })
}

/// `d`-th derivative of `Psi_m` for `d = 0..=d_max` at an exact point:
/// `(-1)^d Psi_{m-d}` while `d ≤ m`, then `(-1)^m Phi^{(d-m)}`.
pub fn kernel_derivs(u: &Float, m: usize, d_max: usize, params: &PhiSeriesParams) -> Result<Vec<HPReal>> {
    let psi = cumulants(u, m, params)?;
    let phi = if d_max > m {
        phi_derivs(u, d_max - m, params)?
    } else {
        Vec::new()
    };
    Ok(assemble_kernel(&psi, &phi, m, d_max))
}

pub(crate) fn assemble_kernel(psi: &[HPReal], phi: &[HPReal], m: usize, d_max: usize) -> Vec<HPReal> {
    (0..=d_max)
        .map(|d| {
            let (v, odd) = if d <= m {
                (psi[m - d].clone(), d % 2 == 1)
            } else {
                (phi[d - m].clone(), m % 2 == 1)
            };
            if odd {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Single kernel derivative; an uncertain `u` widens by the next derivative.
pub fn cumulant_kernel_deriv(u: &HPReal, m: usize, d: usize, params: &PhiSeriesParams) -> Result<HPReal> {
    let need = if u.err().is_zero() { d } else { d + 1 };
    let mut all = kernel_derivs(u.value(), m, need, params)?;
    if need > d {
        let next = all.pop().unwrap();
        let spread = Float::with_val(ERR_PREC, up64(next.value()) * u.err()) * 2u32;
        return Ok(all.swap_remove(d).widen(&spread));
    }
    Ok(all.swap_remove(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: u32) -> PhiSeriesParams {
        PhiSeriesParams::new(PrecCtx::with_digits(d).unwrap())
    }

    fn fl(p: &PhiSeriesParams, v: f64) -> Float {
        Float::with_val(p.ctx.bits(), v)
    }

    /// Direct double-precision-free oracle: sum the closed-form terms of
    /// `Phi` for `n ≤ n_terms` at `bits` without any CV machinery.
    fn phi_brute(u: f64, n_terms: u32, bits: u32) -> Float {
        let u = Float::with_val(bits, u);
        let pi = Float::with_val(bits, Constant::Pi);
        let e9 = Float::with_val(bits, &u * 9u32).exp();
        let e5 = Float::with_val(bits, &u * 5u32).exp();
        let e4 = Float::with_val(bits, &u * 4u32).exp();
        let mut s = Float::new(bits);
        for n in 1..=n_terms {
            let n2 = Float::with_val(bits, n * n);
            let a = Float::with_val(bits, &pi * &pi) * 2u32 * Float::with_val(bits, &n2 * &n2) * &e9;
            let b = Float::with_val(bits, &pi * &n2) * 3u32 * &e5;
            let ex = (-(Float::with_val(bits, &pi * &n2) * &e4)).exp();
            s += (a - b) * ex;
        }
        s
    }

    #[test]
    fn phi_zero_matches_brute_force() {
        let p = params(100);
        let v = phi_derivs(&fl(&p, 0.0), 0, &p).unwrap().pop().unwrap();
        for (n, bits) in [(50u32, 500u32), (100, 800)] {
            let b = phi_brute(0.0, n, bits);
            let d = Float::with_val(bits, v.value() - &b).abs();
            assert!(d <= *v.err(), "n = {n}");
        }
        assert!((v.to_f64() - 0.4467).abs() < 1e-4);
        assert!(v.err().to_f64() < 1e-110);
    }

    #[test]
    fn odd_derivatives_vanish_at_origin() {
        let p = params(80);
        let d = phi_derivs(&fl(&p, 0.0), 9, &p).unwrap();
        for j in (1..=9).step_by(2) {
            let a = d[j].value().clone().abs();
            assert!(a <= *d[j].err(), "j = {j}: {} vs {}", a, d[j].err());
        }
        assert!(d[0].is_certainly_positive());
        assert!(d[2].is_certainly_negative() || d[2].is_certainly_positive());
    }

    #[test]
    fn first_term_dominates_at_two() {
        let p = params(120);
        let bits = p.ctx.bits();
        let v = phi_derivs(&fl(&p, 2.0), 0, &p).unwrap().pop().unwrap();
        let one = phi_brute(2.0, 1, bits + 200);
        let rel = Float::with_val(bits, Float::with_val(bits, v.value() - &one) / &one).abs();
        assert!(rel < 1e-100_f64);
    }

    #[test]
    fn positivity_and_monotonicity_on_grid() {
        let p = params(40);
        for i in 0..=30 {
            let u = fl(&p, i as f64 * 0.1);
            let d = phi_derivs(&u, 1, &p).unwrap();
            assert!(d[0].is_certainly_positive(), "u = {u}");
            if i > 0 {
                assert!(d[1].is_certainly_negative(), "u = {u}");
            }
        }
    }

    #[test]
    fn finite_difference_of_derivatives() {
        let p = params(60);
        let bits = p.ctx.bits();
        let h = Float::with_val(bits, 1e-25);
        for &u0 in &[0.1, 0.7, 1.3] {
            let u = fl(&p, u0);
            let lo = phi_derivs(&Float::with_val(bits, &u - &h), 4, &p).unwrap();
            let hi = phi_derivs(&Float::with_val(bits, &u + &h), 4, &p).unwrap();
            let mid = phi_derivs(&u, 5, &p).unwrap();
            for j in 0..4 {
                let fd = Float::with_val(bits, hi[j].value() - lo[j].value()) / Float::with_val(bits, &h * 2u32);
                let rel = Float::with_val(bits, (fd - mid[j + 1].value()) / mid[j + 1].value()).abs();
                assert!(rel < 1e-20_f64, "u = {u0}, j = {j}: {rel}");
            }
        }
    }

    #[test]
    fn truncation_is_stable() {
        let p = params(100);
        let mut wide = p;
        wide.ctx = PrecCtx::new(100, 80).unwrap();
        for &u in &[0.0, 0.25, 1.0] {
            let a = phi_derivs(&fl(&p, u), 6, &p).unwrap();
            let b = phi_derivs(&Float::with_val(wide.ctx.bits(), u), 6, &wide).unwrap();
            for j in 0..=6 {
                let d = Float::with_val(p.ctx.bits(), a[j].value() - b[j].value()).abs();
                assert!(d <= *a[j].err(), "u = {u}, j = {j}");
            }
        }
    }

    #[test]
    fn ceiling_enforced() {
        let p = params(40);
        assert!(matches!(
            phi_derivs(&fl(&p, 0.5), 61, &p),
            Err(Error::DerivativeCeiling { .. })
        ));
        assert!(phi_derivs(&fl(&p, -0.5), 0, &p).is_err());
    }

    #[test]
    fn split_at_pi() {
        let p = params(80);
        let bits = p.ctx.bits();
        let pi = Float::with_val(bits, Constant::Pi);
        let y = HPReal::exact(pi.clone());
        let s0 = omega_upsilon_split(&y, 0, &p).unwrap();
        let phi0 = phi_derivs(&fl(&p, 0.0), 0, &p).unwrap().pop().unwrap();
        let rebuilt = Float::with_val(bits, phi0.value() * Float::with_val(bits, pi.exp_ref())) / &pi;
        let d = Float::with_val(bits, s0.omega.value() - &rebuilt).abs();
        assert!(d < 1e-70_f64);
        let ident = Float::with_val(bits, s0.omega.value() - s0.head.value()) - s0.upsilon.value();
        assert!(ident.abs() <= Float::with_val(64, s0.omega.err() + s0.upsilon.err()));

        let s2 = omega_upsilon_split(&y, 2, &p).unwrap();
        let bound = crate::cvpoly::c_bound(2, &pi)
            * Float::with_val(bits, Float::u_pow_u(2, 13))
            * Float::with_val(bits, &pi * &pi) * &pi
            * Float::with_val(bits, -3 * pi.clone()).exp();
        assert!(s2.upsilon.value().clone().abs() < bound);
        assert!(omega_upsilon_split(&HPReal::exact(Float::with_val(bits, 3)), 0, &p).is_err());
    }

    #[test]
    fn tail_matches_direct_sum() {
        let p = params(80);
        let bits = p.ctx.bits();
        let y = Float::with_val(bits, Constant::Pi) * 2u32;
        let s1 = omega_upsilon_split(&HPReal::exact(y.clone()), 1, &p).unwrap();
        let hb = 2 * bits;
        let yy = Float::with_val(hb, &y);
        let p2 = cv_table(2).pop().unwrap();
        let mut direct = Float::new(hb);
        for n in 2..40u32 {
            let x = Float::with_val(hb, &yy * (n * n));
            let pv = p2
                .coeffs()
                .iter()
                .rev()
                .fold(Float::new(hb), |acc, c| acc * &x + c);
            let e = Float::with_val(hb, -(Float::with_val(hb, &yy * (n * n - 1)))).exp();
            direct += pv * e * (n * n);
        }
        let d = Float::with_val(hb, s1.upsilon.value() - &direct).abs();
        assert!(d <= s1.upsilon.err().clone() * 2u32 + 1e-150_f64);
        assert_eq!(s1.upsilon.value().cmp0(), direct.cmp0());
    }

    #[test]
    fn cumulant_zero_order_and_derivative_law() {
        let p = params(60);
        let bits = p.ctx.bits();
        let u = HPReal::exact(fl(&p, 0.5));
        let c0 = cumulant(&u, 0, &p).unwrap();
        let phi = phi_derivs(u.value(), 0, &p).unwrap().pop().unwrap();
        assert_eq!(c0.value.value(), phi.value());

        let h = Float::with_val(bits, 1e-15);
        let lo = cumulants(&Float::with_val(bits, u.value() - &h), 3, &p).unwrap();
        let hi = cumulants(&Float::with_val(bits, u.value() + &h), 3, &p).unwrap();
        let mid = cumulants(u.value(), 3, &p).unwrap();
        for m in 1..=3 {
            let fd = Float::with_val(bits, hi[m].value() - lo[m].value()) / Float::with_val(bits, &h * 2u32);
            let rel = Float::with_val(bits, (fd + mid[m - 1].value()) / mid[m - 1].value()).abs();
            assert!(rel < 1e-20_f64, "m = {m}: {rel}");
            assert!(mid[m].is_certainly_positive());
        }
    }

    #[test]
    fn cumulants_match_direct_quadrature() {
        // oracle: plain integration of Phi(t) (t-u)^{m-1}/(m-1)! in t
        let p = params(50);
        let bits = p.ctx.bits();
        for uf in [0.0, 0.7, 1.9] {
            let u = fl(&p, uf);
            let psi = cumulants(&u, 3, &p).unwrap();
            let f = |q: &QuadPoint<'_>| -> Result<Vec<HPReal>> {
                let t = Float::with_val(bits + 40, q.lower + q.offset);
                let phi = phi_derivs(&t, 0, &p)?.pop().unwrap();
                let d = HPReal::rounded(Float::with_val(bits, q.offset));
                let d2 = &d * &d;
                Ok(vec![phi.clone(), &phi * &d, (&phi * &d2).mul_float(&Float::with_val(bits, 0.5))])
            };
            let yu = std::f64::consts::PI * (4.0 * uf).exp();
            let upper = Float::with_val(bits, ((yu + 300.0) / std::f64::consts::PI).ln() / 4.0);
            let spec = QuadSpec::finite(u.clone(), upper, default_tol(&p.ctx));
            let direct = integrate_many(&f, &spec, &p.ctx).unwrap().values;
            for m in 1..=3 {
                let d = Float::with_val(bits, psi[m].value() - direct[m - 1].value()).abs();
                let rel = d / psi[m].value();
                assert!(rel < 1e-45_f64, "u = {uf}, m = {m}: {rel}");
            }
        }
    }

    #[test]
    fn kernel_sign_conventions() {
        let p = params(40);
        let u = fl(&p, 0.4);
        let k = kernel_derivs(&u, 2, 4, &p).unwrap();
        let psi = cumulants(&u, 2, &p).unwrap();
        let phi = phi_derivs(&u, 2, &p).unwrap();
        assert_eq!(k[0].value(), psi[2].value());
        assert_eq!(*k[1].value(), -psi[1].value().clone());
        assert_eq!(k[2].value(), phi[0].value());
        assert_eq!(k[4].value(), phi[2].value());
        let k1 = kernel_derivs(&u, 1, 3, &p).unwrap();
        assert_eq!(*k1[3].value(), -phi[2].value().clone());
        let k0 = kernel_derivs(&u, 2, 0, &p).unwrap();
        assert_eq!(k0.len(), 1);
        assert_eq!(k0[0].value(), psi[2].value());
    }
}
