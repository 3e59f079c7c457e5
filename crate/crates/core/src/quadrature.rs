//! Doubling tanh-sinh quadrature with error accounting, plus the moment
//! integrals of `Phi` built on it (`beta_n`, `b_n`, shifted moments).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rug::float::{Constant, Round};
use rug::ops::AddAssignRound;
use rug::Float;

use crate::numerics::{ensure_wide_exponents, log10_abs, HPReal, PrecCtx, ERR_PREC};
use crate::{Error, Result};

mod beta;
pub(crate) mod moments;

pub use beta::{b_moment, beta, beta_with_table, BetaEntry, BetaTable};
pub use moments::{find_peak, log_integrand_slope, moment_integral, moment_integrals};

/// A node handed to the integrand: the absolute abscissa and its offset from
/// the lower end of the current panel (kept separately so integrands with a
/// boundary layer at the lower end lose no relative accuracy).
pub struct QuadPoint<'a> {
    pub x: &'a Float,
    pub lower: &'a Float,
    pub offset: &'a Float,
}

/// Integrand returning one or more components with their own error bounds.
pub type Integrand<'f> = dyn Fn(&QuadPoint<'_>) -> Result<Vec<HPReal>> + 'f;

/// How the upper end of the range is fixed.
pub enum UpperPolicy {
    Explicit(Float),
    /// `|f(t)| <= exp(g(t))` with `g` concave and decreasing beyond the cut;
    /// the cut is the first `b` whose tail bound `exp(g(b)) / -g'(b)` falls
    /// below `exp(log_abs_tol)`, then the range is doubled.
    LogConcaveTail {
        log_majorant: Box<dyn Fn(f64) -> f64 + Sync + Send>,
        log_majorant_slope: Box<dyn Fn(f64) -> f64 + Sync + Send>,
        log_abs_tol: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PanelRule {
    TanhSinh,
}

pub struct QuadSpec {
    pub lower: Float,
    pub upper: UpperPolicy,
    /// Interior breakpoints (absolute abscissas) splitting the range.
    pub breakpoints: Vec<Float>,
    /// `log10` of the relative tolerance against the L1 norm of each component.
    pub target_tol_log10: f64,
    pub rule: PanelRule,
    pub max_level: u32,
}

impl QuadSpec {
    pub fn finite(lower: Float, upper: Float, target_tol_log10: f64) -> Self {
        QuadSpec {
            lower,
            upper: UpperPolicy::Explicit(upper),
            breakpoints: Vec::new(),
            target_tol_log10,
            rule: PanelRule::TanhSinh,
            max_level: 12,
        }
    }

    pub fn with_breakpoints(mut self, points: Vec<Float>) -> Self {
        self.breakpoints = points;
        self
    }
}

/// Values and diagnostics of one integration.
#[derive(Clone, Debug)]
pub struct QuadResult {
    pub values: Vec<HPReal>,
    pub upper: Float,
    pub levels: u32,
    pub evaluations: usize,
}

#[derive(Debug)]
struct Node {
    at_zero: bool,
    /// distance from the node to the nearer endpoint of `[-1, 1]`
    d: Float,
    /// `(pi/2) cosh t / cosh^2((pi/2) sinh t)`
    w: Float,
}

fn t_max(bits: u32) -> f64 {
    (f64::from(bits + 48) * std::f64::consts::LN_2 / std::f64::consts::PI).asinh() + 0.5
}

fn nodes(bits: u32, level: u32) -> Arc<Vec<Node>> {
    type Cache = Mutex<HashMap<(u32, u32), Arc<Vec<Node>>>>;
    static CACHE: std::sync::OnceLock<Cache> = std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(bits, level)) {
        return v.clone();
    }
    ensure_wide_exponents();
    let tm = t_max(bits);
    let h = 0.5f64.powi(level as i32);
    let half_pi = Float::with_val(bits, Constant::Pi) / 2u32;
    let mut out = Vec::new();
    let mut k: u64 = if level == 0 { 0 } else { 1 };
    let step = if level == 0 { 1 } else { 2 };
    while (k as f64) * h <= tm {
        let mut t = Float::with_val(bits, k);
        t >>= level;
        let s = Float::with_val(bits, t.sinh_ref()) * &half_pi;
        let e2s = Float::with_val(bits, 2 * s.clone()).exp();
        let d = Float::with_val(bits, 2) / (e2s + 1u32);
        let es = s.clone().exp();
        let cosh_s = (Float::with_val(bits, &es + es.clone().recip())) / 2u32;
        let w = Float::with_val(bits, t.cosh_ref()) * &half_pi / cosh_s.square();
        out.push(Node {
            at_zero: k == 0,
            d,
            w,
        });
        k += step;
    }
    let v = Arc::new(out);
    cache.lock().unwrap().insert((bits, level), v.clone());
    v
}

fn up64(x: &Float) -> Float {
    let mut e = Float::new(ERR_PREC);
    rug::ops::AssignRound::assign_round(&mut e, &*x.as_abs(), Round::Up);
    e
}

struct PanelAcc {
    sum: Vec<Float>,
    l1: Vec<Float>,
    f_err: Vec<Float>,
    f_max: Vec<Float>,
    evals: usize,
}

fn eval_level(
    f: &Integrand<'_>,
    a: &Float,
    c: &Float,
    level: u32,
    bits: u32,
    acc: &mut PanelAcc,
) -> Result<()> {
    let two_c = Float::with_val(bits, c * 2u32);
    for node in nodes(bits, level).iter() {
        let wc = Float::with_val(bits, &node.w * c);
        let offsets: Vec<Float> = if node.at_zero {
            vec![c.clone()]
        } else {
            let near = Float::with_val(bits, c * &node.d);
            let far = Float::with_val(bits, &two_c - &near);
            vec![near, far]
        };
        for off in offsets {
            let x = Float::with_val(bits, a + &off);
            let vals = f(&QuadPoint { x: &x, lower: a, offset: &off })?;
            acc.evals += 1;
            if acc.sum.is_empty() {
                let z = Float::new(bits);
                acc.sum = vec![z.clone(); vals.len()];
                acc.l1 = vec![z; vals.len()];
                acc.f_err = vec![Float::new(ERR_PREC); vals.len()];
                acc.f_max = vec![Float::new(ERR_PREC); vals.len()];
            }
            if vals.len() != acc.sum.len() {
                return Err(Error::invalid("integrand changed its component count"));
            }
            for (i, v) in vals.iter().enumerate() {
                let term = Float::with_val(bits, v.value() * &wc);
                acc.l1[i] += term.clone().abs();
                acc.sum[i] += term;
                let e = Float::with_val(ERR_PREC, v.err() * &wc);
                acc.f_err[i].add_assign_round(&up64(&e), Round::Up);
                let av = up64(v.value());
                if av > acc.f_max[i] {
                    acc.f_max[i] = av;
                }
            }
        }
    }
    Ok(())
}

/// Integrate one finite panel `[a, b]`.
fn panel(
    f: &Integrand<'_>,
    a: &Float,
    b: &Float,
    tol_log10: f64,
    max_level: u32,
    bits: u32,
) -> Result<(Vec<HPReal>, u32, usize)> {
    let c = Float::with_val(bits, b - a) / 2u32;
    let mut acc = PanelAcc {
        sum: Vec::new(),
        l1: Vec::new(),
        f_err: Vec::new(),
        f_max: Vec::new(),
        evals: 0,
    };
    let mut prev: Option<Vec<Float>> = None;
    let mut prev_rels: Vec<f64> = Vec::new();
    let tol_f = Float::with_val(ERR_PREC, tol_log10 * std::f64::consts::LN_10).exp();
    for level in 0..=max_level {
        eval_level(f, a, &c, level, bits, &mut acc)?;
        let mut h = Float::with_val(bits, 1);
        h >>= level;
        let cur: Vec<Float> = acc.sum.iter().map(|s| Float::with_val(bits, s * &h)).collect();
        let mut rels = Vec::with_capacity(cur.len());
        if let Some(p) = &prev {
            let mut ok = level >= 3;
            let mut diffs = Vec::with_capacity(cur.len());
            for i in 0..cur.len() {
                let diff = up64(&Float::with_val(bits, &cur[i] - &p[i]));
                let l1 = up64(&Float::with_val(bits, &acc.l1[i] * &h));
                let rel = log10_abs(&diff) - log10_abs(&l1);
                rels.push(rel);
                let mut bound = diff.clone();
                if diff > Float::with_val(ERR_PREC, &tol_f * &l1) {
                    // quadratic convergence: the next difference is about rel²/rel_prev
                    let est = prev_rels
                        .get(i)
                        .copied()
                        .filter(|q: &f64| *q < -3.0 && rel < 1.6 * *q)
                        .map(|q| rel * rel / q + 2.0);
                    match est {
                        Some(e) if e <= tol_log10 => {
                            bound = Float::with_val(ERR_PREC, e * std::f64::consts::LN_10).exp() * &l1;
                        }
                        _ => ok = false,
                    }
                }
                diffs.push((bound, l1));
            }
            if ok {
                let n = acc.evals as u32 + 16;
                let d_cut = (-(f64::from(bits) + 48.0)).exp2();
                let mut out = Vec::with_capacity(cur.len());
                for (i, (diff, l1)) in diffs.into_iter().enumerate() {
                    let mut err = diff;
                    let mut round = l1;
                    round *= n;
                    round >>= bits.saturating_sub(1);
                    err.add_assign_round(&round, Round::Up);
                    let fe = Float::with_val(ERR_PREC, &acc.f_err[i] * &h);
                    err.add_assign_round(&fe, Round::Up);
                    let trunc = Float::with_val(ERR_PREC, &acc.f_max[i] * &c) * (4.0 * d_cut);
                    err.add_assign_round(&up64(&trunc), Round::Up);
                    out.push(HPReal::new(cur[i].clone(), err));
                }
                return Ok((out, level, acc.evals));
            }
        }
        prev = Some(cur);
        prev_rels = rels;
    }
    let last = prev.unwrap_or_default();
    Err(Error::QuadratureNonConvergence {
        levels: max_level,
        last_diff: last
            .first()
            .map(|v| format!("{:.6e}", v))
            .unwrap_or_else(|| "n/a".into()),
    })
}

/// Smallest `b >= start` (by doubling the step) where the log-concave tail
/// bound `exp(g(b)) / -g'(b)` is below `exp(log_tol)`. Returns `b` and the
/// log of the tail bound there.
pub fn log_concave_cutoff(
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    start: f64,
    log_tol: f64,
) -> Result<(f64, f64)> {
    let tail = |b: f64| {
        let s = dg(b);
        if s < 0.0 {
            Some(g(b) - (-s).ln())
        } else {
            None
        }
    };
    let mut step = 1.0 / 64.0;
    let mut b = start + step;
    for _ in 0..200 {
        if let Some(lt) = tail(b) {
            if lt <= log_tol {
                // back off towards the smallest admissible cut
                let (mut lo, mut hi) = (b - step, b);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    match tail(mid) {
                        Some(v) if v <= log_tol => hi = mid,
                        _ => lo = mid,
                    }
                }
                return Ok((hi, tail(hi).unwrap()));
            }
        }
        b += step;
        step *= 1.5;
    }
    Err(Error::TailTooLarge {
        tail: format!("no cutoff found above {start}"),
        tol: format!("e^{log_tol}"),
    })
}

/// Integrate a (possibly vector-valued) integrand under `spec`.
pub fn integrate_many(f: &Integrand<'_>, spec: &QuadSpec, ctx: &PrecCtx) -> Result<QuadResult> {
    let bits = ctx.bits();
    let lower = Float::with_val(bits, &spec.lower);
    let (upper, tail_err) = match &spec.upper {
        UpperPolicy::Explicit(b) => (Float::with_val(bits, b), None),
        UpperPolicy::LogConcaveTail {
            log_majorant,
            log_majorant_slope,
            log_abs_tol,
        } => {
            let a = lower.to_f64();
            let (b, _) = log_concave_cutoff(&**log_majorant, &**log_majorant_slope, a, *log_abs_tol)?;
            let b2 = a + 2.0 * (b - a);
            let lt = log_majorant(b2) - (-log_majorant_slope(b2)).ln();
            (Float::with_val(bits, b2), Some(Float::with_val(ERR_PREC, lt).exp()))
        }
    };
    if upper <= lower {
        return Err(Error::invalid("empty integration range"));
    }
    let mut cuts = vec![lower.clone()];
    for p in &spec.breakpoints {
        if *p > *cuts.last().unwrap() && *p < upper {
            cuts.push(Float::with_val(bits, p));
        }
    }
    cuts.push(upper.clone());
    let mut total: Option<Vec<HPReal>> = None;
    let mut levels = 0;
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (vals, lv, ev) = panel(f, &w[0], &w[1], spec.target_tol_log10, spec.max_level, bits)?;
        levels = levels.max(lv);
        evaluations += ev;
        total = Some(match total {
            None => vals,
            Some(t) => t.iter().zip(vals.iter()).map(|(x, y)| x + y).collect(),
        });
    }
    let mut values = total.unwrap_or_default();
    if let Some(te) = tail_err {
        values = values.into_iter().map(|v| v.widen(&te)).collect();
    }
    Ok(QuadResult {
        values,
        upper,
        levels,
        evaluations,
    })
}

/// Scalar integration.
pub fn integrate(
    f: &dyn Fn(&QuadPoint<'_>) -> Result<HPReal>,
    spec: &QuadSpec,
    ctx: &PrecCtx,
) -> Result<HPReal> {
    let g = |p: &QuadPoint<'_>| f(p).map(|v| vec![v]);
    Ok(integrate_many(&g, spec, ctx)?.values.remove(0))
}

/// `log10` of the default relative tolerance: `-(digits + guard/2)`.
pub fn default_tol(ctx: &PrecCtx) -> f64 {
    -(f64::from(ctx.digits()) + f64::from(ctx.guard()) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecCtx {
        PrecCtx::with_digits(d).unwrap()
    }

    #[test]
    fn constant_on_unit_interval() {
        let c = ctx(60);
        let spec = QuadSpec::finite(Float::new(c.bits()), Float::with_val(c.bits(), 1), default_tol(&c));
        let v = integrate(&|p| Ok(HPReal::exact(Float::with_val(p.x.prec(), 1))), &spec, &c).unwrap();
        let diff = Float::with_val(c.bits(), v.value() - 1u32).abs();
        assert!(diff <= *v.err());
        assert!(v.err().to_f64() < 1e-60);
    }

    #[test]
    fn gamma_three() {
        let c = ctx(60);
        let bits = c.bits();
        let spec = QuadSpec {
            lower: Float::new(bits),
            upper: UpperPolicy::LogConcaveTail {
                log_majorant: Box::new(|t| -t + 2.0 * t.max(1e-300).ln()),
                log_majorant_slope: Box::new(|t| -1.0 + 2.0 / t),
                log_abs_tol: -(90.0 * std::f64::consts::LN_10),
            },
            breakpoints: vec![Float::with_val(bits, 2)],
            target_tol_log10: default_tol(&c),
            rule: PanelRule::TanhSinh,
            max_level: 12,
        };
        let v = integrate(
            &|p| {
                let x = p.x;
                Ok(HPReal::rounded(Float::with_val(bits, x * x) * Float::with_val(bits, -x).exp()))
            },
            &spec,
            &c,
        )
        .unwrap();
        let diff = Float::with_val(bits, v.value() - 2u32).abs();
        assert!(diff <= *v.err(), "diff {diff} err {}", v.err());
        assert!(v.err().to_f64() < 1e-55);
    }

    #[test]
    fn refinement_accelerates() {
        // successive level differences shrink faster than linearly
        let c = ctx(60);
        let bits = c.bits();
        let a = Float::new(bits);
        let b = Float::with_val(bits, 30);
        let half = Float::with_val(bits, &b - &a) / 2u32;
        let f = |p: &QuadPoint<'_>| {
            let x = p.x;
            Ok(vec![HPReal::rounded(
                Float::with_val(bits, x * x) * Float::with_val(bits, -x).exp(),
            )])
        };
        let mut acc = PanelAcc {
            sum: Vec::new(),
            l1: Vec::new(),
            f_err: Vec::new(),
            f_max: Vec::new(),
            evals: 0,
        };
        let mut vals = Vec::new();
        for level in 0..6 {
            eval_level(&f, &a, &half, level, bits, &mut acc).unwrap();
            let mut h = Float::with_val(bits, 1);
            h >>= level;
            vals.push(Float::with_val(bits, &acc.sum[0] * &h));
        }
        let d: Vec<f64> = vals
            .windows(2)
            .map(|w| Float::with_val(bits, &w[1] - &w[0]).abs().to_f64().max(1e-300).log10())
            .collect();
        for w in d.windows(2).skip(1) {
            if w[0] > -50.0 {
                assert!(w[1] < 1.5 * w[0], "{d:?}");
            }
        }
    }

    #[test]
    fn cutoff_for_exponential() {
        let (b, lt) = log_concave_cutoff(&|t| -t, &|_| -1.0, 0.0, -100.0).unwrap();
        assert!((b - 100.0).abs() < 1e-6);
        assert!(lt <= -100.0);
    }
}
