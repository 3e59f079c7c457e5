use rug::Float;

use super::{default_tol, integrate_many, log_concave_cutoff, QuadPoint, QuadSpec};
use crate::numerics::{HPReal, PrecCtx, ERR_PREC};
use crate::phi::{ln_phi_majorant, ln_phi_majorant_slope, phi_derivs, PhiSeriesParams};
use crate::{Error, Result};

const LN_10: f64 = std::f64::consts::LN_10;

/// One shifted moment `∫_0^∞ Phi(t) t^power (t - tau)^eta dt`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct MomentJob {
    pub power: u32,
    pub eta: u32,
}

/// Maximiser of the leading-term log integrand
/// `ln(2π²) + 9t - π e^{4t} + power·ln t`, zero when that is decreasing.
pub(crate) fn leading_peak(power: f64) -> f64 {
    let slope = |t: f64| ln_phi_majorant_slope(t) + power / t;
    if power <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (1e-12, 8.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ln_abs(x: f64) -> f64 {
    x.abs().max(1e-300).ln()
}

/// Shifted moments sharing one vector quadrature; returns the values and
/// the upper cut of the range.
pub(crate) fn phi_moments(jobs: &[MomentJob], tau: &Float, ctx: &PrecCtx) -> Result<(Vec<HPReal>, f64)> {
    let bits = ctx.bits();
    let params = PhiSeriesParams::new(*ctx);
    let tau_f = tau.to_f64();
    let tol_ln = -f64::from(ctx.tail_tol_exponent()) * LN_10;

    let mut peaks: Vec<f64> = Vec::new();
    let mut cut = tau_f.max(1.0);
    let mut g_fns = Vec::with_capacity(jobs.len());
    for job in jobs {
        let pw = f64::from(job.power);
        let et = f64::from(job.eta);
        let g = move |t: f64| ln_phi_majorant(t) + pw * ln_abs(t) + et * ln_abs(t - tau_f);
        let dg = move |t: f64| {
            let mut s = ln_phi_majorant_slope(t) + pw / t;
            if et > 0.0 {
                s += et / (t - tau_f);
            }
            s
        };
        let pk = leading_peak(pw);
        peaks.push(pk);
        let curv = 16.0 * std::f64::consts::PI * (4.0 * pk).exp() + if pk > 0.0 { pw / (pk * pk) } else { 0.0 };
        let scale = ln_phi_majorant(pk) + pw * ln_abs(pk.max(1e-300)) - 0.5 * curv.ln();
        let start = tau_f.max(pk).max(1.0) + 1e-6;
        let (b, _) = log_concave_cutoff(&g, &dg, start, scale + tol_ln)?;
        cut = cut.max(b);
        g_fns.push((g, dg));
    }
    let upper = 2.0 * cut;
    let tails: Vec<Float> = g_fns
        .iter()
        .map(|(g, dg)| Float::with_val(ERR_PREC, g(upper) - (-dg(upper)).ln()).exp())
        .collect();

    let mut breaks: Vec<f64> = peaks.iter().copied().filter(|p| *p > 0.0).collect();
    if tau_f > 0.0 {
        breaks.push(tau_f);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 0.1);
    let mut points: Vec<Float> = breaks.iter().map(|b| Float::with_val(bits, *b)).collect();
    // keep the shift itself exact so (t - tau) is computed without rounding of tau
    if tau_f > 0.0 {
        points.retain(|p| (p.to_f64() - tau_f).abs() >= 0.02);
        points.push(Float::with_val(bits, tau));
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let max_eta = jobs.iter().map(|j| j.eta).max().unwrap_or(0);
    let t_bits = bits + 40;
    let integrand = |p: &QuadPoint<'_>| -> Result<Vec<HPReal>> {
        let t = Float::with_val(t_bits, p.lower + p.offset);
        let phi = phi_derivs(&t, 0, &params)?.pop().unwrap();
        let tb = HPReal::rounded(Float::with_val(bits, &t));
        let shift = HPReal::rounded(Float::with_val(bits, Float::with_val(t_bits, &t - tau)));
        let mut shift_pows = vec![HPReal::exact(Float::with_val(bits, 1))];
        for e in 1..=max_eta as usize {
            let next = &shift_pows[e - 1] * &shift;
            shift_pows.push(next);
        }
        Ok(jobs
            .iter()
            .map(|job| {
                let w = tb.pow_u(job.power);
                &(&phi * &w) * &shift_pows[job.eta as usize]
            })
            .collect())
    };
    let spec = QuadSpec::finite(Float::new(bits), Float::with_val(bits, upper), default_tol(ctx)).with_breakpoints(points);
    let res = integrate_many(&integrand, &spec, ctx)?;
    let vals = res.values.into_iter().zip(tails.iter()).map(|(v, t)| v.widen(t)).collect();
    Ok((vals, upper))
}

/// `d/dt [ln Phi(t) + (2n-2) ln t] = Phi'(t)/Phi(t) + (2n-2)/t`.
pub fn log_integrand_slope(t: &Float, n: u32, ctx: &PrecCtx) -> Result<HPReal> {
    let params = PhiSeriesParams::new(*ctx);
    let d = phi_derivs(t, 1, &params)?;
    let ratio = d[1].div(&d[0]);
    let k = HPReal::rounded(Float::with_val(ctx.bits(), (2 * n - 2) as f64) / t);
    Ok(&ratio + &k)
}

/// Location `tau` of the maximum of `Phi(t) t^{2n-2}`: bisection on the
/// leading-term slope, then Newton on `t Phi'(t) + (2n-2) Phi(t) = 0` with the
/// full series.
pub fn find_peak(n: u32, ctx: &PrecCtx) -> Result<HPReal> {
    if n < 2 {
        return Err(Error::BracketFailure(format!("no interior peak for n = {n}")));
    }
    let bits = ctx.bits();
    let params = PhiSeriesParams::new(*ctx);
    let power = (2 * n - 2) as f64;
    let t0 = leading_peak(power);
    if !(t0 > 1e-9 && t0 < 7.9) {
        return Err(Error::BracketFailure(format!("leading-term bracket failed for n = {n}")));
    }
    let mut t = Float::with_val(bits, t0);
    let target = Float::with_val(ERR_PREC, 10f64.powf(-f64::from(ctx.digits())));
    let k = Float::with_val(bits, power);
    for _ in 0..200 {
        let d = phi_derivs(&t, 2, &params)?;
        let (f0, f1, f2) = (d[0].value(), d[1].value(), d[2].value());
        // F = t f1 + k f0, F' = t f2 + (k + 1) f1
        let big_f = Float::with_val(bits, &t * f1) + Float::with_val(bits, &k * f0);
        let dfd = Float::with_val(bits, &t * f2) + Float::with_val(bits, (&k + Float::with_val(bits, 1)) * f1);
        let step = Float::with_val(bits, &big_f / &dfd);
        t -= &step;
        let rel = Float::with_val(ERR_PREC, &step / &t).abs();
        if rel < target {
            let err = Float::with_val(ERR_PREC, step.abs()) * 2u32;
            return Ok(HPReal::new(t, err));
        }
    }
    Err(Error::BracketFailure(format!("Newton did not settle for n = {n}")))
}

/// `∫_0^∞ Phi(t) t^{2n-2} (t - tau)^eta dt`.
pub fn moment_integral(n: u32, eta: u32, tau: &Float, ctx: &PrecCtx) -> Result<HPReal> {
    if n < 2 {
        return Err(Error::invalid("shifted moments need n >= 2"));
    }
    let (mut v, _) = phi_moments(
        &[MomentJob {
            power: 2 * n - 2,
            eta,
        }],
        tau,
        ctx,
    )?;
    Ok(v.remove(0))
}

/// `∫_0^∞ Phi(t) t^{2n-2} (t - tau)^eta dt` for `eta = 0..=eta_max`.
pub fn moment_integrals(n: u32, eta_max: u32, tau: &Float, ctx: &PrecCtx) -> Result<Vec<HPReal>> {
    if n < 2 {
        return Err(Error::invalid("shifted moments need n >= 2"));
    }
    let jobs: Vec<MomentJob> = (0..=eta_max).map(|eta| MomentJob { power: 2 * n - 2, eta }).collect();
    Ok(phi_moments(&jobs, tau, ctx)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::b_moment;

    fn ctx() -> PrecCtx {
        PrecCtx::with_digits(40).unwrap()
    }

    #[test]
    fn peaks_move_right() {
        let c = ctx();
        let mut last = 0.0;
        for n in [2u32, 5, 10, 20, 40] {
            let t = find_peak(n, &c).unwrap();
            assert!(t.to_f64() > last);
            last = t.to_f64();
            let s = log_integrand_slope(t.value(), n, &c).unwrap();
            assert!(s.value().clone().abs() < 1e-20_f64, "n = {n}");
        }
        assert!(find_peak(1, &c).is_err());
    }

    #[test]
    fn peak_growth_follows_leading_balance() {
        // oracle: 4π e^{4τ} ≈ 2n/τ solved independently
        let c = ctx();
        let oracle = |n: f64| {
            let (mut lo, mut hi) = (1e-6f64, 5.0f64);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if 4.0 * std::f64::consts::PI * (4.0 * m).exp() < 2.0 * n / m {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            lo
        };
        let d_num = find_peak(40, &c).unwrap().to_f64() - find_peak(10, &c).unwrap().to_f64();
        let d_orc = oracle(40.0) - oracle(10.0);
        assert!((d_num - d_orc).abs() < 0.25 * d_orc, "{d_num} vs {d_orc}");
    }

    #[test]
    fn unshifted_moment_is_b_moment() {
        let c = ctx();
        let tau = Float::with_val(c.bits(), 0.37);
        let m = moment_integral(6, 0, &tau, &c).unwrap();
        let b = b_moment(5, &c).unwrap();
        let d = Float::with_val(c.bits(), m.value() - b.value()).abs();
        assert!(d <= Float::with_val(64, m.err() + b.err()));
    }

    #[test]
    fn centred_moments() {
        let c = ctx();
        let tau = find_peak(10, &c).unwrap();
        let v = moment_integrals(10, 2, tau.value(), &c).unwrap();
        let ratio = (v[1].to_f64() / v[0].to_f64()).abs();
        assert!(ratio < 0.02, "{ratio}");
        assert!(v[2].is_certainly_positive());
        // oracle: unshifted moments, ∫Φ t^19 - tau ∫Φ t^18
        let zero = Float::new(c.bits());
        let jobs = [MomentJob { power: 19, eta: 0 }, MomentJob { power: 18, eta: 0 }];
        let (w, _) = phi_moments(&jobs, &zero, &c).unwrap();
        let tau_exact = HPReal::exact(tau.value().clone());
        let first = &w[0] - &(&tau_exact * &w[1]);
        let d = Float::with_val(c.bits(), first.value() - v[1].value()).abs();
        assert!(d <= Float::with_val(64, first.err() + v[1].err()), "{d}");
    }
}
