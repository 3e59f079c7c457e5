use std::error::Error;
use std::path::PathBuf;

use detlab_core::asymptotics::check_conjecture3;
use detlab_core::checks::{self, CheckConfig};
use detlab_core::cvpoly::{bounds_lemma25, check_conjecture2, check_lemma61, check_representations, cv_poly, wr_poly};
use detlab_core::determinant::{
    delta_bar_poly, exceptional_scan, minor_report, table_eta, table_m, turan_check, xi_eval, MinorSpec, ScanReport,
};
use detlab_core::phi::{kernel_derivs, PhiSeriesParams};
use detlab_core::quadrature::{b_moment, beta, BetaTable};
use detlab_core::sign_regularity::{parse_rational, q_scan, rat_str, GridSpec, ScanSession, Verdict};
use detlab_core::{HPReal, PrecCtx};
use rug::{Float, Rational};
use serde_json::{json, Value};

use crate::report::{emit, unix_now, Report, Table};
use crate::{Cli, Command, Format, GridArgs};

type Res<T> = Result<T, Box<dyn Error>>;

const CACHE_FILE: &str = "beta-table.json";

fn cache_path(cli: &Cli) -> Option<PathBuf> {
    cli.cache.as_ref().map(|d| d.join(CACHE_FILE))
}

fn uses_moments(c: &Command) -> bool {
    matches!(
        c,
        Command::Beta { .. }
            | Command::Det { .. }
            | Command::Turan { .. }
            | Command::Exceptional { .. }
            | Command::Xi { .. }
            | Command::VerifyAll { .. }
    )
}

pub fn execute(cli: &Cli) -> Res<u8> {
    let ctx = PrecCtx::with_digits(cli.prec)?;
    let cache = cache_path(cli).filter(|_| uses_moments(&cli.command));
    if let Some(p) = &cache {
        BetaTable::global().merge(&BetaTable::load_or_empty(p)?);
    }
    let report = run(&cli.command, &ctx)?;
    if let Some(p) = &cache {
        BetaTable::global().save(p)?;
    }
    let text = match cli.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report.to_json(unix_now()))?),
        Format::Csv => report.to_csv()?,
    };
    emit(&text, cli.out.as_deref())?;
    Ok(if report.verified == Some(false) { 1 } else { 0 })
}

fn grid(args: &GridArgs, defaults: (&str, &str, &str)) -> Res<GridSpec> {
    let pick = |v: &Option<String>, d: &str| parse_rational(v.as_deref().unwrap_or(d));
    Ok(GridSpec::new(
        pick(&args.u_min, defaults.0)?,
        pick(&args.u_max, defaults.1)?,
        pick(&args.step, defaults.2)?,
        !args.no_refine,
    )?)
}

fn grid_params(r: &mut Report, g: &GridSpec) {
    r.param("u_min", rat_str(&g.u_min));
    r.param("u_max", rat_str(&g.u_max));
    r.param("step", rat_str(&g.step));
}

fn sign_of(v: &HPReal) -> &'static str {
    if v.is_certainly_positive() {
        "+"
    } else if v.is_certainly_negative() {
        "-"
    } else {
        "?"
    }
}

fn scan_items(rep: &mut Report, s: &ScanReport) -> Value {
    let items: Vec<Value> = s
        .items
        .iter()
        .map(|i| {
            rep.note_precision(i.digits_used);
            json!({
                "label": i.label,
                "value": rep.num(&i.value),
                "pass": i.pass,
                "digits_used": i.digits_used,
                "aux": i.aux,
            })
        })
        .collect();
    rep.table = Table::new(&["label", "value", "sign", "pass"]);
    for i in &s.items {
        let row = vec![i.label.clone(), rep.value_str(&i.value), sign_of(&i.value).into(), i.pass.to_string()];
        rep.table.push(row);
    }
    json!({ "title": s.title, "passed": s.passed(), "non_rigorous": s.non_rigorous, "items": items })
}

fn run(cmd: &Command, ctx: &PrecCtx) -> Res<Report> {
    let d = ctx.digits();
    Ok(match cmd {
        Command::Phi { u, j, m } => {
            let mut rep = Report::new("phi", d);
            rep.param("u", u.as_str());
            rep.param("j", *j);
            rep.param("m", *m);
            let uq = parse_rational(u)?;
            let params = PhiSeriesParams::new(*ctx);
            let uf = Float::with_val(ctx.bits() + 16, &uq);
            let vals = kernel_derivs(&uf, *m, *j, &params)?;
            rep.table = Table::new(&["d", "value", "err"]);
            let mut out = Vec::new();
            for (k, v) in vals.iter().enumerate() {
                out.push(json!({ "d": k, "value": rep.num(v) }));
                rep.table.push(vec![k.to_string(), rep.value_str(v), v.err_decimal()]);
            }
            rep.results = json!({ "derivatives": out });
            rep
        }
        Command::Beta { n } => {
            let mut rep = Report::new("beta", d);
            rep.param("n", *n);
            rep.table = Table::new(&["n", "beta", "err", "b_n"]);
            let mut out = Vec::new();
            for k in 0..=*n {
                let b = beta(k, ctx)?;
                let bn = b_moment(k, ctx)?;
                out.push(json!({ "n": k, "beta": rep.num(&b), "b_n": rep.num(&bn) }));
                rep.table.push(vec![k.to_string(), rep.value_str(&b), b.err_decimal(), rep.value_str(&bn)]);
                if !b.is_certainly_positive() {
                    rep.verified = Some(false);
                }
            }
            rep.verified.get_or_insert(true);
            rep.results = json!({ "coefficients": out });
            rep
        }
        Command::Det { n, r } => {
            let mut rep = Report::new("det", d);
            rep.param("n", *n);
            rep.param("r", *r);
            let v = minor_report(MinorSpec::new(*n, *r)?, ctx)?;
            rep.note_precision(v.digits_used);
            rep.verified = Some(v.value.is_certainly_positive());
            rep.results = json!({
                "minor": rep.num(&v.value),
                "sign": sign_of(&v.value),
                "digits_used": v.digits_used,
                "escalations": v.escalations,
            });
            rep
        }
        Command::Turan { n } => {
            let mut rep = Report::new("turan", d);
            rep.param("n", *n);
            let s = turan_check(*n, ctx)?;
            rep.verified = Some(s.passed());
            rep.results = scan_items(&mut rep, &s);
            rep
        }
        Command::Exceptional { r_max } => {
            let mut rep = Report::new("exceptional", d);
            rep.param("r_max", *r_max);
            let s = exceptional_scan(*r_max, None, ctx)?;
            rep.verified = Some(s.passed());
            rep.results = scan_items(&mut rep, &s);
            rep
        }
        Command::WronskianScan { r, m, grid: g } => {
            let mut rep = Report::new("wronskian-scan", d);
            let spec = grid(g, ("0", "3", "0.01"))?;
            rep.param("r", *r);
            rep.param("m", *m);
            grid_params(&mut rep, &spec);
            let session = ScanSession::new(spec, *ctx);
            rep.table = Table::new(&["u", "p", "m", "value", "sign"]);
            let mut orders = Vec::new();
            let mut all = true;
            for p in 1..=*r {
                let s = session.scan(p, *m)?;
                all &= s.passed();
                for pt in &s.points {
                    rep.note_precision(pt.digits_used);
                    let row = vec![rat_str(&pt.u), p.to_string(), m.to_string(), rep.value_str(&pt.value), sign_of(&pt.value).into()];
                    rep.table.push(row);
                }
                let witness = s.witness.as_ref().map(|w| {
                    json!({
                        "u": rat_str(&w.u),
                        "value": rep.num(&w.value),
                        "bracket": w.bracket.as_ref().map(|(a, b)| [rat_str(a), rat_str(b)]),
                    })
                });
                let min_scaled = s.min_scaled_value.as_ref().map(|v| rep.num(v));
                orders.push(json!({
                    "p": p,
                    "verdict": if s.verdict == Verdict::AllPositive { "all-positive" } else { "failure" },
                    "points_evaluated": s.points.len(),
                    "witness": witness,
                    "min_scaled_value": min_scaled,
                    "note": s.note,
                }));
            }
            rep.verified = Some(all);
            rep.results = json!({ "orders": orders });
            rep
        }
        Command::MrTable { r_max, m_cap, grid: g } => {
            let mut rep = Report::new("mr-table", d);
            let spec = grid(g, ("0", "3", "0.01"))?;
            rep.param("r_max", *r_max);
            rep.param("m_cap", *m_cap);
            grid_params(&mut rep, &spec);
            let session = ScanSession::new(spec, *ctx);
            rep.table = Table::new(&["r", "m", "eta", "tabulated_m", "tabulated_eta"]);
            let mut rows = Vec::new();
            let mut agree = true;
            for r in 2..=*r_max {
                let res = session.find_mr(r, *m_cap)?;
                let (tm, te) = (table_m(r), table_eta(r));
                if tm.is_some_and(|t| t != res.m) || te.is_some_and(|t| t != res.eta) {
                    agree = false;
                }
                let rejected: Vec<Value> = res
                    .rejected
                    .iter()
                    .map(|s| json!({ "m": s.m, "p": s.p, "witness_u": s.witness.as_ref().map(|w| rat_str(&w.u)) }))
                    .collect();
                rows.push(json!({ "r": r, "m": res.m, "eta": res.eta, "tabulated_m": tm, "tabulated_eta": te, "rejected": rejected }));
                rep.table.push(vec![
                    r.to_string(),
                    res.m.to_string(),
                    res.eta.to_string(),
                    tm.map(|v| v.to_string()).unwrap_or_default(),
                    te.map(|v| v.to_string()).unwrap_or_default(),
                ]);
            }
            rep.verified = Some(agree);
            rep.results = json!({ "table": rows });
            rep
        }
        Command::QScan { grid: g } => {
            let mut rep = Report::new("q-scan", d);
            let spec = grid(g, ("0.05", "5", "0.05"))?;
            grid_params(&mut rep, &spec);
            let s = q_scan(&spec, &spec, ctx)?;
            rep.table = Table::new(&["u", "v", "p", "m", "value", "sign"]);
            for (u, v, q) in &s.values {
                let row = vec![rat_str(u), rat_str(v), String::new(), String::new(), rep.value_str(q), sign_of(q).into()];
                rep.table.push(row);
            }
            rep.verified = Some(s.passed());
            rep.results = json!({
                "claim": "q(u, v) < 0",
                "points": s.points,
                "max": rep.num(&s.max),
                "argmax": [rat_str(&s.argmax.0), rat_str(&s.argmax.1)],
                "min": rep.num(&s.min),
                "argmin": [rat_str(&s.argmin.0), rat_str(&s.argmin.1)],
                "all_positive": s.all_positive,
                "non_rigorous": true,
            });
            rep
        }
        Command::Cvpoly { k } => {
            let mut rep = Report::new("cvpoly", d);
            rep.param("k", *k);
            let mut polys = Vec::new();
            rep.table = Table::new(&["k", "coefficients"]);
            for i in 1..=*k {
                let p = cv_poly(i)?.poly;
                let coeffs: Vec<String> = p.coeffs().iter().map(|c| c.to_string()).collect();
                rep.table.push(vec![i.to_string(), coeffs.join(" ")]);
                polys.push(json!({ "k": i, "coefficients": coeffs }));
            }
            let check = check_representations(*k);
            rep.verified = Some(check.mismatches.is_empty());
            rep.results = json!({ "polynomials": polys, "representations": check });
            rep
        }
        Command::WrPoly { r } => {
            let mut rep = Report::new("wr-poly", d);
            rep.param("r", *r);
            let w = wr_poly(*r)?;
            let gamma: Vec<String> = w.gamma.iter().map(|c| c.to_string()).collect();
            rep.table = Table::new(&["j", "gamma"]);
            for (j, g) in gamma.iter().enumerate() {
                rep.table.push(vec![j.to_string(), g.clone()]);
            }
            let (lemma, conj) = if *r >= 2 {
                let l = check_lemma61(*r)?;
                let c = check_conjecture2(*r)?;
                rep.verified = Some(l.holds && c.holds);
                (json!(l), json!(c))
            } else {
                (Value::Null, Value::Null)
            };
            rep.results = json!({ "r": r, "gamma": gamma, "vanishing": lemma, "degree": conj });
            rep
        }
        Command::DeltaPoly { r } => {
            let mut rep = Report::new("delta-poly", d);
            rep.param("r", *r);
            let p = delta_bar_poly(*r)?;
            let coeffs: Vec<String> = (0..=r * (r - 1)).map(|i| p.delta(i).to_string()).collect();
            let mu = r * (r - 1) / 2;
            let zeros_ok = (0..mu).all(|i| p.delta(i) == 0);
            rep.verified = Some(zeros_ok);
            rep.table = Table::new(&["i", "delta"]);
            for (i, c) in coeffs.iter().enumerate() {
                rep.table.push(vec![i.to_string(), c.clone()]);
            }
            let comps: Vec<Value> = p
                .components
                .iter()
                .map(|(perm, z)| {
                    json!({
                        "image": perm.image.iter().map(|i| i + 1).collect::<Vec<_>>(),
                        "sign": perm.sign,
                        "coefficients": z.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            rep.results = json!({ "coefficients": coeffs, "zero_below": mu, "zeros_hold": zeros_ok, "components": comps });
            rep
        }
        Command::Conj3 { r } => {
            let mut rep = Report::new("conj3", d);
            rep.param("r", *r);
            let z = check_conjecture3(*r)?;
            rep.verified = Some(z.holds);
            rep.table = Table::new(&["i", "m", "j", "value"]);
            for &(i, m, j) in &z.required {
                let v = z
                    .violations
                    .iter()
                    .find(|x| (x.i, x.m, x.j) == (i, m, j))
                    .map(|x| x.value.clone())
                    .unwrap_or_else(|| "0".into());
                rep.table.push(vec![i.to_string(), m.to_string(), j.to_string(), v]);
            }
            rep.results = json!(z);
            rep
        }
        Command::BoundsLemma25 => {
            let mut rep = Report::new("bounds-lemma25", d);
            let b = bounds_lemma25(ctx);
            rep.verified = Some(b.w2_below_minus_843 && b.bound_sum_negative);
            rep.results = json!(b);
            rep
        }
        Command::Xi { t, n } => {
            let mut rep = Report::new("xi", d);
            rep.param("t", t.as_str());
            rep.param("n", *n);
            let tq: Rational = parse_rational(t)?;
            let tv = HPReal::rounded(Float::with_val(ctx.bits(), &tq));
            let x = xi_eval(&tv, *n, ctx)?;
            rep.results = json!({ "xi": rep.num(&x.value), "terms": x.terms, "next_term": x.next_term });
            rep
        }
        Command::VerifyAll { criteria } => {
            let mut rep = Report::new("verify-all", d);
            let ids: Vec<usize> = if criteria.is_empty() { (1..=checks::CRITERIA).collect() } else { criteria.clone() };
            rep.param("criteria", ids.clone());
            let cfg = CheckConfig { digits: d, ..CheckConfig::default() };
            rep.table = Table::new(&["id", "name", "result", "seconds", "details"]);
            let mut out = Vec::new();
            for id in ids {
                let r = checks::run(id, &cfg);
                eprintln!("{}", r.line());
                rep.table.push(vec![
                    r.id.to_string(),
                    r.name.to_string(),
                    if r.passed { "PASS" } else { "FAIL" }.into(),
                    format!("{:.1}", r.elapsed_secs),
                    r.details.join("; "),
                ]);
                out.push(r);
            }
            rep.verified = Some(out.iter().all(|r| r.passed));
            // timings vary between runs
            let stable: Vec<Value> = out
                .iter()
                .map(|r| json!({ "id": r.id, "name": r.name, "passed": r.passed, "details": r.details, "budget_secs": r.budget_secs }))
                .collect();
            rep.results = json!({ "criteria": stable });
            rep
        }
    })
}
