//! Large-`n` expansion of the normalised minors.
//!
//! Each permutation of the `r x r` minor contributes a product of moments
//! `prod b_{n + nu_i}`, which is written as a symmetrised integral of
//! `prod t_i^{2(nu_i + r - 1)}` against `prod Phi(t_i) t_i^{2n - 2r + 2}`.
//! Substituting `t_i = tau (1 + x_i)` and expanding in symmetrised monomials
//! gives the integer tables `T(m, j, k)`; the Gamma-ratio polynomial of the
//! same permutation gives `z(i, k)`, and `C(i; m, j) = sum_k sign_k z(i, k) T(m, j, k)`.

use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::determinant::{perm_component, permutations, Perm};
use crate::numerics::{HPReal, PrecCtx};
use crate::quadrature::find_peak;
use crate::quadrature::moments::{phi_moments, MomentJob};
use crate::{Error, Result};

/// Largest order handled by the exact expansion.
pub const MAX_ORDER: usize = 4;

fn check_order(r: usize) -> Result<()> {
    if (2..=MAX_ORDER).contains(&r) {
        Ok(())
    } else {
        Err(Error::invalid(format!("order r = {r} outside 2..={MAX_ORDER}")))
    }
}

/// One permutation of the minor with its exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermComponent {
    /// 1-based position in lexicographic order.
    pub index: usize,
    /// 0-based images.
    pub image: Vec<usize>,
    pub sign: i32,
    pub nu: Vec<i64>,
    /// `2 (nu_i + r - 1)`.
    pub exponents: Vec<u32>,
}

impl PermComponent {
    fn perm(&self) -> Perm {
        Perm {
            image: self.image.clone(),
            sign: self.sign,
        }
    }
}

pub fn components(r: usize) -> Result<Vec<PermComponent>> {
    check_order(r)?;
    Ok(permutations(r)
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let nu = p.offsets();
            let exponents = nu.iter().map(|v| (2 * (v + r as i64 - 1)) as u32).collect();
            PermComponent {
                index: k + 1,
                image: p.image,
                sign: p.sign,
                nu,
                exponents,
            }
        })
        .collect())
}

/// Partitions of `m` into at most `max_parts` parts, each at most
/// `max_part`, in reverse-lexicographic order.
pub fn partitions(m: u32, max_parts: usize, max_part: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, cap: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=cap.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, max_part, max_parts, &mut Vec::new(), &mut out);
    out
}

/// Symmetrised monomial of type `parts`, normalised so that it equals
/// `x^m` on the diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymMonomial {
    pub m: u32,
    /// 1-based label within degree `m`.
    pub j: usize,
    pub parts: Vec<u32>,
}

impl SymMonomial {
    /// Exponent vector padded with zeros to length `r`.
    pub fn padded(&self, r: usize) -> Vec<u32> {
        let mut e = self.parts.clone();
        e.resize(r, 0);
        e
    }

    /// Average of `prod x_{s(i)}^{parts_i}` over all permutations `s`.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let r = x.len();
        let e = self.padded(r);
        let perms = permutations(r);
        let mut acc = Rational::new();
        for p in &perms {
            let mut term = Rational::from(1);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term *= &x[p.image[i]];
                }
            }
            acc += term;
        }
        acc / Rational::from(perms.len())
    }
}

/// Monomial types of every degree `0..=2r(r-1)` for order `r`.
pub fn monomials(r: usize) -> Vec<Vec<SymMonomial>> {
    let top = (2 * r * (r - 1)) as u32;
    let cap = 4 * (r as u32 - 1);
    (0..=top)
        .map(|m| {
            partitions(m, r, cap)
                .into_iter()
                .enumerate()
                .map(|(j, parts)| SymMonomial { m, j: j + 1, parts })
                .collect()
        })
        .collect()
}

fn type_of(alpha: &[u32]) -> Vec<u32> {
    let mut p: Vec<u32> = alpha.iter().copied().filter(|&a| a > 0).collect();
    p.sort_unstable_by(|a, b| b.cmp(a));
    p
}

/// Expansion tables `T(m, j, k)`.
#[derive(Clone, Debug)]
pub struct TTable {
    pub r: usize,
    pub monomials: Vec<Vec<SymMonomial>>,
    /// `[m][j - 1][k - 1]`.
    pub values: Vec<Vec<Vec<Integer>>>,
}

impl TTable {
    pub fn get(&self, m: usize, j: usize, k: usize) -> &Integer {
        &self.values[m][j - 1][k - 1]
    }
}

/// Coefficients of the symmetrisation of `prod (1 + x_i)^{e_i}`, indexed by
/// monomial type.
fn expand_component(exps: &[u32], index: &dyn Fn(&[u32]) -> (usize, usize), slots: &mut [Vec<Integer>]) {
    let r = exps.len();
    let mut alpha = vec![0u32; r];
    loop {
        let mut c = Integer::from(1);
        for (a, e) in alpha.iter().zip(exps) {
            c *= Integer::from(Integer::binomial_u(*e, *a));
        }
        let (m, j) = index(&type_of(&alpha));
        slots[m][j] += c;
        // odometer over 0..=e_i
        let mut i = 0;
        while i < r {
            if alpha[i] < exps[i] {
                alpha[i] += 1;
                break;
            }
            alpha[i] = 0;
            i += 1;
        }
        if i == r {
            break;
        }
    }
}

pub fn expand_t(r: usize) -> Result<TTable> {
    let comps = components(r)?;
    let monomials = monomials(r);
    let index = |parts: &[u32]| -> (usize, usize) {
        let m: u32 = parts.iter().sum();
        let j = monomials[m as usize]
            .iter()
            .position(|mono| mono.parts == parts)
            .expect("every expansion type is enumerated");
        (m as usize, j)
    };
    let mut values: Vec<Vec<Vec<Integer>>> = monomials
        .iter()
        .map(|row| vec![vec![Integer::new(); comps.len()]; row.len()])
        .collect();
    for (k, comp) in comps.iter().enumerate() {
        let mut slots: Vec<Vec<Integer>> = monomials.iter().map(|row| vec![Integer::new(); row.len()]).collect();
        expand_component(&comp.exponents, &index, &mut slots);
        for (m, row) in slots.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                values[m][j][k] = v;
            }
        }
    }
    Ok(TTable { r, monomials, values })
}

/// `z(i, k)`: coefficient of `y^i` in the Gamma-ratio polynomial of
/// component `k`, as `[k - 1][i]` with `i = 0..=r(r-1)`.
pub fn z_components(r: usize) -> Result<Vec<Vec<Integer>>> {
    let comps = components(r)?;
    let deg = r * (r - 1);
    comps
        .iter()
        .map(|c| {
            let p = perm_component(r, &c.perm())?;
            if p.degree().is_some_and(|d| d > deg) {
                return Err(Error::invalid("component polynomial exceeds its degree bound"));
            }
            Ok((0..=deg).map(|i| p.coeff(i)).collect())
        })
        .collect()
}

/// `C(i; m, j)` for `i = 0..=r(r-1)`, `m = 0..=2r(r-1)`.
#[derive(Clone, Debug)]
pub struct CArray {
    pub r: usize,
    pub monomials: Vec<Vec<SymMonomial>>,
    /// `[i][m][j - 1]`.
    pub values: Vec<Vec<Vec<Integer>>>,
}

impl CArray {
    pub fn get(&self, i: usize, m: usize, j: usize) -> &Integer {
        &self.values[i][m][j - 1]
    }
}

pub fn c_array(r: usize) -> Result<CArray> {
    let comps = components(r)?;
    let t = expand_t(r)?;
    let z = z_components(r)?;
    let values = (0..=r * (r - 1))
        .map(|i| {
            t.values
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|tk| {
                            let mut acc = Integer::new();
                            for (k, c) in comps.iter().enumerate() {
                                let term = Integer::from(&z[k][i] * &tk[k]);
                                if c.sign > 0 {
                                    acc += term;
                                } else {
                                    acc -= term;
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(CArray {
        r,
        monomials: t.monomials,
        values,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub i: usize,
    pub m: usize,
    pub j: usize,
    pub value: String,
}

/// Outcome of the zero-pattern check for one order.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroPatternReport {
    pub r: usize,
    /// Every `(i, m, j)` required to vanish.
    pub required: Vec<(usize, usize, usize)>,
    pub violations: Vec<Violation>,
    pub holds: bool,
}

/// `C(i; m, j) = 0` for `m <= r(r-1) - 2i - 2` and `i <= r(r-1)/2 - 1`.
pub fn check_conjecture3(r: usize) -> Result<ZeroPatternReport> {
    let c = c_array(r)?;
    let top = r * (r - 1);
    let mut required = Vec::new();
    let mut violations = Vec::new();
    for i in 0..top / 2 {
        for m in 0..=(top - 2 * i - 2) {
            for j in 1..=c.monomials[m].len() {
                required.push((i, m, j));
                let v = c.get(i, m, j);
                if *v != 0 {
                    violations.push(Violation {
                        i,
                        m,
                        j,
                        value: v.to_string(),
                    });
                }
            }
        }
    }
    Ok(ZeroPatternReport {
        r,
        holds: violations.is_empty(),
        required,
        violations,
    })
}

/// One term `C(i; m, j) y^i I(m, j)` of the order-two expansion.
#[derive(Clone, Debug)]
pub struct ExpansionTerm {
    pub i: usize,
    pub m: usize,
    pub j: usize,
    pub value: HPReal,
}

#[derive(Clone, Debug)]
pub struct DominanceReport {
    pub n: u32,
    pub tau: HPReal,
    pub terms: Vec<ExpansionTerm>,
    pub reconstructed: HPReal,
    /// `y^2 [(2n+2)(2n+1) b_n^2 - 2n(2n-1) b_{n-1} b_{n+1}]` from plain moments.
    pub direct: HPReal,
    pub rel_error: f64,
    /// Sum of the `(1, 0)` terms over the sum of the `(0, 2)` terms.
    pub ratio_10_02: HPReal,
}

impl DominanceReport {
    /// Sum of the terms with the given `(i, m)`.
    pub fn group(&self, i: usize, m: usize) -> Option<HPReal> {
        self.terms
            .iter()
            .filter(|t| t.i == i && t.m == m)
            .map(|t| t.value.clone())
            .reduce(|a, b| &a + &b)
    }
}

fn int_hp(v: &Integer, bits: u32) -> HPReal {
    HPReal::rounded(Float::with_val(bits, v))
}

/// Order-two expansion evaluated at `tau` = the peak of `Phi(t) t^{2n-2}`,
/// compared with the minor computed from plain moments.
pub fn dominance_diagnostic(n: u32, ctx: &PrecCtx) -> Result<DominanceReport> {
    const R: usize = 2;
    if n < 10 {
        return Err(Error::invalid("dominance diagnostic needs n >= 10"));
    }
    let bits = ctx.bits();
    let tau = find_peak(n, ctx)?;
    let max_eta = 4 * (R as u32 - 1);
    let power = 2 * n - 2 * R as u32 + 2;
    let jobs: Vec<MomentJob> = (0..=max_eta).map(|eta| MomentJob { power, eta }).collect();
    let (shifted, _) = phi_moments(&jobs, tau.value(), ctx)?;
    // ∫ Phi t^{2n-2} x^eta with x = t/tau - 1
    let tau_hp = tau.clone();
    let mut tau_pow = vec![HPReal::from_int(bits, 1)];
    for e in 1..=max_eta as usize {
        let next = &tau_pow[e - 1] * &tau_hp;
        tau_pow.push(next);
    }
    let single: Vec<HPReal> = shifted.iter().enumerate().map(|(e, v)| v.div(&tau_pow[e])).collect();

    let c = c_array(R)?;
    let y = HPReal::rounded(Float::with_val(bits, 1) / Float::with_val(bits, 2 * n));
    let scale = tau_pow[2 * R * (R - 1)].clone();
    let mut terms = Vec::new();
    for i in 0..=R * (R - 1) {
        let yi = y.pow_u(i as u32);
        for (m, row) in c.monomials.iter().enumerate() {
            for mono in row {
                let coeff = c.get(i, m, mono.j);
                if *coeff == 0 {
                    continue;
                }
                let mut integral = scale.clone();
                for e in mono.padded(R) {
                    integral = &integral * &single[e as usize];
                }
                let value = &(&int_hp(coeff, bits) * &yi) * &integral;
                terms.push(ExpansionTerm { i, m, j: mono.j, value });
            }
        }
    }
    let reconstructed = terms
        .iter()
        .map(|t| t.value.clone())
        .fold(HPReal::from_int(bits, 0), |a, b| &a + &b);

    let zero = Float::new(bits);
    let plain: Vec<MomentJob> = [n - 1, n, n + 1].iter().map(|k| MomentJob { power: 2 * k, eta: 0 }).collect();
    let (b, _) = phi_moments(&plain, &zero, ctx)?;
    let nn = i64::from(n);
    let first = &HPReal::from_int(bits, (2 * nn + 2) * (2 * nn + 1)) * &b[1].square();
    let second = &HPReal::from_int(bits, 2 * nn * (2 * nn - 1)) * &(&b[0] * &b[2]);
    let direct = &y.square() * &(&first - &second);

    let diff = Float::with_val(bits, reconstructed.value() - direct.value());
    let rel_error = Float::with_val(bits, diff / direct.value()).abs().to_f64();
    let report = DominanceReport {
        n,
        tau,
        terms,
        reconstructed,
        direct,
        rel_error,
        ratio_10_02: HPReal::from_int(bits, 0),
    };
    let (Some(a), Some(b)) = (report.group(1, 0), report.group(0, 2)) else {
        return Err(Error::invalid("expansion is missing its leading terms"));
    };
    Ok(DominanceReport {
        ratio_10_02: a.div(&b),
        ..report
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::delta_bar_poly;

    #[test]
    fn order_two_components() {
        let c = components(2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].exponents, vec![2, 2]);
        assert_eq!(c[1].exponents, vec![4, 0]);
        assert_eq!((c[0].sign, c[1].sign), (1, -1));
        for r in 2..=4 {
            let cs = components(r).unwrap();
            assert_eq!(cs.len(), (1..=r).product::<usize>());
            assert!(cs.iter().all(|c| c.exponents.iter().sum::<u32>() == (2 * r * (r - 1)) as u32));
            assert_eq!(cs.iter().map(|c| c.sign).sum::<i32>(), 0);
        }
        assert!(components(5).is_err());
        assert!(components(1).is_err());
    }

    #[test]
    fn partition_order() {
        assert_eq!(partitions(4, 2, 4), vec![vec![4], vec![3, 1], vec![2, 2]]);
        assert_eq!(partitions(3, 2, 4), vec![vec![3], vec![2, 1]]);
        assert_eq!(partitions(0, 2, 4), vec![Vec::<u32>::new()]);
        assert_eq!(partitions(5, 2, 4), vec![vec![4, 1], vec![3, 2]]);
        let counts: Vec<usize> = monomials(2).iter().map(|r| r.len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 2, 3]);
    }

    #[test]
    fn order_two_expansion_by_hand() {
        let t = expand_t(2).unwrap();
        // R(1)/tau^4 = 1 + 2(x1+x2) + (x1^2+x2^2) + 4 x1 x2 + 2(x1^2 x2 + x2^2 x1) + x1^2 x2^2
        let first: Vec<i64> = [(0, 1), (1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]
            .iter()
            .map(|&(m, j)| t.get(m, j, 1).to_i64().unwrap())
            .collect();
        assert_eq!(first, vec![1, 4, 2, 4, 0, 4, 0, 0, 1]);
        // R(2)/tau^4 = 1 + 2(x1+x2) + 3(x1^2+x2^2) + 2(x1^3+x2^3) + (x1^4+x2^4)/2
        let second: Vec<i64> = [(0, 1), (1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]
            .iter()
            .map(|&(m, j)| t.get(m, j, 2).to_i64().unwrap())
            .collect();
        assert_eq!(second, vec![1, 4, 6, 0, 4, 0, 1, 0, 0]);
        assert_eq!(*t.get(1, 1, 1), 4);
        assert_eq!(*t.get(2, 2, 2), 0);
    }

    #[test]
    fn expansion_reproduces_symmetrised_product() {
        // oracle: direct average of prod (1 + x_{s(i)})^{e_i} over permutations
        let x: Vec<Rational> = [(1, 3), (-2, 5), (7, 4)].iter().map(|&p| Rational::from(p)).collect();
        let t = expand_t(3).unwrap();
        for comp in components(3).unwrap() {
            let perms = permutations(3);
            let mut direct = Rational::new();
            for p in &perms {
                let mut term = Rational::from(1);
                for (i, &e) in comp.exponents.iter().enumerate() {
                    let base = Rational::from(&x[p.image[i]] + 1u32);
                    for _ in 0..e {
                        term *= &base;
                    }
                }
                direct += term;
            }
            direct /= Rational::from(perms.len());
            let mut series = Rational::new();
            for row in &t.monomials {
                for mono in row {
                    series += Rational::from(t.get(mono.m as usize, mono.j, comp.index)) * mono.eval(&x);
                }
            }
            assert_eq!(series, direct, "component {}", comp.index);
        }
    }

    #[test]
    fn monomials_are_normalised_on_the_diagonal() {
        let x = Rational::from((3, 7));
        let diag = vec![x.clone(); 3];
        for row in monomials(3) {
            for mono in row {
                let mut pow = Rational::from(1);
                for _ in 0..mono.m {
                    pow *= &x;
                }
                assert_eq!(mono.eval(&diag), pow);
            }
        }
    }

    #[test]
    fn order_two_z_and_c() {
        let z = z_components(2).unwrap();
        assert_eq!(z[0], vec![Integer::from(1), Integer::from(3), Integer::from(2)]);
        assert_eq!(z[1], vec![Integer::from(1), Integer::from(-1), Integer::from(0)]);
        let c = c_array(2).unwrap();
        assert_eq!(*c.get(0, 0, 1), 0);
        assert_eq!(*c.get(1, 0, 1), 4);
        assert!((1..=2).any(|j| *c.get(0, 2, j) != 0));
        for r in 2..=4 {
            assert!(z_components(r).unwrap().iter().all(|zk| zk[0] == 1));
        }
    }

    #[test]
    fn m_zero_column_is_the_normalised_determinant() {
        for r in 2..=4 {
            let c = c_array(r).unwrap();
            let d = delta_bar_poly(r).unwrap();
            for i in 0..=r * (r - 1) {
                assert_eq!(*c.get(i, 0, 1), d.delta(i), "r = {r}, i = {i}");
            }
        }
    }

    #[test]
    fn zero_pattern_small_orders() {
        let two = check_conjecture3(2).unwrap();
        assert!(two.holds);
        assert_eq!(two.required, vec![(0, 0, 1)]);
        let three = check_conjecture3(3).unwrap();
        assert!(three.holds, "{:?}", three.violations);
        let ims: std::collections::BTreeSet<(usize, usize)> = three.required.iter().map(|&(i, m, _)| (i, m)).collect();
        assert!(ims.contains(&(0, 4)) && ims.contains(&(1, 2)) && ims.contains(&(2, 0)));
        assert!(!ims.contains(&(1, 3)));
    }

    #[test]
    fn order_two_reconstruction() {
        let c = PrecCtx::with_digits(40).unwrap();
        let r = dominance_diagnostic(20, &c).unwrap();
        assert!(r.rel_error < 1e-25, "{}", r.rel_error);
        assert!(r.direct.is_certainly_positive());
        assert!(dominance_diagnostic(5, &c).is_err());
        // oracle: tabulated b-moments
        let b: Vec<HPReal> = (19..=21).map(|k| crate::quadrature::b_moment(k, &c).unwrap()).collect();
        let y = 1.0 / 40.0;
        let direct = y * y * (42.0 * 41.0 * b[1].to_f64().powi(2) - 40.0 * 39.0 * b[0].to_f64() * b[2].to_f64());
        assert!((direct / r.direct.to_f64() - 1.0).abs() < 1e-10);
    }
}
