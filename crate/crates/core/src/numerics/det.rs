use rug::float::Round;
use rug::ops::AddAssignRound;
use rug::{Float, Integer, Rational};

use super::{log10_abs, HPReal, IntPoly, PrecCtx, ERR_PREC};
use crate::{Error, Result};

fn check_square<T>(m: &[Vec<T>]) -> Result<usize> {
    let n = m.len();
    if n == 0 {
        return Err(Error::invalid("determinant of a 0x0 matrix"));
    }
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::invalid("matrix is not square"));
    }
    Ok(n)
}

/// Exact determinant of a rational matrix by Gaussian elimination over Q.
pub fn det_exact(matrix: &[Vec<Rational>]) -> Result<Rational> {
    let n = check_square(matrix)?;
    let mut a: Vec<Vec<Rational>> = matrix.to_vec();
    let mut det = Rational::from(1);
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| a[i][k] != 0) else {
            return Ok(Rational::new());
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            if row[k] == 0 {
                continue;
            }
            let f = Rational::from(&row[k] / &pivot_row[k]);
            for j in k..n {
                row[j] -= Rational::from(&f * &pivot_row[j]);
            }
        }
        det *= &a[k][k];
    }
    Ok(det)
}

/// Fraction-free (Bareiss) determinant of an integer matrix.
pub fn det_int(matrix: &[Vec<Integer>]) -> Result<Integer> {
    let n = check_square(matrix)?;
    let mut a: Vec<Vec<Integer>> = matrix.to_vec();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return Ok(Integer::new());
            };
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&a[k][k] * &a[i][j]) - Integer::from(&a[i][k] * &a[k][j]);
                a[i][j] = v.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign < 0 { -d } else { d })
}

/// Exact determinant of a matrix of integer polynomials (Bareiss elimination
/// with exact polynomial division).
pub fn det_poly(matrix: &[Vec<IntPoly>]) -> Result<IntPoly> {
    let n = check_square(matrix)?;
    let mut a: Vec<Vec<IntPoly>> = matrix.to_vec();
    let mut negate = false;
    let mut prev = IntPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(IntPoly::zero());
            };
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num
                    .div_exact(&prev)
                    .expect("Bareiss step must divide exactly");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { -&d } else { d })
}

/// Tuning for [`det_float`].
#[derive(Clone, Copy, Debug)]
pub struct DetFloatOptions {
    /// Significant digits that must survive cancellation.
    pub min_sig_digits: f64,
}

impl Default for DetFloatOptions {
    fn default() -> Self {
        DetFloatOptions { min_sig_digits: 10.0 }
    }
}

/// Determinant of an error-carrying matrix by partially pivoted elimination.
///
/// The error bound combines input errors through the cofactor bound
/// `|C_ij| <= H / ||row_i||` (`H` the Hadamard product of row norms) with an
/// elimination rounding term scaled by the observed element growth.
/// Cancellation is measured as `log10(H / |det|)`; when it consumes more than
/// `digits - min_sig_digits` digits, or the result does not clear its own error
/// bound, [`Error::PrecisionExhausted`] is returned so the caller can escalate.
pub fn det_float(matrix: &[Vec<HPReal>], ctx: &PrecCtx) -> Result<HPReal> {
    det_float_with(matrix, ctx, DetFloatOptions::default())
}

pub fn det_float_with(matrix: &[Vec<HPReal>], ctx: &PrecCtx, opts: DetFloatOptions) -> Result<HPReal> {
    let n = check_square(matrix)?;
    let prec = matrix
        .iter()
        .flatten()
        .map(HPReal::prec)
        .max()
        .unwrap_or(0)
        .max(ctx.bits());
    if matrix.iter().flatten().any(|x| !x.value().is_finite()) {
        return Err(Error::invalid("non-finite matrix entry"));
    }

    // row norms and the Hadamard bound
    let mut row_norms = Vec::with_capacity(n);
    let mut hadamard = Float::with_val(ERR_PREC, 1);
    let mut input_term = Float::with_val(ERR_PREC, 0);
    let mut max0 = Float::with_val(ERR_PREC, 0);
    for row in matrix {
        let mut s = Float::with_val(ERR_PREC, 0);
        let mut err_sum = Float::with_val(ERR_PREC, 0);
        for x in row {
            let ax = Float::with_val(ERR_PREC, &*x.value().as_abs());
            if ax > max0 {
                max0.clone_from(&ax);
            }
            s += Float::with_val(ERR_PREC, &ax * &ax);
            err_sum.add_assign_round(x.err(), Round::Up);
        }
        let norm = s.sqrt();
        if norm.is_zero() {
            // zero row: exact zero determinant unless inputs carry error
            let d = Float::new(prec);
            return if input_term.is_zero() && err_sum.is_zero() {
                Ok(HPReal::exact(d))
            } else {
                Err(Error::PrecisionExhausted {
                    digits: ctx.digits(),
                    lost_digits: f64::INFINITY,
                })
            };
        }
        input_term += Float::with_val(ERR_PREC, &err_sum / &norm);
        hadamard *= &norm;
        row_norms.push(norm);
    }

    let mut a: Vec<Vec<Float>> = matrix
        .iter()
        .map(|r| r.iter().map(|x| Float::with_val(prec, x.value())).collect())
        .collect();
    let mut det = Float::with_val(prec, 1);
    let mut growth = max0.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].cmp_abs(&a[j][k]).unwrap())
            .unwrap();
        if a[p][k].is_zero() {
            det = Float::new(prec);
            break;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            if row[k].is_zero() {
                continue;
            }
            let f = Float::with_val(prec, &row[k] / &pivot_row[k]);
            for j in k + 1..n {
                let t = Float::with_val(prec, &f * &pivot_row[j]);
                row[j] -= t;
                let ar = Float::with_val(ERR_PREC, &*row[j].as_abs());
                if ar > growth {
                    growth = ar;
                }
            }
        }
        det *= &a[k][k];
    }

    // rounding: 4 n^3 2^-prec H g
    let mut round = Float::with_val(ERR_PREC, &hadamard * (4 * n * n * n) as u32);
    if !max0.is_zero() {
        round *= Float::with_val(ERR_PREC, &growth / &max0);
    }
    round >>= prec;
    let mut err = Float::with_val(ERR_PREC, &hadamard * &input_term);
    err.add_assign_round(&round, Round::Up);

    let lost = if det.is_zero() {
        f64::INFINITY
    } else {
        log10_abs(&hadamard) - log10_abs(&det)
    };
    let usable = f64::from(ctx.digits()) - opts.min_sig_digits;
    let abs_det = Float::with_val(ERR_PREC, &*det.as_abs());
    if lost > usable || abs_det <= err {
        return Err(Error::PrecisionExhausted {
            digits: ctx.digits(),
            lost_digits: lost,
        });
    }
    Ok(HPReal::new(det, err))
}
