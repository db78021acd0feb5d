//! Adaptive Simpson quadrature with explicit error accounting. Every
//! integral-valued quantity in the crate reports a value together with an
//! error estimate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexQuadratureResult {
    pub value: Complex64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 48;

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut err = 0.0;
    let value = recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut err)?;
    Ok(QuadratureResult { value, error: err })
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            tol,
            achieved: delta.abs() / 15.0,
        });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, err)?;
    let r = recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, err)?;
    Ok(l + r)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

pub fn adaptive_simpson_complex(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<ComplexQuadratureResult> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = csimpson(a, b, fa, fm, fb);
    let mut err = 0.0;
    let value = crecurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut err)?;
    Ok(ComplexQuadratureResult { value, error: err })
}

#[allow(clippy::too_many_arguments)]
fn crecurse(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = csimpson(a, m, fa, flm, fm);
    let right = csimpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        *err += delta.norm() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            tol,
            achieved: delta.norm() / 15.0,
        });
    }
    let l = crecurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, err)?;
    let r = crecurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, err)?;
    Ok(l + r)
}

#[inline]
fn csimpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
}
