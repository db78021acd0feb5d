//! Mellin-type zeta integrals in the critical strip: the classical Gauss-map
//! identity for the Riemann zeta function, and the analogue Z_m(s) for the
//! base-m map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cf::tau_step;
use crate::error::{Error, Result};
use crate::params::ChanParams;
use crate::quad::{adaptive_simpson_complex, ComplexQuadratureResult};

/// A point of the critical strip 0 < Re(s) < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(0.0 < re && re < 1.0) {
            return Err(Error::Domain(format!(
                "Re(s) = {re} outside the critical strip (0,1)"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn cpow(x: f64, s: Complex64) -> Complex64 {
    // principal branch; x > 0 keeps this unambiguous
    (s * x.ln()).exp()
}

/// 1/(s-1) - s * int_0^1 tau(x) x^(s-1) dx for the classical Gauss map,
/// which equals the Riemann zeta function in the strip.
///
/// Branch k of the map contributes a closed-form antiderivative on
/// (1/(k+1), 1/k]; the slowly converging tail over k is handled by an
/// Euler-Maclaurin correction of the partial power sums.
pub fn gauss_map_zeta(s: ComplexPoint, tol: f64) -> Result<ComplexQuadratureResult> {
    let s = s.as_complex();
    let integral = gauss_integral_closed_form(s, tol)?;
    Ok(ComplexQuadratureResult {
        // s/(s-1) - s*I is the Mellin identity that continues zeta into the
        // strip; with the 1/(s-1) variant the (positive) integral would have
        // to be negative, so that form cannot be right.
        value: s / (s - 1.0) - s * integral.value,
        error: s.norm() * integral.error,
    })
}

fn gauss_integral_closed_form(s: Complex64, tol: f64) -> Result<ComplexQuadratureResult> {
    // sum_{k<=K} int_{1/(k+1)}^{1/k} (x^(s-2) - k x^(s-1)) dx in closed form
    let cap = 4000usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=cap {
        let kf = k as f64;
        let a = 1.0 / (kf + 1.0);
        let b = 1.0 / kf;
        let t1 = (cpow(b, s - 1.0) - cpow(a, s - 1.0)) / (s - 1.0);
        let t2 = kf * (cpow(b, s) - cpow(a, s)) / s;
        sum += t1 - t2;
    }
    // tail over k > K: with n = K+1,
    //   R = n^-s/(2s) - n^(-s-1)/12 + (s+1)(s+2) n^(-s-3)/720
    //       - (s+1)(s+2)(s+3)(s+4) n^(-s-5)/30240 + ...
    let n = (cap + 1) as f64;
    let c1 = cpow(n, -s) / (2.0 * s);
    let c2 = -cpow(n, -s - 1.0) / 12.0;
    let c3 = (s + 1.0) * (s + 2.0) * cpow(n, -s - 3.0) / 720.0;
    let c4 = -(s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * cpow(n, -s - 5.0) / 30240.0;
    let tail = c1 + c2 + c3 + c4;
    let err = c4.norm() + 1e-15 * cap as f64;
    if err > tol {
        return Err(Error::QuadratureFailure { tol, achieved: err });
    }
    Ok(ComplexQuadratureResult { value: sum + tail, error: err })
}

/// Z_m(s) = 1/(s-1) - s * int_0^1 tau_m(x) x^(s-1) dx via branch-wise
/// closed-form antiderivatives, truncated once the geometric tail bound
/// drops below `tol`.
pub fn chan_zeta(s: ComplexPoint, params: &ChanParams, tol: f64) -> Result<ComplexQuadratureResult> {
    let sigma = s.re;
    let s = s.as_complex();
    let m = params.m_f64();
    // on I_i the integrand is (m^-i x^(s-2) - x^(s-1)) / (m-1)
    let mut sum = Complex64::new(0.0, 0.0);
    let mut i = 0u32;
    let err;
    loop {
        let a = params.alpha_pow(i + 1);
        let b = params.alpha_pow(i);
        let t1 = params.alpha_pow(i) * (cpow(b, s - 1.0) - cpow(a, s - 1.0)) / (s - 1.0);
        let t2 = (cpow(b, s) - cpow(a, s)) / s;
        sum += (t1 - t2) / (m - 1.0);
        // |tau_m| <= 1, so the remaining integral over [0, m^-(i+1)] is
        // bounded by int_0^eps x^(sigma-1) dx = eps^sigma/sigma
        let tail = params.alpha_pow(i + 1).powf(sigma) / sigma;
        if tail < tol {
            err = tail;
            break;
        }
        i += 1;
        if i > 100_000 {
            return Err(Error::QuadratureFailure { tol, achieved: tail });
        }
    }
    Ok(ComplexQuadratureResult {
        value: 1.0 / (s - 1.0) - s * sum,
        error: s.norm() * err,
    })
}

/// Independent evaluation of Z_m(s): adaptive quadrature of the raw
/// integrand tau_m(x) x^(s-1) on each branch interval down to a truncation
/// point, with the map evaluated through `tau_step` rather than the
/// closed-form branch expression.
pub fn chan_zeta_quadrature(
    s: ComplexPoint,
    params: &ChanParams,
    tol: f64,
) -> Result<ComplexQuadratureResult> {
    let sigma = s.re;
    let sc = s.as_complex();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut i = 0u32;
    loop {
        let a = params.alpha_pow(i + 1);
        let b = params.alpha_pow(i);
        let integrand = |x: f64| {
            let t = tau_step(x, params).expect("x in [0,1]");
            t * cpow(x, sc - 1.0)
        };
        // stay strictly inside the branch to dodge boundary misclassification
        let inset = (b - a) * 1e-12;
        // per-branch budget proportional to the branch's share of the total
        let branch_tol = 0.1 * tol * params.alpha_pow(i).powf(sigma) * (1.0 - params.alpha().powf(sigma));
        let part = adaptive_simpson_complex(&integrand, a + inset, b - inset, branch_tol)?;
        sum += part.value;
        err += part.error + inset * (a.powf(sigma - 1.0) + b.powf(sigma - 1.0));
        let tail = params.alpha_pow(i + 1).powf(sigma) / sigma;
        if tail < tol {
            err += tail;
            break;
        }
        i += 1;
        if i > 100_000 {
            return Err(Error::QuadratureFailure { tol, achieved: tail });
        }
    }
    Ok(ComplexQuadratureResult {
        value: 1.0 / (sc - 1.0) - sc * sum,
        error: sc.norm() * err,
    })
}
