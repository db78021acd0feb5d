//! The transfer operator, the RSCC transition probabilities and kernel, the
//! Gauss-Kuzmin functional iteration and the contraction-constant series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::inverse_branch;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridKind, Pchip};
use crate::measure::cdf_omega;
use crate::params::ChanParams;

/// Transition probability P_{m,i}(x) of the random system with complete
/// connections. The natural domain of the formula is x in [0, m-1]; the
/// extended range is used by the partial-fraction identities, which evaluate
/// P at (m-1)x.
pub fn transition_prob(i: u32, x: f64, params: &ChanParams) -> Result<f64> {
    let m = params.m_f64();
    if !(0.0..=m - 1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0, m-1]")));
    }
    let a_i = (m - 1.0) * params.alpha_pow(i);
    let a_i1 = (m - 1.0) * params.alpha_pow(i + 1);
    Ok(a_i1 * (x + 1.0) * (x + m) / ((x + a_i + 1.0) * (x + a_i1 + 1.0)))
}

/// Sum of transition probabilities by direct summation, truncated when the
/// geometric tail is negligible. Telescopes to 1 analytically.
pub fn transition_prob_sum(x: f64, params: &ChanParams) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..4096 {
        let term = transition_prob(i, x, params)?;
        total += term;
        // terms decay geometrically with ratio ~1/m
        if term < 1e-18 {
            break;
        }
    }
    Ok(total)
}

/// Markov kernel Q_m(x, [a,b]): total transition probability into branches
/// whose inverse-branch image of x lands in [a,b].
pub fn markov_kernel(x: f64, a: f64, b: f64, params: &ChanParams) -> Result<f64> {
    if a > b {
        return Err(Error::Domain(format!("interval [{a},{b}] is empty")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1]")));
    }
    let mut total = 0.0;
    for i in 0..4096 {
        let u = inverse_branch(x, i, params)?;
        if u < a && transition_prob(i, x, params)? < 1e-18 {
            break; // u_i decreases in i; nothing further can enter [a,b]
        }
        if (a..=b).contains(&u) {
            total += transition_prob(i, x, params)?;
        }
        if u < a {
            break;
        }
    }
    Ok(total)
}

/// Point evaluation of the transfer operator on an analytic density:
/// Gf(x) = sum_i (m-1) m^-i / ((m-1)x+1)^2 * f(m^-i/((m-1)x+1)),
/// truncated once the tail bound sup|f| * m^-I drops below `tol`.
pub fn apply_transfer_fn(f: &dyn Fn(f64) -> f64, x: f64, params: &ChanParams, tol: f64) -> f64 {
    let m = params.m_f64();
    let y = (m - 1.0) * x + 1.0;
    let mut sup = 0.0f64;
    let mut total = 0.0;
    for i in 0..4096 {
        let u = params.alpha_pow(i) / y;
        let fv = f(u);
        sup = sup.max(fv.abs());
        total += (m - 1.0) * params.alpha_pow(i) / (y * y) * fv;
        if sup * params.alpha_pow(i) < tol {
            break;
        }
    }
    total
}

/// Transfer operator on a density grid; off-grid reads go through the
/// monotone cubic interpolant.
pub fn apply_g(f: &GridFunction, params: &ChanParams, tol: f64) -> Result<GridFunction> {
    let est = f.interp_error_estimate();
    if est > tol {
        return Err(Error::GridTooCoarse { estimate: est, tol });
    }
    let interp = Pchip::new(f);
    let n = f.len();
    let h = f.spacing();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| apply_transfer_fn(&|u| interp.eval(u), j as f64 * h, params, 1e-12))
        .collect();
    GridFunction::from_values(values, GridKind::Density)
}

/// One Gauss-Kuzmin iteration on a CDF grid:
/// F'(x) = sum_i { F(alpha^i) - F(alpha^i / (1 + (m-1)x)) }.
///
/// The tail over i > I is bounded by F(alpha^{I+1}); branches are summed
/// until that bound drops below 1e-12. The output is clamped to [0,1];
/// monotonicity violations beyond 1e-9 signal grid failure.
pub fn kuzmin_iterate(f: &GridFunction, params: &ChanParams) -> Result<GridFunction> {
    kuzmin_iterate_tol(f, params, 1e-8)
}

pub fn kuzmin_iterate_tol(f: &GridFunction, params: &ChanParams, tol: f64) -> Result<GridFunction> {
    if f.kind() != GridKind::Cdf {
        return Err(Error::Domain("Gauss-Kuzmin iteration needs a CDF grid".into()));
    }
    let est = f.interp_error_estimate();
    if est > tol {
        return Err(Error::GridTooCoarse { estimate: est, tol });
    }
    let interp = Pchip::new(f);
    let m = params.m_f64();
    let n = f.len();
    let h = f.spacing();

    // branch count: tail <= F(alpha^(I+1)) < 1e-12
    let mut branches = 1u32;
    while interp.eval(params.alpha_pow(branches)) > 1e-12 && branches < 4096 {
        branches += 1;
    }

    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 * h;
            let denom = 1.0 + (m - 1.0) * x;
            let mut acc = 0.0;
            for i in 0..=branches {
                let top = params.alpha_pow(i);
                acc += interp.eval(top) - interp.eval(top / denom);
            }
            acc
        })
        .collect();

    let mut out = values;
    out[0] = 0.0;
    let last = n - 1;
    out[last] = 1.0;
    for j in 1..n {
        if out[j] < out[j - 1] - 1e-9 {
            return Err(Error::MonotonicityViolation {
                node: j,
                violation: out[j - 1] - out[j],
            });
        }
        out[j] = out[j].max(out[j - 1]).min(1.0);
    }
    GridFunction::from_values(out, GridKind::Cdf)
}

/// Per-iteration record of a Gauss-Kuzmin run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KuzminReport {
    pub sup_errors: Vec<f64>,
    pub rate: Option<RateReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KuzminStart {
    Lebesgue,
    Omega,
}

/// Iterate the Gauss-Kuzmin equation and track sup|F_n - omega| at the nodes.
pub fn kuzmin_run(
    params: &ChanParams,
    grid_size: usize,
    iterations: usize,
    start: KuzminStart,
) -> Result<KuzminReport> {
    let omega = |x: f64| cdf_omega(x, params).expect("grid node in domain");
    let mut f = match start {
        KuzminStart::Lebesgue => GridFunction::sample(|x| x, grid_size, GridKind::Cdf)?,
        KuzminStart::Omega => GridFunction::sample(omega, grid_size, GridKind::Cdf)?,
    };
    let mut sup_errors = vec![f.sup_distance_fn(omega)];
    for _ in 0..iterations {
        f = kuzmin_iterate(&f, params)?;
        sup_errors.push(f.sup_distance_fn(omega));
    }
    Ok(KuzminReport { sup_errors, rate: None })
}

/// The series (m-1)^2 (m^2+1) sum_i 1/(m^(i+1)+m-1)^2, summed until the
/// geometric tail bound is below `tol`. The value exceeds 1 for m >= 3; the
/// caller decides what to make of that.
pub fn q_bound(params: &ChanParams, tol: f64) -> f64 {
    let m = params.m_f64();
    let front = (m - 1.0) * (m - 1.0) * (m * m + 1.0);
    let mut total = 0.0;
    let mut i = 0;
    loop {
        let denom = m.powi(i + 1) + m - 1.0;
        let term = 1.0 / (denom * denom);
        total += term;
        // remaining terms are dominated by a geometric series of ratio m^-2
        let tail = front * term / (m * m - 1.0);
        if tail < tol {
            break;
        }
        i += 1;
    }
    front * total
}

/// Residuals of the partial-fraction identity for P^i_m((m-1)x) and of its
/// derivative identity (checked against central differences).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Lemma24Residuals {
    pub partial_fraction: f64,
    pub derivative: f64,
}

fn delta_i(i: u32, params: &ChanParams) -> f64 {
    params.alpha_pow(i) - params.alpha_pow(2 * i)
}

/// beta^i_m(x) = (m-1) delta_i / ((m-1)x + (m-1)alpha^i + 1)^2.
pub fn beta(i: u32, x: f64, params: &ChanParams) -> f64 {
    let m = params.m_f64();
    let denom = (m - 1.0) * x + (m - 1.0) * params.alpha_pow(i) + 1.0;
    (m - 1.0) * delta_i(i, params) / (denom * denom)
}

fn partial_fraction_rhs(i: u32, x: f64, params: &ChanParams) -> f64 {
    let m = params.m_f64();
    let denom_i = (m - 1.0) * x + (m - 1.0) * params.alpha_pow(i) + 1.0;
    let denom_i1 = (m - 1.0) * x + (m - 1.0) * params.alpha_pow(i + 1) + 1.0;
    (m - 1.0)
        * (params.alpha_pow(i + 1) + delta_i(i, params) / denom_i
            - delta_i(i + 1, params) / denom_i1)
}

pub fn lemma24_identities(i: u32, x: f64, params: &ChanParams) -> Result<Lemma24Residuals> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1]")));
    }
    let m = params.m_f64();
    let p_at = |x: f64| transition_prob(i, ((m - 1.0) * x).clamp(0.0, m - 1.0), params).unwrap();
    let partial_fraction = (p_at(x) - partial_fraction_rhs(i, x, params)).abs();

    let h = 1e-5;
    let (lo, hi) = if x < h {
        (x, x + 2.0 * h)
    } else if x > 1.0 - h {
        (x - 2.0 * h, x)
    } else {
        (x - h, x + h)
    };
    let fd = (p_at(hi) - p_at(lo)) / (hi - lo);
    let analytic = (m - 1.0) * (beta(i + 1, 0.5 * (lo + hi), params) - beta(i, 0.5 * (lo + hi), params));
    Ok(Lemma24Residuals {
        partial_fraction,
        derivative: (fd - analytic).abs(),
    })
}

/// Fitted geometric decay rate of an error sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub sup_errors: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fitted_rate: f64,
    pub window: (usize, usize),
}

/// Least-squares slope of log e_n over `window` (inclusive indices into
/// `errors`). Entries at or below `floor` shrink the window; the floor marks
/// where grid interpolation noise takes over.
pub fn estimate_rate(errors: &[f64], window: (usize, usize), floor: f64) -> Result<RateReport> {
    if errors.len() < 6 {
        return Err(Error::DegenerateFit("need at least 6 error values".into()));
    }
    if errors.iter().any(|&e| e < 0.0) {
        return Err(Error::DegenerateFit("negative error value".into()));
    }
    let (start, mut end) = window;
    if start >= end || end >= errors.len() {
        return Err(Error::DegenerateFit(format!(
            "window {window:?} invalid for {} errors",
            errors.len()
        )));
    }
    while end > start && errors[end] <= floor {
        end -= 1;
    }
    if end - start < 2 {
        return Err(Error::DegenerateFit(
            "window collapsed onto the numerical floor".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = (start..=end)
        .filter(|&n| errors[n] > 0.0)
        .map(|n| (n as f64, errors[n].ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit("too few positive errors in window".into()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let ratios = errors
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
        .collect();
    Ok(RateReport {
        sup_errors: errors.to_vec(),
        ratios,
        fitted_rate: slope.exp(),
        window: (start, end),
    })
}
