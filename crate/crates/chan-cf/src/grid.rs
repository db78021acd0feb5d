//! Functions sampled on a uniform grid over [0,1], with monotone
//! piecewise-cubic interpolation for off-grid reads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    Cdf,
    Density,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
    kind: GridKind,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>, kind: GridKind) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("grid needs at least 2 nodes".into()));
        }
        if let GridKind::Cdf = kind {
            if (values[0]).abs() > 1e-12 || (values[values.len() - 1] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain("CDF grid must run from 0 to 1".into()));
            }
            for (j, w) in values.windows(2).enumerate() {
                if w[1] < w[0] - 1e-12 {
                    return Err(Error::MonotonicityViolation {
                        node: j + 1,
                        violation: w[0] - w[1],
                    });
                }
            }
        }
        Ok(Self { values, kind })
    }

    pub fn sample(f: impl Fn(f64) -> f64, n_nodes: usize, kind: GridKind) -> Result<Self> {
        let h = 1.0 / (n_nodes - 1) as f64;
        let values = (0..n_nodes).map(|j| f(j as f64 * h)).collect();
        Self::from_values(values, kind)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Monotone piecewise-cubic read at x (clamped to [0,1]).
    pub fn interpolate(&self, x: f64) -> f64 {
        Pchip::new(self).eval(x)
    }

    /// sup_j |self - other| over the nodes.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// sup_j |values_j - f(x_j)|.
    pub fn sup_distance_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.spacing();
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| (v - f(j as f64 * h)).abs())
            .fold(0.0, f64::max)
    }

    /// Composite Simpson integral over [0,1] (trapezoid on the last cell if
    /// the interval count is odd).
    pub fn integral(&self) -> f64 {
        let h = self.spacing();
        let n = self.values.len() - 1; // interval count
        let pairs = n / 2;
        let mut total = 0.0;
        for k in 0..pairs {
            let j = 2 * k;
            total += h / 3.0 * (self.values[j] + 4.0 * self.values[j + 1] + self.values[j + 2]);
        }
        if n % 2 == 1 {
            total += h / 2.0 * (self.values[n - 1] + self.values[n]);
        }
        total
    }

    /// Crude interpolation-error estimate from third differences; the cubic
    /// interpolant error scales like |f'''| h^3.
    pub fn interp_error_estimate(&self) -> f64 {
        let mut max3 = 0.0f64;
        for w in self.values.windows(4) {
            let d3 = (w[3] - 3.0 * w[2] + 3.0 * w[1] - w[0]).abs();
            max3 = max3.max(d3);
        }
        max3 / 6.0
    }

    /// Inverse-CDF read by bisection plus linear interpolation.
    pub fn invert_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("{u} outside [0,1]")));
        }
        if self.kind != GridKind::Cdf {
            return Err(Error::Domain("inverse sampling needs a CDF grid".into()));
        }
        let v = &self.values;
        let mut lo = 0usize;
        let mut hi = v.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if v[mid] < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.spacing();
        let span = v[hi] - v[lo];
        let frac = if span > 0.0 { (u - v[lo]) / span } else { 0.0 };
        Ok((lo as f64 + frac.clamp(0.0, 1.0)) * h)
    }
}

/// Precomputed monotone cubic interpolant (Fritsch-Carlson slopes with the
/// harmonic-mean rule on a uniform grid).
pub struct Pchip {
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(grid: &GridFunction) -> Self {
        let v = grid.values.clone();
        let n = v.len();
        let h = grid.spacing();
        let mut delta = vec![0.0; n - 1];
        for j in 0..n - 1 {
            delta[j] = (v[j + 1] - v[j]) / h;
        }
        let mut d = vec![0.0; n];
        for j in 1..n - 1 {
            let (a, b) = (delta[j - 1], delta[j]);
            d[j] = if a * b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
        }
        d[0] = edge_slope(delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        d[n - 1] = edge_slope(delta[n - 2], delta.get(n.wrapping_sub(3)).copied().unwrap_or(delta[n - 2]));
        Self { h, values: v, slopes: d }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let n = self.values.len();
        let mut j = ((x / self.h) as usize).min(n - 2);
        if x < j as f64 * self.h {
            j = j.saturating_sub(1);
        }
        let t = (x - j as f64 * self.h) / self.h;
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.slopes[j] * self.h, self.slopes[j + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }
}

/// One-sided three-point slope estimate, clamped for monotonicity.
fn edge_slope(d_near: f64, d_far: f64) -> f64 {
    let s = 1.5 * d_near - 0.5 * d_far;
    if s * d_near <= 0.0 {
        0.0
    } else if (s - 3.0 * d_near).abs() > 2.0 * d_near.abs() && s.abs() > 3.0 * d_near.abs() {
        3.0 * d_near
    } else {
        s
    }
}
