use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the base-`m` system: the base itself plus the derived
/// constants used everywhere else.
///
/// `alpha = 1/m` and `k_m = (m-1)^2 / log(m^2/(2m-1))`, the normalization of
/// the invariant density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChanParams {
    m: u32,
    alpha: f64,
    k_m: f64,
}

impl ChanParams {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("base m must be >= 2, got {m}")));
        }
        let mf = f64::from(m);
        // log(m^2/(2m-1)) split to avoid the quotient rounding twice
        let log_norm = 2.0 * mf.ln() - (2.0 * mf - 1.0).ln();
        Ok(Self {
            m,
            alpha: 1.0 / mf,
            k_m: (mf - 1.0) * (mf - 1.0) / log_norm,
        })
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn m_f64(&self) -> f64 {
        f64::from(self.m)
    }

    /// 1/m
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Normalization constant of the invariant density.
    #[inline]
    pub fn k_m(&self) -> f64 {
        self.k_m
    }

    /// log(m^2/(2m-1)) = (m-1)^2 / k_m, cached as the exact expression.
    #[inline]
    pub fn log_norm(&self) -> f64 {
        let mf = self.m_f64();
        2.0 * mf.ln() - (2.0 * mf - 1.0).ln()
    }

    /// m^-i without overflow for any i.
    #[inline]
    pub fn alpha_pow(&self, i: u32) -> f64 {
        self.m_f64().powi(-(i as i32))
    }
}
