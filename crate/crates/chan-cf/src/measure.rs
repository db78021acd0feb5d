//! The invariant density, its CDF, interval measures, the stationary digit
//! law and closed-form inverse-CDF sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::ChanParams;

/// Initial measure of a pushforward experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MeasureSpec {
    Lebesgue,
    /// The invariant measure of the map.
    Gamma,
    /// Arbitrary CDF sampled by inversion on its grid.
    CustomCdf(GridFunction),
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{x} outside [0,1]")))
    }
}

/// Invariant density k_m / (((m-1)x+1)((m-1)x+m)).
pub fn density_rho(x: f64, params: &ChanParams) -> Result<f64> {
    check_unit(x)?;
    let m = params.m_f64();
    let y = (m - 1.0) * x + 1.0;
    Ok(params.k_m() / (y * (y + m - 1.0)))
}

/// CDF of the invariant measure:
/// (k_m/(m-1)^2) log( m((m-1)x+1) / ((m-1)x+m) ).
pub fn cdf_omega(x: f64, params: &ChanParams) -> Result<f64> {
    check_unit(x)?;
    let m = params.m_f64();
    let y = (m - 1.0) * x + 1.0;
    // ln(m*y/(y+m-1)) via ln_1p of the deviation from 1 for accuracy near 0
    let t = (m - 1.0) * (y - 1.0) / (y + m - 1.0); // m*y/(y+m-1) = 1 + t
    let v = t.ln_1p() / params.log_norm();
    Ok(v.clamp(0.0, 1.0))
}

/// gamma_m([a,b]) = omega(b) - omega(a).
pub fn gamma_interval(a: f64, b: f64, params: &ChanParams) -> Result<f64> {
    if a > b {
        return Err(Error::Domain(format!("interval [{a},{b}] is empty")));
    }
    Ok((cdf_omega(b, params)? - cdf_omega(a, params)?).max(0.0))
}

/// Stationary probability of digit i: gamma_m(I_i).
pub fn digit_probability(i: u32, params: &ChanParams) -> f64 {
    let hi = params.alpha_pow(i);
    let lo = params.alpha_pow(i + 1);
    gamma_interval(lo, hi, params).expect("branch interval is valid")
}

/// Closed-form inverse of the CDF: x with omega(x) = u.
pub fn sample_gamma(u: f64, params: &ChanParams) -> Result<f64> {
    check_unit(u)?;
    let m = params.m_f64();
    // C = (m^2/(2m-1))^u
    let c = (u * params.log_norm()).exp();
    let x = m * (c - 1.0) / ((m - c) * (m - 1.0));
    Ok(x.clamp(0.0, 1.0))
}

/// gamma_m(tau^-1([a,b])) summed over the inverse branches, with the series
/// truncated once the remaining branches fit inside [0, m^-I] and that tail
/// mass is below 1e-14.
pub fn tau_preimage_measure(a: f64, b: f64, params: &ChanParams) -> Result<f64> {
    if a > b {
        return Err(Error::Domain(format!("interval [{a},{b}] is empty")));
    }
    let mut total = 0.0;
    for i in 0.. {
        // u_i is decreasing in x, so the branch preimage of [a,b] is
        // [u_i(b), u_i(a)]
        let lo = crate::cf::inverse_branch(b, i, params)?;
        let hi = crate::cf::inverse_branch(a, i, params)?;
        total += gamma_interval(lo, hi, params)?;
        // all later branches live below m^-(i+1)
        let tail = cdf_omega(params.alpha_pow(i + 1), params)?;
        if tail < 1e-14 {
            break;
        }
    }
    Ok(total)
}

impl MeasureSpec {
    /// Map a uniform u in [0,1] to a sample of the measure.
    pub fn sample(&self, u: f64, params: &ChanParams) -> Result<f64> {
        match self {
            MeasureSpec::Lebesgue => {
                check_unit(u)?;
                Ok(u)
            }
            MeasureSpec::Gamma => sample_gamma(u, params),
            MeasureSpec::CustomCdf(grid) => grid.invert_cdf(u),
        }
    }

    /// CDF of the measure at x.
    pub fn cdf(&self, x: f64, params: &ChanParams) -> Result<f64> {
        match self {
            MeasureSpec::Lebesgue => {
                check_unit(x)?;
                Ok(x)
            }
            MeasureSpec::Gamma => cdf_omega(x, params),
            MeasureSpec::CustomCdf(grid) => Ok(grid.interpolate(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::inverse_branch;

    fn p(m: u32) -> ChanParams {
        ChanParams::new(m).unwrap()
    }

    #[test]
    fn density_endpoints() {
        let p2 = p(2);
        assert!((density_rho(0.0, &p2).unwrap() - p2.k_m() / 2.0).abs() < 1e-12);
        assert!((density_rho(1.0, &p2).unwrap() - p2.k_m() / 6.0).abs() < 1e-12);
        assert!((density_rho(0.0, &p2).unwrap() - 1.7380298).abs() < 1e-6);
    }

    #[test]
    fn density_integrates_to_one() {
        // closed-form antiderivative is omega itself
        for m in 2..=10 {
            let params = p(m);
            assert!((cdf_omega(1.0, &params).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(cdf_omega(0.0, &params).unwrap(), 0.0);
        }
    }

    #[test]
    fn omega_midpoint_value() {
        // omega_2(1/2) = ln(1.2)/ln(4/3)
        let v = cdf_omega(0.5, &p(2)).unwrap();
        assert!((v - 1.2f64.ln() / (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((v - 0.6337606).abs() < 1e-6);
    }

    #[test]
    fn gamma_interval_examples() {
        let p2 = p(2);
        assert!((gamma_interval(0.0, 1.0, &p2).unwrap() - 1.0).abs() < 1e-14);
        // 1 - ln(1.2)/ln(4/3)
        assert!((gamma_interval(0.5, 1.0, &p2).unwrap() - 0.3662394).abs() < 1e-6);
        assert_eq!(gamma_interval(0.3, 0.3, &p2).unwrap(), 0.0);
        assert!(gamma_interval(0.5, 0.4, &p2).is_err());
    }

    #[test]
    fn digit_probabilities() {
        let p2 = p(2);
        assert!((digit_probability(0, &p2) - 0.3662394).abs() < 1e-6);
        // gamma((1/4,1/2]) = ln(27/25)/ln(4/3)
        let exact1 = (27f64 / 25.0).ln() / (4f64 / 3.0).ln();
        assert!((digit_probability(1, &p2) - exact1).abs() < 1e-13);
        for m in 2..=10 {
            let params = p(m);
            let total: f64 = (0..=60).map(|i| digit_probability(i, &params)).sum();
            assert!((total - 1.0).abs() < 1e-12, "m={m}: {total}");
        }
    }

    #[test]
    fn sample_gamma_inverts_cdf() {
        let p2 = p(2);
        assert_eq!(sample_gamma(0.0, &p2).unwrap(), 0.0);
        assert!((sample_gamma(1.0, &p2).unwrap() - 1.0).abs() < 1e-12);
        assert!((sample_gamma(0.5, &p2).unwrap() - 0.3660254).abs() < 1e-7);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [2u32, 3, 7] {
            let params = p(m);
            for _ in 0..10_000 {
                let u: f64 = rng.gen();
                let x = sample_gamma(u, &params).unwrap();
                assert!((cdf_omega(x, &params).unwrap() - u).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cdf_derivative_is_density() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for m in [2u32, 3, 5] {
            let params = p(m);
            for _ in 0..100 {
                let x: f64 = rng.gen_range(0.01..0.99);
                let fd = (cdf_omega(x + h, &params).unwrap() - cdf_omega(x - h, &params).unwrap())
                    / (2.0 * h);
                let rho = density_rho(x, &params).unwrap();
                assert!((fd - rho).abs() / rho < 1e-6);
            }
        }
    }

    #[test]
    fn measure_invariance_under_preimage() {
        // gamma(tau^-1[a,b]) = gamma([a,b]) via the inverse branches
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for m in [2u32, 3] {
            let params = p(m);
            for _ in 0..200 {
                let mut a: f64 = rng.gen();
                let mut b: f64 = rng.gen();
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                let direct = gamma_interval(a, b, &params).unwrap();
                let pulled = tau_preimage_measure(a, b, &params).unwrap();
                assert!(
                    (direct - pulled).abs() < 1e-10,
                    "m={m} [{a},{b}]: {direct} vs {pulled}"
                );
            }
        }
    }

    #[test]
    fn inverse_branch_examples() {
        let p2 = p(2);
        assert!((inverse_branch(0.0, 0, &p2).unwrap() - 1.0).abs() < 1e-15);
        assert!((inverse_branch(1.0, 0, &p2).unwrap() - 0.5).abs() < 1e-15);
        let p3 = p(3);
        // (1/3)/((3-1)(1/2)+1) = 1/6, and tau must invert it on branch 1
        let u = inverse_branch(0.5, 1, &p3).unwrap();
        assert!((u - 1.0 / 6.0).abs() < 1e-15);
        assert!((crate::cf::tau_step(u, &p3).unwrap() - 0.5).abs() < 1e-14);
    }
}
