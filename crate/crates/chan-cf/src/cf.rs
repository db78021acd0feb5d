//! The base-m interval map, digit extraction and continued-fraction
//! evaluation.
//!
//! The map has branches I_i = (m^-(i+1), m^-i]; on I_i it sends x to
//! ((m^i x)^-1 - 1)/(m-1). Digits of x are the branch indices along the
//! orbit. Two digit paths exist: exact rational arithmetic, and a
//! validated-float path that encloses the orbit in a directed-rounded
//! interval and refuses to emit a digit the enclosure cannot certify.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{interval_tau_step, DyadicInterval, IntervalStep};
use crate::error::{Error, Result};
use crate::params::ChanParams;

pub const DEFAULT_PRECISION_BITS: u64 = 256;
/// Automatic doubling stops here.
pub const MAX_PRECISION_BITS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DigitMode {
    ExactRational,
    ValidatedFloat,
}

/// A finite prefix of the digit sequence a_1, a_2, ...
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitSequence {
    pub digits: Vec<u32>,
    /// The orbit hit 0 exactly; no further digits exist.
    pub terminated: bool,
    /// Digits certified correct. Equals `digits.len()` in exact mode and
    /// for every sequence returned without error.
    pub reliable_count: usize,
    pub mode: DigitMode,
}

/// Exact rational in [0,1], kept reduced with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitRational(BigRational);

impl UnitRational {
    pub fn new(numer: BigUint, denom: BigUint) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::Domain("denominator must be positive".into()));
        }
        if numer > denom {
            return Err(Error::Domain("rational must lie in [0,1]".into()));
        }
        Ok(Self(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_ratio(r: BigRational) -> Result<Self> {
        if r.is_negative() || r > BigRational::one() {
            return Err(Error::Domain("rational must lie in [0,1]".into()));
        }
        Ok(Self(r))
    }

    /// Exact value of a finite f64 in [0,1].
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("{x} outside [0,1]")));
        }
        Self::from_ratio(BigRational::from_float(x).expect("finite"))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Quantized index map: floor(-log_m x), i.e. the unique i with x in I_i.
pub fn branch_index(x: f64, params: &ChanParams) -> Result<u32> {
    if x == 0.0 {
        return Err(Error::TerminatedOrbit);
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1]")));
    }
    let m = params.m_f64();
    let mut i = (-x.ln() / m.ln()).floor().max(0.0) as i64;
    // float log can land one branch off near boundaries; fix up exactly
    loop {
        let upper = m.powi(-(i as i32));
        if x > upper {
            i -= 1;
            debug_assert!(i >= 0);
            continue;
        }
        if x <= m.powi(-(i as i32) - 1) {
            i += 1;
            continue;
        }
        return Ok(i as u32);
    }
}

/// One step of the map: ((m^i x)^-1 - 1)/(m-1) on branch i, 0 at 0.
pub fn tau_step(x: f64, params: &ChanParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let i = branch_index(x, params)?;
    let m = params.m_f64();
    let scaled = m.powi(i as i32) * x;
    let y = (1.0 / scaled - 1.0) / (m - 1.0);
    Ok(y.clamp(0.0, 1.0))
}

/// Branch index of an exact rational in (0,1].
pub fn branch_index_rational(x: &UnitRational, params: &ChanParams) -> Result<u32> {
    if x.is_zero() {
        return Err(Error::TerminatedOrbit);
    }
    let r = x.as_ratio();
    let (p, q) = (r.numer().magnitude().clone(), r.denom().magnitude().clone());
    let m = BigUint::from(params.m());
    // find i with m^i p <= q < m^(i+1) p
    let mut i = 0u32;
    let mut scaled = p;
    loop {
        let next = &scaled * &m;
        if scaled <= q && q < next {
            return Ok(i);
        }
        scaled = next;
        i += 1;
    }
}

/// Exact map step on rationals.
pub fn tau_step_rational(x: &UnitRational, params: &ChanParams) -> Result<(u32, UnitRational)> {
    let i = branch_index_rational(x, params)?;
    let r = x.as_ratio();
    let m_pow = BigRational::from_integer(num_bigint::BigInt::from(params.m())).pow(i as i32);
    let m_minus_1 = BigRational::from_integer(num_bigint::BigInt::from(params.m() - 1));
    let next = (BigRational::one() / (&m_pow * r) - BigRational::one()) / m_minus_1;
    Ok((i, UnitRational::from_ratio(next)?))
}

/// Validated digit extraction from an f64 starting point.
///
/// Starts at `precision_bits` and doubles up to the cap whenever the
/// enclosure straddles a branch boundary before `n` digits are certified.
pub fn expand(x: f64, n: usize, params: &ChanParams) -> Result<DigitSequence> {
    expand_with_precision(x, n, params, DEFAULT_PRECISION_BITS)
}

pub fn expand_with_precision(
    x: f64,
    n: usize,
    params: &ChanParams,
    precision_bits: u64,
) -> Result<DigitSequence> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1)")));
    }
    if n == 0 {
        return Err(Error::Domain("digit count must be >= 1".into()));
    }
    let mut prec = precision_bits.max(64);
    while prec <= MAX_PRECISION_BITS {
        let seq = expand_at_precision(x, n, params, prec);
        if seq.terminated || seq.digits.len() == n {
            return Ok(seq);
        }
        prec *= 2;
    }
    // The enclosure straddles a branch boundary at every precision. That
    // happens exactly when the true orbit point sits on a boundary (or at 0),
    // which an interval of positive width can never certify -- common for f64
    // inputs, whose exact orbits often terminate. The input is an exact
    // dyadic rational, so resolve the remaining ambiguity exactly rather
    // than guess.
    expand_rational(&UnitRational::from_f64(x)?, n, params)
}

fn expand_at_precision(x: f64, n: usize, params: &ChanParams, prec: u64) -> DigitSequence {
    let mut iv = DyadicInterval::point(x);
    let mut digits = Vec::new();
    let mut terminated = x == 0.0;
    while digits.len() < n && !terminated {
        match interval_tau_step(&iv, params.m(), prec) {
            IntervalStep::Digit { index, next } => {
                digits.push(index);
                terminated = next.is_exactly_zero();
                iv = next;
            }
            IntervalStep::Terminated => terminated = true,
            IntervalStep::Ambiguous => break,
        }
    }
    let reliable_count = digits.len();
    DigitSequence {
        digits,
        terminated,
        reliable_count,
        mode: DigitMode::ValidatedFloat,
    }
}

/// Exact digit extraction to depth `n`. Every digit is certified; no
/// termination is claimed unless the orbit hits 0 exactly.
pub fn expand_rational(x: &UnitRational, n: usize, params: &ChanParams) -> Result<DigitSequence> {
    if x.as_ratio() >= &BigRational::one() {
        return Err(Error::Domain("x must lie in [0,1)".into()));
    }
    let mut cur = x.clone();
    let mut digits = Vec::new();
    let mut terminated = cur.is_zero();
    while digits.len() < n && !terminated {
        let (i, next) = tau_step_rational(&cur, params)?;
        digits.push(i);
        terminated = next.is_zero();
        cur = next;
    }
    let reliable_count = digits.len();
    Ok(DigitSequence {
        digits,
        terminated,
        reliable_count,
        mode: DigitMode::ExactRational,
    })
}

/// Bottom-up evaluation of x = m^-a1 / (1 + (m-1) m^-a2 / (1 + ...)).
pub fn evaluate_cf(digits: &[u32], params: &ChanParams) -> Result<f64> {
    Ok(evaluate_cf_rational(digits, params)?.to_f64())
}

/// Exact evaluation of the finite continued fraction.
pub fn evaluate_cf_rational(digits: &[u32], params: &ChanParams) -> Result<UnitRational> {
    if digits.is_empty() {
        return Err(Error::EmptyDigits);
    }
    let m = num_bigint::BigInt::from(params.m());
    let m_minus_1 = BigRational::from_integer(num_bigint::BigInt::from(params.m() - 1));
    let alpha_pow = |a: u32| {
        BigRational::new(num_bigint::BigInt::one(), m.clone().pow(a))
    };
    let mut acc = BigRational::zero();
    for (idx, &a) in digits.iter().enumerate().rev() {
        if idx == digits.len() - 1 {
            acc = alpha_pow(a);
        } else {
            acc = alpha_pow(a) / (BigRational::one() + &m_minus_1 * &acc);
        }
    }
    UnitRational::from_ratio(acc)
}

/// Inverse branch u_{m,i}(x) = m^-i / ((m-1)x + 1), the RSCC branch map.
pub fn inverse_branch(x: f64, i: u32, params: &ChanParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1]")));
    }
    let m = params.m_f64();
    Ok(params.alpha_pow(i) / ((m - 1.0) * x + 1.0))
}

/// The fixed point of branch 0: root of (m-1)x^2 + x - 1 = 0 in (0,1].
pub fn fixed_point_branch0(params: &ChanParams) -> f64 {
    let m = params.m_f64();
    (-1.0 + (4.0 * m - 3.0).sqrt()) / (2.0 * (m - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32) -> ChanParams {
        ChanParams::new(m).unwrap()
    }

    fn rat(n: u64, d: u64) -> UnitRational {
        UnitRational::new(BigUint::from(n), BigUint::from(d)).unwrap()
    }

    #[test]
    fn branch_index_examples() {
        assert_eq!(branch_index(0.3, &p(2)).unwrap(), 1);
        assert_eq!(branch_index(1.0 / 9.0, &p(3)).unwrap(), 2);
        assert_eq!(branch_index(1.0, &p(2)).unwrap(), 0);
        assert!(matches!(branch_index(0.0, &p(2)), Err(Error::TerminatedOrbit)));
        assert!(branch_index(1.5, &p(2)).is_err());
        assert!(branch_index(-0.1, &p(2)).is_err());
    }

    #[test]
    fn tau_step_examples() {
        assert!((tau_step(0.75, &p(2)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tau_step(0.5, &p(2)).unwrap(), 0.0);
        assert!((tau_step(0.5, &p(3)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tau_step(0.0, &p(2)).unwrap(), 0.0);
        assert!(tau_step(1.5, &p(2)).is_err());
    }

    #[test]
    fn expand_terminating_orbit() {
        // 7/10 -> 3/7 -> 1/6 -> 1/2 -> 0 under m=2
        let seq = expand(0.7, 10, &p(2)).unwrap();
        // 0.7 is not exactly 7/10 in binary, so the f64 orbit shadows the
        // rational one only for the first few digits
        assert_eq!(&seq.digits[..3], &[0, 1, 2]);

        let exact = expand_rational(&rat(7, 10), 10, &p(2)).unwrap();
        assert_eq!(exact.digits, vec![0, 1, 2, 1]);
        assert!(exact.terminated);
        assert_eq!(exact.reliable_count, 4);
    }

    #[test]
    fn expand_half_terminates() {
        let seq = expand(0.5, 5, &p(2)).unwrap();
        assert_eq!(seq.digits, vec![1]);
        assert!(seq.terminated);
    }

    #[test]
    fn expand_fixed_point_m3() {
        let seq = expand(0.5, 4, &p(3)).unwrap();
        assert_eq!(seq.digits, vec![0, 0, 0, 0]);
        assert!(!seq.terminated);
    }

    #[test]
    fn expand_rational_edge_cases() {
        let zero = expand_rational(&rat(0, 1), 1, &p(2)).unwrap();
        assert!(zero.digits.is_empty());
        assert!(zero.terminated);

        let third = expand_rational(&rat(1, 3), 3, &p(3)).unwrap();
        assert_eq!(third.digits, vec![1]);
        assert!(third.terminated);
    }

    #[test]
    fn evaluate_examples() {
        assert!((evaluate_cf(&[1], &p(2)).unwrap() - 0.5).abs() < 1e-15);
        let x = evaluate_cf_rational(&[0, 1, 2, 1], &p(2)).unwrap();
        assert_eq!(x, rat(7, 10));
        assert!(evaluate_cf(&[], &p(2)).is_err());

        let zeros = vec![0u32; 30];
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((evaluate_cf(&zeros, &p(2)).unwrap() - golden).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_values() {
        assert!((fixed_point_branch0(&p(2)) - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((fixed_point_branch0(&p(3)) - 0.5).abs() < 1e-15);
        assert!((fixed_point_branch0(&p(5)) - (17f64.sqrt() - 1.0) / 8.0).abs() < 1e-15);
        for m in 2..=10 {
            let params = p(m);
            let fp = fixed_point_branch0(&params);
            assert!((tau_step(fp, &params).unwrap() - fp).abs() < 1e-13);
        }
    }

    #[test]
    fn orbit_identity_exact() {
        // tau^n(x) = m^-a_{n+1} / (1 + (m-1) tau^{n+1}(x)) exactly on rationals
        for m in [2u32, 3] {
            let params = p(m);
            let mut x = rat(179, 683);
            for _ in 0..12 {
                if x.is_zero() {
                    break;
                }
                let (a, next) = tau_step_rational(&x, &params).unwrap();
                let m_pow = BigRational::new(
                    num_bigint::BigInt::one(),
                    num_bigint::BigInt::from(m).pow(a),
                );
                let mm1 = BigRational::from_integer(num_bigint::BigInt::from(m - 1));
                let rhs = m_pow / (BigRational::one() + mm1 * next.as_ratio());
                assert_eq!(x.as_ratio(), &rhs);
                x = next;
            }
        }
    }

    #[test]
    fn exact_and_validated_agree() {
        let params = p(2);
        for &x in &[0.37, 0.611328125, 0.9013671875, 0.123456789] {
            let v = expand(x, 25, &params).unwrap();
            let e = expand_rational(&UnitRational::from_f64(x).unwrap(), 25, &params).unwrap();
            let k = v.reliable_count.min(e.digits.len());
            assert_eq!(&v.digits[..k], &e.digits[..k]);
        }
    }
}
