//! Nonnegative dyadic numbers `mant * 2^exp` with directed rounding.
//!
//! This is the arithmetic backing the validated expansion: every orbit point
//! is enclosed in an interval whose endpoints are dyadics, and every inexact
//! operation (reciprocal, division) rounds outward. Multiplication by m^i,
//! subtraction and comparison are exact, so a branch index computed from both
//! endpoints is certified when the two agree.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigUint,
    exp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self { mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Self { mant: BigUint::one(), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// Exact conversion; `x` must be finite and nonnegative.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite() && x >= 0.0);
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        Self { mant: BigUint::from(mant), exp }
    }

    /// Approximate value, rounding roughly to nearest.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        // keep at most 64 mantissa bits for the conversion
        let shift = (bits - 64).max(0);
        let top: BigUint = &self.mant >> (shift as u64);
        let digits = top.to_u64_digits();
        let mant = *digits.last().unwrap_or(&0) as f64;
        // scale by 2^(exp+shift) in chunks so no intermediate over/underflows
        let mut v = mant;
        let mut e = self.exp + shift;
        while e > 0 {
            let s = e.min(1000);
            v *= f64::from_bits(((s as u64 + 1023) << 52) as u64);
            e -= s;
        }
        while e < 0 {
            let s = (-e).min(1000);
            v /= f64::from_bits(((s as u64 + 1023) << 52) as u64);
            e += s;
        }
        v
    }

    pub fn cmp_dyadic(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            (false, false) => {}
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &other.mant << ((other.exp - e) as u64);
        a.cmp(&b)
    }

    /// Exact multiplication by the integer `k^i`.
    pub fn mul_int_pow(&self, k: u32, i: u32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            mant: &self.mant * BigUint::from(k).pow(i),
            exp: self.exp,
        }
    }

    /// Exact subtraction, saturating at zero (callers only subtract when the
    /// true result is nonnegative up to rounding slack).
    pub fn sub_saturating(&self, other: &Self) -> Self {
        if self.cmp_dyadic(other) != Ordering::Greater {
            return Self::zero();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &other.mant << ((other.exp - e) as u64);
        Self { mant: a - b, exp: e }
    }

    /// 1/self rounded in direction `dir` to about `prec` mantissa bits.
    pub fn recip(&self, prec: u64, dir: Round) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        // 1/(mant*2^exp) = (2^k / mant) * 2^(-k-exp)
        let k = self.mant.bits() + prec;
        let num = BigUint::one() << k;
        let (q, r) = num_integer::Integer::div_rem(&num, &self.mant);
        let mant = match dir {
            Round::Down => q,
            Round::Up => {
                if r.is_zero() {
                    q
                } else {
                    q + BigUint::one()
                }
            }
        };
        Self { mant, exp: -(k as i64) - self.exp }
    }

    /// self / d rounded in direction `dir` to about `prec` extra bits.
    pub fn div_u32(&self, d: u32, prec: u64, dir: Round) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if d == 1 {
            return self.clone();
        }
        let num = &self.mant << prec;
        let (q, r) = num_integer::Integer::div_rem(&num, &BigUint::from(d));
        let mant = match dir {
            Round::Down => q,
            Round::Up => {
                if r.is_zero() {
                    q
                } else {
                    q + BigUint::one()
                }
            }
        };
        Self { mant, exp: self.exp - prec as i64 }
    }

    /// Round to at most `prec` mantissa bits in direction `dir`.
    pub fn round(&self, prec: u64, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec {
            return self.clone();
        }
        let shift = bits - prec;
        let q: BigUint = &self.mant >> shift;
        let mant = match dir {
            Round::Down => q,
            Round::Up => {
                let back: BigUint = &q << shift;
                if back == self.mant {
                    q
                } else {
                    q + BigUint::one()
                }
            }
        };
        Self { mant, exp: self.exp + shift as i64 }
    }

    /// Compare self against m^-i, exactly: self <=> m^-i iff self*m^i <=> 1.
    pub fn cmp_alpha_pow(&self, m: u32, i: u32) -> Ordering {
        self.mul_int_pow(m, i).cmp_dyadic(&Dyadic::one())
    }
}

/// Branch index of an exact dyadic in (0,1]: the unique i with
/// m^-(i+1) < x <= m^-i. Comparisons are exact integer arithmetic; the
/// float log only seeds the search.
pub fn branch_index_exact(x: &Dyadic, m: u32) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let approx = x.to_f64();
    let mut i: i64 = if approx > 0.0 {
        (-approx.ln() / f64::from(m).ln()).floor() as i64
    } else {
        // underflowed to 0 in f64; estimate from the exponent
        let log2x = x.exp as f64 + x.mant.bits() as f64;
        (-log2x * 2f64.ln() / f64::from(m).ln()).floor() as i64
    };
    i = i.max(0);
    // adjust until m^-(i+1) < x <= m^-i
    loop {
        let le_upper = x.cmp_alpha_pow(m, i as u32) != Ordering::Greater;
        if !le_upper {
            if i == 0 {
                return None; // x > 1
            }
            i -= 1;
            continue;
        }
        let gt_lower = x.cmp_alpha_pow(m, i as u32 + 1) == Ordering::Greater;
        if !gt_lower {
            i += 1;
            continue;
        }
        return Some(i as u32);
    }
}

/// Interval enclosure of an orbit point, endpoints dyadic, lo <= hi.
#[derive(Debug, Clone)]
pub struct DyadicInterval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl DyadicInterval {
    pub fn point(x: f64) -> Self {
        let d = Dyadic::from_f64(x);
        Self { lo: d.clone(), hi: d }
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.hi.is_zero()
    }
}

/// One certified step of the base-m map on an interval enclosure.
pub enum IntervalStep {
    /// Both endpoints select the same branch; the digit is certified.
    Digit { index: u32, next: DyadicInterval },
    /// The orbit is exactly 0.
    Terminated,
    /// The enclosure straddles a branch boundary (or contains 0 with
    /// positive width); more precision is needed.
    Ambiguous,
}

/// tau_m on a certified branch: tau(x) = ((m^i x)^-1 - 1)/(m-1), decreasing
/// in x, so the image of [lo,hi] is [tau(hi), tau(lo)] with outward rounding.
pub fn interval_tau_step(iv: &DyadicInterval, m: u32, prec: u64) -> IntervalStep {
    if iv.is_exactly_zero() {
        return IntervalStep::Terminated;
    }
    if iv.lo.is_zero() {
        return IntervalStep::Ambiguous; // 0 is in the enclosure but not certain
    }
    let i_from_hi = branch_index_exact(&iv.hi, m);
    let i_from_lo = branch_index_exact(&iv.lo, m);
    let index = match (i_from_hi, i_from_lo) {
        (Some(a), Some(b)) if a == b => a,
        _ => return IntervalStep::Ambiguous,
    };
    let tau_dir = |x: &Dyadic, dir: Round| -> Dyadic {
        let scaled = x.mul_int_pow(m, index);
        let r = scaled.recip(prec, dir);
        let shifted = r.sub_saturating(&Dyadic::one());
        shifted.div_u32(m - 1, prec, dir).round(prec, dir)
    };
    let lo = tau_dir(&iv.hi, Round::Down);
    let hi = tau_dir(&iv.lo, Round::Up);
    IntervalStep::Digit {
        index,
        next: DyadicInterval { lo, hi },
    }
}
