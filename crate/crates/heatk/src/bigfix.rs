//! Wide fixed-point arithmetic on top of `BigInt`.
//!
//! Deep in the Gaussian tail the heat-kernel series has terms of order one
//! cancelling down to values like `exp(-1000)`; no floating-point format of
//! fixed width survives that. A `BigFix` stores `mant * 2^{-frac_bits}`
//! with `frac_bits` chosen per evaluation (roughly `1.5 * |ln result|`
//! plus guard bits), so every addition is exact and the only rounding is
//! one floor per multiplication or division, at absolute size
//! `2^{-frac_bits}` — far below the target magnitude.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{HeatkError, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// A signed fixed-point number `mant * 2^{-frac_bits}`.
///
/// All binary operations require both operands to carry the same
/// `frac_bits`; mixing scales is a programming error and panics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigFix {
    mant: BigInt,
    frac_bits: u32,
}

impl BigFix {
    pub fn zero(frac_bits: u32) -> Self {
        Self { mant: BigInt::zero(), frac_bits }
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Exact conversion from a finite `f64`: the mantissa/exponent
    /// decomposition is shifted into place with no rounding as long as the
    /// value has no set bits below `2^{-frac_bits}` (values this crate
    /// feeds in — small integers, IEEE parameters, times — never do; if
    /// one does, the sub-ulp part is floored away).
    pub fn from_f64(x: f64, frac_bits: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(HeatkError::Numerical(format!("BigFix::from_f64 of non-finite {x}")));
        }
        if x == 0.0 {
            return Ok(Self::zero(frac_bits));
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp_raw = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        // Normal numbers have an implicit leading bit; subnormals do not.
        let (mant_u, exp2) = if exp_raw == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp_raw - 1075)
        };
        let mut m = BigInt::from(mant_u) * sign;
        let shift = exp2 + frac_bits as i64;
        if shift >= 0 {
            m <<= shift as u64;
        } else {
            m >>= (-shift) as u64;
        }
        Ok(Self { mant: m, frac_bits })
    }

    /// Approximate conversion back to `f64`. Values far outside the `f64`
    /// range saturate to `+-inf` / `0` the way the scaling arithmetic does.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (top, exp) = self.top_bits();
        let sign = if self.is_negative() { -1.0 } else { 1.0 };
        sign * top as f64 * 2f64.powi(exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// `ln |self|` in `f64` (the top 64 mantissa bits give ~19 accurate
    /// digits, more than `f64` can hold). Errors on zero.
    pub fn ln_abs(&self) -> Result<f64> {
        if self.is_zero() {
            return Err(HeatkError::Numerical("ln of zero BigFix".into()));
        }
        let (top, exp) = self.top_bits();
        Ok((top as f64).ln() + exp as f64 * LN_2)
    }

    /// Top (up to) 64 magnitude bits plus the binary exponent `e` such that
    /// the value is `+- top * 2^e`.
    fn top_bits(&self) -> (u64, i64) {
        let mag = self.mant.magnitude();
        let nbits = mag.bits();
        if nbits <= 64 {
            let top = mag.to_u64().expect("fits in 64 bits");
            (top, -(self.frac_bits as i64))
        } else {
            let shifted: BigInt = self.mant.abs() >> (nbits - 64);
            let top = shifted.to_u64().expect("shifted to 64 bits");
            (top, nbits as i64 - 64 - self.frac_bits as i64)
        }
    }

    fn check_scale(&self, other: &Self) {
        assert_eq!(
            self.frac_bits, other.frac_bits,
            "BigFix scale mismatch: {} vs {}",
            self.frac_bits, other.frac_bits
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self { mant: &self.mant + &other.mant, frac_bits: self.frac_bits }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self { mant: &self.mant - &other.mant, frac_bits: self.frac_bits }
    }

    pub fn neg(&self) -> Self {
        Self { mant: -&self.mant, frac_bits: self.frac_bits }
    }

    /// Product, floored to the common scale (one rounding of size
    /// `2^{-frac_bits}`).
    pub fn mul(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self { mant: (&self.mant * &other.mant) >> self.frac_bits, frac_bits: self.frac_bits }
    }

    /// Quotient, floored to the common scale. Errors on a zero divisor.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_scale(other);
        if other.is_zero() {
            return Err(HeatkError::Numerical("BigFix division by zero".into()));
        }
        Ok(Self {
            mant: (&self.mant << self.frac_bits) / &other.mant,
            frac_bits: self.frac_bits,
        })
    }

    /// Multiplication by a small exact integer (no rounding).
    pub fn mul_i64(&self, k: i64) -> Self {
        Self { mant: &self.mant * k, frac_bits: self.frac_bits }
    }

    /// `exp(x)` for a finite `f64` argument; see [`BigFix::exp_big`].
    pub fn exp(x: f64, frac_bits: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(HeatkError::Numerical(format!("BigFix::exp of non-finite {x}")));
        }
        Self::exp_big(&Self::from_f64(x, frac_bits)?)
    }

    /// `exp(x)` of a fixed-point argument, evaluated to the full scale.
    ///
    /// The argument is halved (exact binary shifts up to one floor at the
    /// resolution) until it is below 1/2 in magnitude, the Taylor series is
    /// summed in fixed point, and the result is squared back up. Very
    /// negative arguments flush toward the resolution floor, which is the
    /// correct fixed-point answer.
    pub fn exp_big(x: &Self) -> Result<Self> {
        let frac_bits = x.frac_bits;
        let mag = x.to_f64().abs();
        if !mag.is_finite() {
            return Err(HeatkError::Numerical("BigFix::exp_big argument out of range".into()));
        }
        let mut halvings = 0u32;
        let mut m = mag;
        while m > 0.5 {
            m /= 2.0;
            halvings += 1;
        }
        let arg = Self { mant: &x.mant >> halvings, frac_bits };
        let one = Self::from_f64(1.0, frac_bits)?;
        let mut term = one.clone();
        let mut sum = one;
        let mut k: i64 = 1;
        loop {
            term = term.mul(&arg);
            term = Self {
                mant: term.mant / k,
                frac_bits,
            };
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
            k += 1;
            if k > 10_000 {
                return Err(HeatkError::Numerical("BigFix::exp failed to converge".into()));
            }
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        Ok(sum)
    }
}
