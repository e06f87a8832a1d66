//! Angles as exact binary fractions of a full turn.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::flt::Flt;
use super::rho::pow2_exponent;

/// An angle `num / 2^bits` turns, always reduced into `[0, 1)`.
///
/// `bits` grows as needed: a root by `2^j` adds `j` bits and stays exact, and adding
/// a float widens the fraction up to the caller's cap. Only non-dyadic division and
/// over-long float addends round.
#[derive(Clone, Debug)]
pub struct Angle {
    num: BigUint,
    bits: u64,
}

impl Angle {
    pub fn zero() -> Self {
        Angle { num: BigUint::zero(), bits: 0 }
    }

    /// `p/q` turns, rounded to `bits` fraction bits unless `q` is a power of two.
    pub fn from_ratio(p: i64, q: i64, bits: u64) -> Self {
        assert!(q > 0, "angle denominator must be positive");
        let qb = BigInt::from(q);
        if let Some(j) = pow2_exponent(&qb) {
            return Angle::from_fixed(BigInt::from(p), j);
        }
        let num = (BigInt::from(p) << bits) + (&qb >> 1u32);
        Angle::from_fixed(num.div_floor(&qb), bits)
    }

    /// `v / 2^bits` turns, reduced mod 1.
    pub fn from_fixed(v: BigInt, bits: u64) -> Self {
        let modulus = BigInt::one() << bits;
        let r = v.mod_floor(&modulus);
        Angle { num: r.to_biguint().unwrap(), bits }.normalized()
    }

    /// The float `x` (in turns) reduced mod 1, exact when it fits in `cap` fraction bits.
    pub fn from_flt(x: &Flt, cap: u64) -> Self {
        Angle::zero().add_flt(x, cap)
    }

    pub fn from_f64(x: f64) -> Self {
        Angle::from_flt(&Flt::from_f64(x), 1100)
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.bits = 0;
            return self;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.bits);
        if tz > 0 {
            self.num >>= tz;
            self.bits -= tz;
        }
        self
    }

    fn widened(&self, bits: u64) -> BigUint {
        &self.num << (bits - self.bits)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Angle) -> Angle {
        let b = self.bits.max(o.bits);
        let v = self.widened(b) + o.widened(b);
        Angle::from_fixed(BigInt::from_biguint(Sign::Plus, v), b)
    }

    pub fn sub(&self, o: &Angle) -> Angle {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Angle {
        if self.num.is_zero() {
            return self.clone();
        }
        Angle { num: (BigUint::one() << self.bits) - &self.num, bits: self.bits }
    }

    /// Add `x` turns. Fraction bits beyond `cap` are rounded away.
    pub fn add_flt(&self, x: &Flt, cap: u64) -> Angle {
        if x.is_zero() {
            return self.clone();
        }
        let e = x.exponent();
        if e >= 0 {
            return self.clone();
        }
        let need = (-e) as u64;
        let b = self.bits.max(need.min(cap));
        let fixed = if need <= b {
            x.mantissa() << (b - need)
        } else {
            let sh = need - b;
            let m = x.mantissa();
            let half = BigInt::one() << (sh - 1);
            (m + half) >> sh
        };
        let base = BigInt::from_biguint(Sign::Plus, self.widened(b));
        Angle::from_fixed(base + fixed, b)
    }

    /// Multiply by an integer, mod 1. Exact.
    pub fn mul_int(&self, k: &BigInt) -> Angle {
        let v = BigInt::from_biguint(Sign::Plus, self.num.clone()) * k;
        Angle::from_fixed(v, self.bits)
    }

    /// Multiply by `2^j`, mod 1. Exact.
    pub fn mul_pow2(&self, j: u64) -> Angle {
        if j >= self.bits {
            return Angle::zero();
        }
        Angle::from_fixed(BigInt::from_biguint(Sign::Plus, self.num.clone()) << j, self.bits)
    }

    /// `(self + branch) / n`, the angle of the `branch`-th `n`-th root.
    ///
    /// Exact when `n` is a power of two; otherwise rounded at `cap` bits.
    pub fn root(&self, n: &BigInt, branch: &BigInt, cap: u64) -> Angle {
        let whole = BigInt::from_biguint(Sign::Plus, self.num.clone()) + (branch << self.bits);
        if let Some(j) = pow2_exponent(n) {
            return Angle::from_fixed(whole, self.bits + j);
        }
        let b = cap.max(self.bits);
        let v = whole << (b - self.bits);
        let q = (v + (n >> 1u32)).div_floor(n);
        Angle::from_fixed(q, b)
    }

    /// Round to at most `bits` fraction bits.
    pub fn round_bits(&self, bits: u64) -> Angle {
        if self.bits <= bits {
            return self.clone();
        }
        let sh = self.bits - bits;
        let v = (&self.num + (BigUint::one() << (sh - 1))) >> sh;
        Angle::from_fixed(BigInt::from_biguint(Sign::Plus, v), bits)
    }

    /// Exact value in `[0, 1)`.
    pub fn turns(&self) -> Flt {
        Flt::from_parts(BigInt::from_biguint(Sign::Plus, self.num.clone()), -(self.bits as i64))
    }

    /// Exact representative in `[-1/2, 1/2)`.
    pub fn centered(&self) -> Flt {
        if self.bits == 0 {
            return Flt::zero();
        }
        let half = BigUint::one() << (self.bits - 1);
        let v = BigInt::from_biguint(Sign::Plus, self.num.clone());
        let v = if self.num >= half { v - (BigInt::one() << self.bits) } else { v };
        Flt::from_parts(v, -(self.bits as i64))
    }

    pub fn to_f64(&self) -> f64 {
        self.turns().to_f64()
    }

    /// Fixed-point numerator at exactly `bits` fraction bits (rounded if needed).
    pub fn fixed(&self, bits: u64) -> BigUint {
        if self.bits <= bits {
            self.widened(bits)
        } else {
            let r = self.round_bits(bits);
            if r.bits <= bits {
                r.widened(bits)
            } else {
                BigUint::zero()
            }
        }
    }

    /// Distance to `o` along the circle, in turns, as `f64`.
    pub fn dist_f64(&self, o: &Angle) -> f64 {
        self.sub(o).centered().to_f64().abs()
    }

    pub fn to_u64_fixed(&self, bits: u32) -> u64 {
        self.fixed(bits as u64).to_u64().unwrap_or(0)
    }
}

impl PartialEq for Angle {
    fn eq(&self, o: &Self) -> bool {
        self.bits == o.bits && self.num == o.num
    }
}

impl Eq for Angle {}

impl PartialOrd for Angle {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Angle {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        let b = self.bits.max(o.bits);
        self.widened(b).cmp(&o.widened(b))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(12) as u32;
        let scaled = (&self.num * BigUint::from(10u32).pow(digits)) >> self.bits;
        write!(f, "0.{:0>w$}", scaled.to_string(), w = digits as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_mod_one() {
        let a = Angle::from_ratio(3, 4, 64).add(&Angle::from_ratio(1, 2, 64));
        assert_eq!(a, Angle::from_ratio(1, 4, 64));
    }

    #[test]
    fn pow2_root_is_exact() {
        let a = Angle::from_ratio(1, 3, 256);
        let n = BigInt::from(1u64 << 20);
        let r = a.root(&n, &BigInt::from(12345), 256);
        assert_eq!(r.mul_int(&n), a);
    }

    #[test]
    fn centered_range() {
        assert_eq!(Angle::from_ratio(3, 4, 8).centered().to_f64(), -0.25);
        assert_eq!(Angle::from_ratio(1, 2, 8).centered().to_f64(), -0.5);
        assert_eq!(Angle::from_ratio(1, 4, 8).centered().to_f64(), 0.25);
    }

    #[test]
    fn negative_float_addend_wraps() {
        let a = Angle::zero().add_flt(&Flt::from_f64(-0.125), 64);
        assert_eq!(a, Angle::from_ratio(7, 8, 8));
    }
}
