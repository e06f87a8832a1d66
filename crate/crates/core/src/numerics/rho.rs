//! Exact dyadic log-magnitudes.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::flt::Flt;

/// A log₂-magnitude `m / 2^s`, kept exact.
///
/// Integer multiples and power-of-two divisions never round, so a power map
/// followed by the matching root returns the original value bit for bit.
/// Division by other integers rounds at a caller-supplied number of fraction bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rho {
    m: BigInt,
    s: u64,
}

impl Rho {
    pub fn zero() -> Self {
        Rho { m: BigInt::zero(), s: 0 }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Rho { m: v.into(), s: 0 }
    }

    pub fn from_parts(m: BigInt, s: u64) -> Self {
        Rho { m, s }.normalized()
    }

    /// Exact value of a float.
    pub fn from_flt(x: &Flt) -> Self {
        let e = x.exponent();
        if e >= 0 {
            Rho::from_int(x.mantissa() << (e as u64))
        } else {
            Rho::from_parts(x.mantissa(), (-e) as u64)
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Rho::from_flt(&Flt::from_f64(x))
    }

    fn normalized(mut self) -> Self {
        if self.m.is_zero() {
            self.s = 0;
            return self;
        }
        let tz = self.m.trailing_zeros().unwrap_or(0).min(self.s);
        if tz > 0 {
            self.m >>= tz;
            self.s -= tz;
        }
        self
    }

    fn aligned(&self, o: &Rho) -> (BigInt, BigInt, u64) {
        let s = self.s.max(o.s);
        (&self.m << (s - self.s), &o.m << (s - o.s), s)
    }

    pub fn add(&self, o: &Rho) -> Rho {
        let (a, b, s) = self.aligned(o);
        Rho::from_parts(a + b, s)
    }

    pub fn sub(&self, o: &Rho) -> Rho {
        let (a, b, s) = self.aligned(o);
        Rho::from_parts(a - b, s)
    }

    pub fn add_int(&self, k: &BigInt) -> Rho {
        self.add(&Rho::from_int(k.clone()))
    }

    pub fn neg(&self) -> Rho {
        Rho { m: -self.m.clone(), s: self.s }
    }

    pub fn mul_int(&self, k: &BigInt) -> Rho {
        Rho::from_parts(&self.m * k, self.s)
    }

    /// Multiply by `2^j` exactly.
    pub fn mul_pow2(&self, j: u64) -> Rho {
        if self.s >= j {
            Rho { m: self.m.clone(), s: self.s - j }
        } else {
            Rho { m: &self.m << (j - self.s), s: 0 }
        }
    }

    /// Divide by `2^j` exactly.
    pub fn div_pow2(&self, j: u64) -> Rho {
        Rho::from_parts(self.m.clone(), self.s + j)
    }

    /// Divide by a positive integer, rounding to nearest with `frac_bits` fraction bits
    /// (never fewer than the value already carries).
    pub fn div_int(&self, d: &BigInt, frac_bits: u64) -> Rho {
        assert!(d.is_positive(), "Rho::div_int needs a positive divisor");
        if let Some(j) = pow2_exponent(d) {
            return self.div_pow2(j);
        }
        let s = frac_bits.max(self.s);
        let num = &self.m << (s - self.s);
        let (q, r) = num.div_mod_floor(d);
        let q = if (r << 1u32) >= *d { q + 1 } else { q };
        Rho::from_parts(q, s)
    }

    pub fn floor(&self) -> BigInt {
        self.m.div_floor(&(BigInt::one() << self.s))
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn frac(&self) -> Rho {
        self.sub(&Rho::from_int(self.floor()))
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn signum(&self) -> i8 {
        match self.m.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn frac_bits(&self) -> u64 {
        self.s
    }

    /// Round to at most `frac_bits` fraction bits.
    pub fn round_frac(&self, frac_bits: u64) -> Rho {
        if self.s <= frac_bits {
            return self.clone();
        }
        let sh = self.s - frac_bits;
        let half = BigInt::one() << (sh - 1);
        Rho::from_parts((&self.m + half) >> sh, frac_bits)
    }

    /// Rounded to `prec` significant bits (values with a large integer part keep all of it).
    pub fn to_flt(&self, prec: u32) -> Flt {
        Flt::from_parts(self.m.clone(), -(self.s as i64)).round(prec)
    }

    /// Nearest `f64`; infinite when out of range.
    pub fn to_f64(&self) -> f64 {
        let bits = self.m.bits() as i64 - self.s as i64;
        if bits > 1030 {
            return if self.m.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        self.to_flt(60).to_f64()
    }

    /// Natural log of a positive value of any size, as `f64`.
    pub fn ln_f64(&self) -> f64 {
        assert!(self.m.is_positive(), "ln of non-positive Rho");
        let b = self.m.bits();
        let keep = 60u64;
        let (lead, dropped) = if b > keep { ((&self.m >> (b - keep)).to_f64().unwrap(), (b - keep) as f64) } else { (self.m.to_f64().unwrap(), 0.0) };
        lead.ln() + (dropped - self.s as f64) * std::f64::consts::LN_2
    }

    /// Decimal rendering with `digits` fraction digits, truncated toward zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.m.is_negative();
        let a = Rho { m: self.m.abs(), s: self.s };
        let int = a.floor();
        let frac = a.frac();
        let scaled = (&frac.m * BigInt::from(10u32).pow(digits as u32)) >> frac.s;
        let sign = if neg && !self.m.is_zero() { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{int}");
        }
        format!("{sign}{int}.{:0>width$}", scaled.to_string(), width = digits)
    }
}

/// `Some(j)` when `d = 2^j`.
pub fn pow2_exponent(d: &BigInt) -> Option<u64> {
    if !d.is_positive() {
        return None;
    }
    let tz = d.trailing_zeros()?;
    if d.bits() == tz + 1 {
        Some(tz)
    } else {
        None
    }
}

impl PartialOrd for Rho {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rho {
    fn cmp(&self, o: &Self) -> Ordering {
        let (a, b, _) = self.aligned(o);
        a.cmp(&b)
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(f.precision().unwrap_or(12)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_division_is_exact() {
        let r = Rho::from_f64(3.5);
        let back = r.div_pow2(40).mul_pow2(40);
        assert_eq!(back, r);
    }

    #[test]
    fn floor_and_frac_of_negative() {
        let r = Rho::from_f64(-2.25);
        assert_eq!(r.floor(), BigInt::from(-3));
        assert_eq!(r.frac(), Rho::from_f64(0.75));
    }

    #[test]
    fn div_int_rounds_to_nearest() {
        let r = Rho::from_int(1).div_int(&BigInt::from(3), 10);
        assert_eq!(r, Rho::from_parts(BigInt::from(341), 10));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rho::from_f64(-1.5).to_decimal(3), "-1.500");
        assert_eq!(Rho::from_f64(84.625).to_decimal(2), "84.62");
    }
}
