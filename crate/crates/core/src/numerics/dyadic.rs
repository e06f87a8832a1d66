//! Reals with an arbitrary-size binary exponent.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::flt::{self, Flt};
use super::rho::Rho;
use crate::error::{Error, Result};

/// Largest exponent bit-length `pow_int` will produce.
pub const EXP_BIT_BUDGET: u64 = 1_000_000;

/// A `BigInt` holding a base-2 exponent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigExp(pub BigInt);

impl BigExp {
    pub fn new(v: impl Into<BigInt>) -> Self {
        BigExp(v.into())
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }
}

impl fmt::Display for BigExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `sign · significand · 2^exponent` with `significand ∈ [1, 2)` held to `prec` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicReal {
    sign: i8,
    sig: Flt,
    exp: BigInt,
    prec: u32,
}

impl DyadicReal {
    pub fn zero(prec: u32) -> Self {
        DyadicReal { sign: 0, sig: Flt::zero(), exp: BigInt::zero(), prec }
    }

    /// `2^e`, exact.
    pub fn pow2(e: impl Into<BigInt>, prec: u32) -> Self {
        DyadicReal { sign: 1, sig: Flt::one(), exp: e.into(), prec }
    }

    pub fn from_flt(x: &Flt, prec: u32) -> Self {
        if x.is_zero() {
            return DyadicReal::zero(prec);
        }
        let r = x.abs().round(prec);
        let t = r.top() - 1;
        DyadicReal { sign: x.sign(), sig: r.ldexp(-t), exp: BigInt::from(t), prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        DyadicReal::from_flt(&Flt::from_i64(v), prec)
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        DyadicReal::from_flt(&Flt::from_f64(v), prec)
    }

    /// `2^rho`, rounded to `prec` bits.
    pub fn from_rho(rho: &Rho, prec: u32) -> Self {
        let e = rho.floor();
        let f = rho.frac().to_flt(prec + 16);
        let s = flt::exp2(&f, prec + 8);
        DyadicReal::from_parts(1, s, e, prec)
    }

    /// `sign · s · 2^e` for a positive float `s` of any size.
    pub fn from_parts(sign: i8, s: Flt, e: BigInt, prec: u32) -> Self {
        if sign == 0 || s.is_zero() {
            return DyadicReal::zero(prec);
        }
        let r = s.abs().round(prec);
        let t = r.top() - 1;
        DyadicReal { sign, sig: r.ldexp(-t), exp: e + t, prec }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn exponent(&self) -> &BigInt {
        &self.exp
    }

    pub fn significand(&self) -> &Flt {
        &self.sig
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// True when the value is `±2^e`.
    pub fn is_pow2(&self) -> bool {
        self.sign != 0 && self.sig == Flt::one()
    }

    pub fn neg(&self) -> Self {
        DyadicReal { sign: -self.sign, ..self.clone() }
    }

    pub fn abs(&self) -> Self {
        DyadicReal { sign: self.sign.abs(), ..self.clone() }
    }

    pub fn mul(&self, o: &DyadicReal) -> Self {
        if self.is_zero() || o.is_zero() {
            return DyadicReal::zero(self.prec);
        }
        let s = self.sig.mul(&o.sig, self.prec);
        DyadicReal::from_parts(self.sign * o.sign, s, &self.exp + &o.exp, self.prec)
    }

    pub fn div(&self, o: &DyadicReal) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(DyadicReal::zero(self.prec));
        }
        let s = self.sig.div(&o.sig, self.prec);
        Ok(DyadicReal::from_parts(self.sign * o.sign, s, &self.exp - &o.exp, self.prec))
    }

    /// `self^n` with exact exponent bookkeeping.
    pub fn pow_int(&self, n: &BigInt) -> Result<Self> {
        if n.is_zero() {
            return Ok(DyadicReal::pow2(0, self.prec));
        }
        if self.is_zero() {
            if n.is_negative() {
                return Err(Error::DivisionByZero);
            }
            return Ok(self.clone());
        }
        let est = (&self.exp + BigInt::one()) * n;
        if est.bits() > EXP_BIT_BUDGET {
            return Err(Error::Resource(format!("exponent of power would need {} bits", est.bits())));
        }
        let wp = self.prec + 16 + n.bits() as u32;
        let mut base_s = self.sig.clone();
        let mut base_e = self.exp.clone();
        let mut acc_s = Flt::one();
        let mut acc_e = BigInt::zero();
        let mut k = n.abs();
        while !k.is_zero() {
            if k.bit(0) {
                acc_s = acc_s.mul(&base_s, wp);
                acc_e += &base_e;
                let t = acc_s.top() - 1;
                acc_s = acc_s.ldexp(-t);
                acc_e += t;
            }
            k >>= 1u32;
            if !k.is_zero() {
                base_s = base_s.mul(&base_s, wp);
                base_e = &base_e * 2;
                let t = base_s.top() - 1;
                base_s = base_s.ldexp(-t);
                base_e += t;
            }
        }
        let sign = if self.sign < 0 && n.bit(0) { -1 } else { 1 };
        let r = DyadicReal::from_parts(sign, acc_s, acc_e, self.prec);
        if n.is_negative() {
            DyadicReal::pow2(0, self.prec).div(&r)
        } else {
            Ok(r)
        }
    }

    pub fn add(&self, o: &DyadicReal) -> Self {
        if self.is_zero() {
            return DyadicReal { prec: self.prec, ..o.clone() };
        }
        if o.is_zero() {
            return self.clone();
        }
        let (big, small) = if self.cmp_abs(o) != Ordering::Less { (self, o) } else { (o, self) };
        let gap = &big.exp - &small.exp;
        if gap > BigInt::from(self.prec as i64 + 8) {
            return big.clone();
        }
        let g = gap.to_i64().unwrap();
        let a = if big.sign < 0 { big.sig.neg() } else { big.sig.clone() };
        let b = if small.sign < 0 { small.sig.neg() } else { small.sig.clone() };
        let s = a.add(&b.ldexp(-g), self.prec + 4);
        if s.is_zero() {
            return DyadicReal::zero(self.prec);
        }
        DyadicReal::from_parts(s.sign(), s, big.exp.clone(), self.prec)
    }

    pub fn sub(&self, o: &DyadicReal) -> Self {
        self.add(&o.neg())
    }

    pub fn cmp_abs(&self, o: &DyadicReal) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.exp.cmp(&o.exp).then_with(|| self.sig.cmp_abs(&o.sig)),
        }
    }

    /// `log₂|self|`; the integer part is exact, the fraction carries `frac_bits` bits.
    pub fn log2(&self, frac_bits: u32) -> Result<Rho> {
        if self.is_zero() {
            return Err(Error::Domain("log2 of zero".into()));
        }
        let f = flt::log2(&self.sig, frac_bits + 8);
        Ok(Rho::from_int(self.exp.clone()).add(&Rho::from_flt(&f).round_frac(frac_bits as u64)))
    }

    /// Nearest `f64`, saturating to `±inf` / `0`.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = match self.exp.to_i64() {
            Some(e) if e < 1100 && e > -1200 => self.sig.ldexp(e).to_f64(),
            _ if self.exp.is_positive() => f64::INFINITY,
            _ => 0.0,
        };
        if self.sign < 0 { -v } else { v }
    }

    /// Exact value as a float, if the exponent fits a machine word.
    pub fn to_flt(&self) -> Option<Flt> {
        let e = self.exp.to_i64()?;
        let v = self.sig.ldexp(e);
        Some(if self.sign < 0 { v.neg() } else if self.sign == 0 { Flt::zero() } else { v })
    }

    /// `"m×2^e"` with `m` in `[1, 2)` shown to `digits` decimals.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let m = self.sig.to_f64();
        let s = if self.sign < 0 { "-" } else { "" };
        format!("{s}{m:.digits$}×2^{}", self.exp)
    }

    /// Plain decimal when the magnitude is moderate, else the `m×2^e` form.
    pub fn to_decimal(&self) -> String {
        let v = self.to_f64();
        if v.is_finite() && v != 0.0 && v.abs() < 1e15 && v.abs() > 1e-15 {
            format!("{v}")
        } else {
            self.to_sci(6)
        }
    }
}

impl PartialOrd for DyadicReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for DyadicReal {
    fn cmp(&self, o: &Self) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => self.cmp_abs(o),
            _ => o.cmp_abs(self),
        }
    }
}

impl fmt::Display for DyadicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci(f.precision().unwrap_or(6)))
    }
}

impl Serialize for DyadicReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_sci(12))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two_multiply_exactly() {
        let a = DyadicReal::pow2(6, 128).mul(&DyadicReal::pow2(-8, 128));
        assert_eq!(a, DyadicReal::pow2(-2, 128));
        assert!(a.is_pow2());
    }

    #[test]
    fn pow_int_matches_exponent_recurrence() {
        let half_r4 = DyadicReal::pow2(55, 128);
        let v = DyadicReal::pow2(-128, 128).mul(&half_r4.pow_int(&BigInt::from(16)).unwrap());
        assert_eq!(v, DyadicReal::pow2(752, 128));
    }

    #[test]
    fn exponent_dominates_comparison() {
        let a = DyadicReal::pow2(752, 128);
        let b = DyadicReal::from_parts(1, Flt::from_f64(1.999), BigInt::from(751), 128);
        assert_eq!(a.cmp(&b), Ordering::Greater);
    }

    #[test]
    fn budget_overflow_is_a_resource_error() {
        let a = DyadicReal::pow2(BigInt::one() << 900_000u32, 64);
        assert!(matches!(a.pow_int(&(BigInt::one() << 200_000u32)), Err(Error::Resource(_))));
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(DyadicReal::pow2(1, 64).div(&DyadicReal::zero(64)), Err(Error::DivisionByZero));
    }

    #[test]
    fn sci_rendering() {
        assert_eq!(DyadicReal::from_f64(-3.0, 64).to_sci(2), "-1.50×2^1");
    }
}
