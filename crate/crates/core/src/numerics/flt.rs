//! Working-precision binary floats.
//!
//! `Flt` is `±mag · 2^exp` with an unbounded magnitude and an `i64` exponent.
//! Every operation takes the target precision in bits; results are rounded to
//! nearest at that precision. The transcendental kernels are accurate to a few
//! ulps and keep relative accuracy for tiny arguments, which is what the
//! shifted-coordinate evaluations near seams and petals rely on.

use std::cmp::Ordering;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

/// `top()` of zero: below every representable magnitude, far from `i64` overflow.
const ZERO_TOP: i64 = -(1 << 60);

/// Extra bits carried inside kernels.
const GUARD: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flt {
    neg: bool,
    mag: BigUint,
    exp: i64,
}

fn bitlen(m: &BigUint) -> i64 {
    m.bits() as i64
}

impl Flt {
    pub fn zero() -> Self {
        Flt { neg: false, mag: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Flt::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        Flt { neg: v < 0, mag: BigUint::from(v.unsigned_abs()), exp: 0 }
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Flt { neg: v.sign() == Sign::Minus, mag: v.magnitude().clone(), exp: 0 }
    }

    /// Exact `m · 2^e`.
    pub fn from_parts(m: BigInt, e: i64) -> Self {
        Flt { neg: m.sign() == Sign::Minus, mag: m.magnitude().clone(), exp: e }
    }

    /// Parse a plain decimal such as `-12.0625` or `1.5e-3`, rounded to `prec` bits.
    pub fn parse_decimal(s: &str, prec: u32) -> Option<Self> {
        let s = s.trim();
        let (mant, exp10) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        let digits: String = format!("{int}{frac}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let m: BigInt = digits.parse().ok()?;
        let e10 = exp10 - frac.len() as i64;
        let ten = BigInt::from(10u32);
        let v = if e10 >= 0 {
            Flt::from_bigint(&(m * ten.pow(e10 as u32))).round(prec)
        } else {
            let d = Flt::from_bigint(&ten.pow((-e10) as u32));
            Flt::from_bigint(&m).div(&d, prec)
        };
        Some(if neg { v.neg() } else { v })
    }

    /// Exact conversion; panics on non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Flt::zero();
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let be = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if be == 0 { (frac, -1074) } else { (frac | (1u64 << 52), be - 1075) };
        Flt { neg, mag: BigUint::from(m), exp: e }
    }

    /// Rational `p/q` rounded to `prec` bits.
    pub fn ratio(p: i64, q: i64, prec: u32) -> Self {
        Flt::from_i64(p).div(&Flt::from_i64(q), prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn is_neg(&self) -> bool {
        self.neg && !self.is_zero()
    }

    pub fn mantissa(&self) -> BigInt {
        let m = BigInt::from_biguint(Sign::Plus, self.mag.clone());
        if self.neg { -m } else { m }
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Position of the leading bit: `|x| ∈ [2^(top-1), 2^top)`; very negative for zero.
    pub fn top(&self) -> i64 {
        if self.mag.is_zero() {
            return ZERO_TOP;
        }
        self.exp + bitlen(&self.mag)
    }

    pub fn neg(&self) -> Self {
        Flt { neg: !self.neg, mag: self.mag.clone(), exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Flt { neg: false, mag: self.mag.clone(), exp: self.exp }
    }

    /// Multiply by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        Flt { neg: self.neg, mag: self.mag.clone(), exp: self.exp + k }
    }

    pub fn round(&self, prec: u32) -> Self {
        let b = bitlen(&self.mag);
        let p = prec.max(2) as i64;
        if b <= p {
            return self.clone();
        }
        let sh = (b - p) as u64;
        let half = BigUint::one() << (sh - 1);
        let mut mag = (&self.mag + half) >> sh;
        let mut exp = self.exp + sh as i64;
        if bitlen(&mag) > p {
            mag >>= 1u32;
            exp += 1;
        }
        Flt { neg: self.neg, mag, exp }
    }

    pub fn add(&self, o: &Flt, prec: u32) -> Self {
        if self.is_zero() {
            return o.round(prec);
        }
        if o.is_zero() {
            return self.round(prec);
        }
        let lim = prec as i64 + 4;
        // Clip far-below bits of either operand into a sticky unit so alignment stays cheap.
        let floor = self.top().max(o.top()) - lim - 2;
        let (a, b) = (self.clip_below(floor), o.clip_below(floor));
        let e = a.exp.min(b.exp);
        let ma = BigInt::from_biguint(if a.neg { Sign::Minus } else { Sign::Plus }, a.mag << ((a.exp - e) as u64));
        let mb = BigInt::from_biguint(if b.neg { Sign::Minus } else { Sign::Plus }, b.mag << ((b.exp - e) as u64));
        Flt::from_parts(ma + mb, e).round(prec)
    }

    /// Drop bits strictly below `2^floor` (sticky bit kept so rounding stays honest).
    fn clip_below(&self, floor: i64) -> Flt {
        if self.exp >= floor || self.is_zero() {
            return self.clone();
        }
        let sh = (floor - self.exp) as u64;
        if sh as i64 >= bitlen(&self.mag) {
            // Entire value below the floor: keep a sticky unit.
            return Flt { neg: self.neg, mag: BigUint::one(), exp: floor - 1 };
        }
        let lost = !(&self.mag % (BigUint::one() << sh)).is_zero();
        let mut mag = &self.mag >> sh;
        mag <<= 1u32;
        if lost {
            mag += 1u32;
        }
        Flt { neg: self.neg, mag, exp: floor - 1 }
    }

    pub fn sub(&self, o: &Flt, prec: u32) -> Self {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &Flt, prec: u32) -> Self {
        Flt { neg: self.neg != o.neg, mag: &self.mag * &o.mag, exp: self.exp + o.exp }.round(prec)
    }

    pub fn mul_i64(&self, k: i64, prec: u32) -> Self {
        self.mul(&Flt::from_i64(k), prec)
    }

    pub fn div(&self, o: &Flt, prec: u32) -> Self {
        assert!(!o.is_zero(), "Flt division by zero");
        if self.is_zero() {
            return Flt::zero();
        }
        let s = (prec as i64 + 2 + bitlen(&o.mag) - bitlen(&self.mag)).max(0) as u64;
        let num = &self.mag << s;
        let (q, r) = (&num / &o.mag, &num % &o.mag);
        // Sticky bit for correct rounding.
        let mut q = q << 1u32;
        if !r.is_zero() {
            q += 1u32;
        }
        Flt { neg: self.neg != o.neg, mag: q, exp: self.exp - s as i64 - o.exp - 1 }.round(prec)
    }

    pub fn div_i64(&self, k: i64, prec: u32) -> Self {
        self.div(&Flt::from_i64(k), prec)
    }

    pub fn sqrt(&self, prec: u32) -> Self {
        assert!(!self.is_neg(), "sqrt of negative");
        if self.is_zero() {
            return Flt::zero();
        }
        let want = 2 * (prec as i64 + 2);
        let mut sh = (want - bitlen(&self.mag)).max(0);
        if (self.exp - sh) % 2 != 0 {
            sh += 1;
        }
        let m = &self.mag << (sh as u64);
        let r = m.sqrt();
        Flt { neg: false, mag: r, exp: (self.exp - sh) / 2 }.round(prec)
    }

    pub fn cmp_abs(&self, o: &Flt) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (self.top(), o.top());
        if ta != tb {
            return ta.cmp(&tb);
        }
        let e = self.exp.min(o.exp);
        let a = &self.mag << ((self.exp - e) as u64);
        let b = &o.mag << ((o.exp - e) as u64);
        a.cmp(&b)
    }

    pub fn sign(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(60);
        let m = r.mag.to_u64().unwrap_or(u64::MAX) as f64;
        let e = r.exp;
        let v = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            m * 2f64.powi((e / 2) as i32) * 2f64.powi((e - e / 2) as i32)
        };
        if self.neg { -v } else { v }
    }

    /// Nearest integer (ties away from zero).
    pub fn round_int(&self) -> BigInt {
        if self.exp >= 0 {
            return self.mantissa() << (self.exp as u64);
        }
        let sh = (-self.exp) as u64;
        let half = BigUint::one() << (sh - 1);
        let q = (&self.mag + half) >> sh;
        let v = BigInt::from_biguint(Sign::Plus, q);
        if self.neg { -v } else { v }
    }

    /// Largest integer `≤ self`.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            return self.mantissa() << (self.exp as u64);
        }
        self.mantissa() >> ((-self.exp) as u64)
    }
}

// ---------------------------------------------------------------- constants

struct ConstCache {
    prec: u32,
    value: Flt,
}

static PI: Mutex<Option<ConstCache>> = Mutex::new(None);
static LN2: Mutex<Option<ConstCache>> = Mutex::new(None);

fn cached(slot: &Mutex<Option<ConstCache>>, prec: u32, f: fn(u32) -> Flt) -> Flt {
    let mut g = slot.lock().expect("constant cache poisoned");
    if let Some(c) = g.as_ref() {
        if c.prec >= prec {
            return c.value.round(prec);
        }
    }
    let p = prec.max(512).next_power_of_two();
    let v = f(p);
    *g = Some(ConstCache { prec: p, value: v.clone() });
    v.round(prec)
}

/// `Σ (-1)^k / ((2k+1) x^(2k+1))` in fixed point with `w` fraction bits.
fn atan_inv_fixed(x: u64, w: u64, alternate: bool) -> BigInt {
    let one = BigInt::one() << w;
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut pw = &one / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !pw.is_zero() {
        let term = &pw / BigInt::from(2 * k + 1);
        if alternate && k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        pw = &pw / &x2;
        k += 1;
    }
    sum
}

fn compute_pi(prec: u32) -> Flt {
    let w = prec as u64 + 32;
    let v = atan_inv_fixed(5, w, true) * 16 - atan_inv_fixed(239, w, true) * 4;
    Flt::from_parts(v, -(w as i64)).round(prec)
}

fn compute_ln2(prec: u32) -> Flt {
    let w = prec as u64 + 32;
    let v = atan_inv_fixed(3, w, false) * 2;
    Flt::from_parts(v, -(w as i64)).round(prec)
}

pub fn pi(prec: u32) -> Flt {
    cached(&PI, prec, compute_pi)
}

pub fn ln2(prec: u32) -> Flt {
    cached(&LN2, prec, compute_ln2)
}

// ---------------------------------------------------------------- kernels

/// Number of argument halvings used by the exp/sin families.
fn halvings(prec: u32) -> u32 {
    ((prec as f64).sqrt() / 2.0).ceil() as u32
}

/// `e^x - 1`, relative accuracy preserved for tiny `x`.
pub fn expm1(x: &Flt, prec: u32) -> Flt {
    if x.is_zero() {
        return Flt::zero();
    }
    if x.top() > 0 {
        // |x| ≥ 1/2 (approximately): no cancellation to protect.
        return exp(x, prec + 8).sub(&Flt::one(), prec);
    }
    let s = halvings(prec) as i64;
    // Halve until |y| < 2^-s.
    let shift = (x.top() + s).max(0);
    let wp = prec + GUARD + shift as u32;
    let y = x.ldexp(-shift);
    let mut sum = y.clone();
    let mut term = y.clone();
    let mut k = 1i64;
    let stop = y.top() - wp as i64 - 2;
    loop {
        k += 1;
        term = term.mul(&y, wp).div_i64(k, wp);
        if term.is_zero() || term.top() < stop {
            break;
        }
        sum = sum.add(&term, wp);
    }
    for _ in 0..shift {
        // expm1(2y) = expm1(y) (expm1(y) + 2)
        let t = sum.add(&Flt::from_i64(2), wp);
        sum = sum.mul(&t, wp);
    }
    sum.round(prec)
}

pub fn exp(x: &Flt, prec: u32) -> Flt {
    if x.is_zero() {
        return Flt::one();
    }
    if x.top() <= -1 {
        return Flt::one().add(&expm1(x, prec + 4), prec);
    }
    let xf = x.to_f64();
    assert!(xf.abs() < 4.0e18, "exp argument out of range");
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let kb = 64 - k.unsigned_abs().leading_zeros();
    let wp = prec + GUARD + kb + x.top().max(0) as u32;
    let r = x.sub(&ln2(wp).mul_i64(k, wp), wp);
    Flt::one().add(&expm1(&r, wp), wp).ldexp(k).round(prec)
}

/// `2^x`.
pub fn exp2(x: &Flt, prec: u32) -> Flt {
    let wp = prec + GUARD;
    let k = x.floor_int();
    let kk = k.to_i64().expect("exp2 exponent out of range");
    let f = x.sub(&Flt::from_bigint(&k), wp + x.top().max(0) as u32);
    exp(&f.mul(&ln2(wp), wp), prec).ldexp(kk)
}

/// `atanh(t) = t + t³/3 + …` for small `|t|`.
fn atanh_series(t: &Flt, wp: u32) -> Flt {
    let t2 = t.mul(t, wp);
    let mut pw = t.clone();
    let mut sum = t.clone();
    let stop = t.top() - wp as i64 - 2;
    let mut k = 1i64;
    loop {
        pw = pw.mul(&t2, wp);
        k += 2;
        let term = pw.div_i64(k, wp);
        if term.is_zero() || term.top() < stop {
            break;
        }
        sum = sum.add(&term, wp);
    }
    sum
}

/// Natural logarithm of a positive value.
pub fn ln(x: &Flt, prec: u32) -> Flt {
    assert!(x.sign() > 0, "ln of non-positive value");
    let wp = prec + GUARD;
    // x = f · 2^k with f ∈ [1/√2, √2)
    let mut k = x.top();
    let mut f = x.ldexp(-k); // [1/2, 1)
    if f.cmp_abs(&Flt::ratio(181, 256, 16)) == Ordering::Less {
        f = f.ldexp(1);
        k -= 1;
    }
    let num = f.sub(&Flt::one(), wp);
    let den = f.add(&Flt::one(), wp);
    let lf = if num.is_zero() { Flt::zero() } else { atanh_series(&num.div(&den, wp), wp).ldexp(1) };
    if k == 0 {
        return lf.round(prec);
    }
    let kb = 64 - k.unsigned_abs().leading_zeros();
    let wk = wp + kb;
    ln2(wk).mul_i64(k, wk).add(&lf, prec)
}

/// `ln(1 + x)`, relative accuracy preserved for tiny `x`.
pub fn log1p(x: &Flt, prec: u32) -> Flt {
    if x.is_zero() {
        return Flt::zero();
    }
    if x.top() <= -2 {
        let wp = prec + GUARD;
        let t = x.div(&x.add(&Flt::from_i64(2), wp), wp);
        return atanh_series(&t, wp).ldexp(1).round(prec);
    }
    ln(&Flt::one().add(x, prec + GUARD + 8), prec)
}

pub fn log2(x: &Flt, prec: u32) -> Flt {
    let wp = prec + GUARD;
    ln(x, wp).div(&ln2(wp), prec)
}

/// `(sin 2πt, cos 2πt)` for an angle given in turns.
pub fn sincos_turns(t: &Flt, prec: u32) -> (Flt, Flt) {
    if t.is_zero() {
        return (Flt::zero(), Flt::one());
    }
    let wp = prec + GUARD;
    // Reduce to f ∈ [-1/8, 1/8] turns plus a quadrant.
    let q4 = t.ldexp(2).round_int();
    let quad = q4.mod_floor_4();
    let f = t.sub(&Flt::from_bigint(&q4).ldexp(-2), wp + t.top().max(0) as u32);
    let (s, c) = sincos_small(&f, wp);
    let (s, c) = match quad {
        0 => (s, c),
        1 => (c, s.neg()),
        2 => (s.neg(), c.neg()),
        _ => (c.neg(), s),
    };
    (s.round(prec), c.round(prec))
}

trait Mod4 {
    fn mod_floor_4(&self) -> u8;
}

impl Mod4 for BigInt {
    fn mod_floor_4(&self) -> u8 {
        let r = self % BigInt::from(4);
        let r = if r.sign() == Sign::Minus { r + 4 } else { r };
        r.to_u8().unwrap_or(0)
    }
}

/// sin/cos of `2πf` for `|f| ≤ 1/8`.
fn sincos_small(f: &Flt, wp: u32) -> (Flt, Flt) {
    if f.is_zero() {
        return (Flt::zero(), Flt::one());
    }
    let s = halvings(wp) as i64;
    let x = pi(wp + 8).ldexp(1).mul(f, wp);
    let shift = (x.top() + s).max(0);
    let wq = wp + shift as u32 + 4;
    let y = x.ldexp(-shift);
    let y2 = y.mul(&y, wq);
    // sin series
    let mut sn = y.clone();
    let mut term = y.clone();
    let mut k = 1i64;
    let stop = y.top() - wq as i64 - 2;
    loop {
        term = term.mul(&y2, wq).div_i64((k + 1) * (k + 2), wq).neg();
        k += 2;
        if term.is_zero() || term.top() < stop {
            break;
        }
        sn = sn.add(&term, wq);
    }
    // 1 - cos series: y²/2 - y⁴/24 + …
    let mut vc = y2.ldexp(-1);
    let mut term = vc.clone();
    let mut k = 2i64;
    let stop = vc.top() - wq as i64 - 2;
    loop {
        term = term.mul(&y2, wq).div_i64((k + 1) * (k + 2), wq).neg();
        k += 2;
        if term.is_zero() || term.top() < stop {
            break;
        }
        vc = vc.add(&term, wq);
    }
    // Double-angle back up: sin 2a = 2 sin a cos a, 1 - cos 2a = 2 sin² a.
    for _ in 0..shift {
        let c = Flt::one().sub(&vc, wq);
        let ns = sn.mul(&c, wq).ldexp(1);
        vc = sn.mul(&sn, wq).ldexp(1);
        sn = ns;
    }
    (sn, Flt::one().sub(&vc, wq))
}

/// `cos(2πt) - 1` without cancellation for small `t`.
pub fn cosm1_turns(t: &Flt, prec: u32) -> Flt {
    let (s, _) = sincos_turns(&t.ldexp(-1), prec + 4);
    s.mul(&s, prec + 4).ldexp(1).neg().round(prec)
}

/// `atan(t)` for `0 ≤ t ≤ 1`.
fn atan_unit(t: &Flt, wp: u32) -> Flt {
    let mut t = t.clone();
    let mut scale = 0i64;
    for _ in 0..3 {
        if t.is_zero() || t.top() < -8 {
            break;
        }
        let r = Flt::one().add(&t.mul(&t, wp), wp).sqrt(wp);
        t = t.div(&Flt::one().add(&r, wp), wp);
        scale += 1;
    }
    let t2 = t.mul(&t, wp);
    let mut sum = t.clone();
    let mut pw = t.clone();
    let stop = t.top() - wp as i64 - 2;
    let mut k = 1i64;
    let mut sgn = 1i64;
    loop {
        pw = pw.mul(&t2, wp);
        k += 2;
        sgn = -sgn;
        let term = pw.div_i64(k * sgn, wp);
        if term.is_zero() || term.top() < stop {
            break;
        }
        sum = sum.add(&term, wp);
    }
    sum.ldexp(scale)
}

/// `atan2(y, x)` in turns, in `(-1/2, 1/2]`.
pub fn atan2_turns(y: &Flt, x: &Flt, prec: u32) -> Flt {
    if y.is_zero() && x.is_zero() {
        return Flt::zero();
    }
    let wp = prec + GUARD;
    let two_pi = pi(wp).ldexp(1);
    let (ax, ay) = (x.abs(), y.abs());
    let base = if ay.cmp_abs(&ax) != Ordering::Greater {
        if ay.is_zero() { Flt::zero() } else { atan_unit(&ay.div(&ax, wp), wp).div(&two_pi, wp) }
    } else if ax.is_zero() {
        Flt::ratio(1, 4, wp)
    } else {
        Flt::ratio(1, 4, wp).sub(&atan_unit(&ax.div(&ay, wp), wp).div(&two_pi, wp), wp)
    };
    let a = if x.is_neg() { Flt::ratio(1, 2, wp).sub(&base, wp) } else { base };
    let a = if y.is_neg() { a.neg() } else { a };
    a.round(prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Flt, b: f64, rel: f64) -> bool {
        let x = a.to_f64();
        (x - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn constants_match_f64() {
        assert!(close(&pi(200), std::f64::consts::PI, 1e-15));
        assert!(close(&ln2(200), std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn exp_ln_inverse() {
        let x = Flt::ratio(7, 3, 200);
        let y = ln(&exp(&x, 200), 200);
        assert!(y.sub(&x, 200).abs().top() < -190);
    }

    #[test]
    fn tiny_arguments_keep_relative_accuracy() {
        let x = Flt::one().ldexp(-900);
        let e = expm1(&x, 128);
        assert!(e.sub(&x, 128).abs().top() < -900 - 120);
        let l = log1p(&x, 128);
        assert!(l.sub(&x, 128).abs().top() < -900 - 120);
        let (s, _) = sincos_turns(&x, 128);
        let want = pi(140).ldexp(1).mul(&x, 140);
        assert!(s.sub(&want, 128).abs().top() < -900 + 3 - 125);
    }

    #[test]
    fn atan2_quadrants() {
        let p = 100;
        let q = |y: f64, x: f64| atan2_turns(&Flt::from_f64(y), &Flt::from_f64(x), p).to_f64();
        assert!((q(1.0, 1.0) - 0.125).abs() < 1e-15);
        assert!((q(1.0, -1.0) - 0.375).abs() < 1e-15);
        assert!((q(-1.0, -1.0) + 0.375).abs() < 1e-15);
        assert!((q(0.0, -1.0) - 0.5).abs() < 1e-15);
        assert!((q(-2.0, 0.0) + 0.25).abs() < 1e-15);
    }
}
