//! Small complex helper over [`Flt`], used for local (rescaled) arithmetic.

use super::flt::{self, Flt};

#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: Flt,
    pub im: Flt,
}

impl Cx {
    pub fn new(re: Flt, im: Flt) -> Self {
        Cx { re, im }
    }

    pub fn zero() -> Self {
        Cx::new(Flt::zero(), Flt::zero())
    }

    pub fn one() -> Self {
        Cx::new(Flt::one(), Flt::zero())
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Cx::new(Flt::from_f64(re), Flt::from_f64(im))
    }

    /// `r · e^{2πi t}`.
    pub fn polar(r: &Flt, t: &Flt, prec: u32) -> Self {
        let (s, c) = flt::sincos_turns(t, prec + 4);
        Cx::new(r.mul(&c, prec), r.mul(&s, prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Cx, prec: u32) -> Cx {
        Cx::new(self.re.add(&o.re, prec), self.im.add(&o.im, prec))
    }

    pub fn sub(&self, o: &Cx, prec: u32) -> Cx {
        Cx::new(self.re.sub(&o.re, prec), self.im.sub(&o.im, prec))
    }

    pub fn neg(&self) -> Cx {
        Cx::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, o: &Cx, prec: u32) -> Cx {
        let wp = prec + 8;
        let re = self.re.mul(&o.re, wp).sub(&self.im.mul(&o.im, wp), prec);
        let im = self.re.mul(&o.im, wp).add(&self.im.mul(&o.re, wp), prec);
        Cx::new(re, im)
    }

    pub fn scale(&self, k: &Flt, prec: u32) -> Cx {
        Cx::new(self.re.mul(k, prec), self.im.mul(k, prec))
    }

    pub fn ldexp(&self, k: i64) -> Cx {
        Cx::new(self.re.ldexp(k), self.im.ldexp(k))
    }

    pub fn abs2(&self, prec: u32) -> Flt {
        let wp = prec + 4;
        self.re.mul(&self.re, wp).add(&self.im.mul(&self.im, wp), prec)
    }

    pub fn abs(&self, prec: u32) -> Flt {
        self.abs2(prec + 4).sqrt(prec)
    }

    pub fn conj(&self) -> Cx {
        Cx::new(self.re.clone(), self.im.neg())
    }

    pub fn div(&self, o: &Cx, prec: u32) -> Cx {
        let wp = prec + 8;
        let d = o.abs2(wp);
        self.mul(&o.conj(), wp).scale(&Flt::one().div(&d, wp), prec)
    }

    /// Argument in turns, `(-1/2, 1/2]`.
    pub fn arg(&self, prec: u32) -> Flt {
        flt::atan2_turns(&self.im, &self.re, prec)
    }

    /// `ln|z|` in natural units.
    pub fn ln_abs(&self, prec: u32) -> Flt {
        flt::ln(&self.abs2(prec + 4), prec + 4).ldexp(-1).round(prec)
    }

    /// `ln(1 + z)` with the imaginary part in radians; keeps relative accuracy for tiny `z`.
    pub fn ln1p(&self, prec: u32) -> Cx {
        let wp = prec + 8;
        let t = self.re.ldexp(1).add(&self.abs2(wp), wp);
        let re = flt::log1p(&t, wp).ldexp(-1).round(prec);
        let turns = flt::atan2_turns(&self.im, &Flt::one().add(&self.re, wp), wp);
        Cx::new(re, turns.mul(&flt::pi(wp).ldexp(1), prec))
    }

    /// `e^z - 1` with the imaginary part of `z` in radians.
    pub fn expm1(&self, prec: u32) -> Cx {
        let wp = prec + 8;
        let em = flt::expm1(&self.re, wp);
        let t = self.im.div(&flt::pi(wp).ldexp(1), wp);
        let (s, c) = flt::sincos_turns(&t, wp);
        let cm = flt::cosm1_turns(&t, wp);
        let re = em.mul(&c, wp).add(&cm, prec);
        let im = Flt::one().add(&em, wp).mul(&s, prec);
        Cx::new(re, im)
    }

    /// `(1 + z)^n - 1`.
    pub fn pow1p_m1(&self, n: &Flt, prec: u32) -> Cx {
        let wp = prec + 16;
        self.ln1p(wp).scale(n, wp).expm1(prec)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
