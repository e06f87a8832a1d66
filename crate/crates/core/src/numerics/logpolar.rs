//! Complex numbers as `(log₂|z|, arg z)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::angle::Angle;
use super::cplx::Cx;
use super::flt::{self, Flt};
use super::rho::Rho;
use super::NumCtx;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogPolar {
    pub rho: Rho,
    pub theta: Angle,
    zero: bool,
}

/// Outcome of [`lp_add`] beyond the value itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddFlag {
    Normal,
    /// The smaller term was more than `guard` bits below the larger one and dropped.
    Negligible,
    /// The terms cancelled exactly; the value returned is zero.
    Cancellation,
}

impl LogPolar {
    pub fn new(rho: Rho, theta: Angle) -> Self {
        LogPolar { rho, theta, zero: false }
    }

    pub fn zero() -> Self {
        LogPolar { rho: Rho::zero(), theta: Angle::zero(), zero: true }
    }

    pub fn one() -> Self {
        LogPolar::new(Rho::zero(), Angle::zero())
    }

    /// `2^e`.
    pub fn pow2(e: impl Into<BigInt>) -> Self {
        LogPolar::new(Rho::from_int(e), Angle::zero())
    }

    pub fn from_f64(re: f64, im: f64, ctx: &NumCtx) -> Self {
        LogPolar::from_cx(&Cx::from_f64(re, im), ctx)
    }

    pub fn from_cx(c: &Cx, ctx: &NumCtx) -> Self {
        if c.is_zero() {
            return LogPolar::zero();
        }
        let wp = ctx.wp();
        let l2 = flt::log2(&c.abs2(wp + 8), wp + 8).ldexp(-1).round(wp);
        let th = c.arg(wp);
        LogPolar::new(Rho::from_flt(&l2), Angle::from_flt(&th, ctx.p_ang))
    }

    /// `1 + u` for a small complex `u`, without losing `u` to rounding.
    pub fn one_plus(u: &Cx, ctx: &NumCtx) -> Self {
        let wp = ctx.wp() + 8;
        let t = u.re.ldexp(1).add(&u.abs2(wp), wp);
        if t.add(&Flt::one(), wp).sign() <= 0 {
            return LogPolar::from_cx(&Cx::one().add(u, wp), ctx);
        }
        let l2 = flt::log1p(&t, wp).div(&flt::ln2(wp), wp).ldexp(-1);
        let th = flt::atan2_turns(&u.im, &Flt::one().add(&u.re, wp), wp);
        LogPolar::new(Rho::from_flt(&l2.round(ctx.wp())), Angle::from_flt(&th, ctx.p_ang))
    }

    /// `e^w` for a complex `w`.
    pub fn exp_of(w: &Cx, ctx: &NumCtx) -> Self {
        let wp = ctx.wp();
        let l2 = w.re.div(&flt::ln2(wp + 8), wp);
        let th = w.im.div(&flt::pi(wp + 8).ldexp(1), wp);
        LogPolar::new(Rho::from_flt(&l2), Angle::from_flt(&th, ctx.p_ang))
    }

    /// `ln z` as a complex number, with the argument taken in `[-π, π)`.
    pub fn ln_cx(&self, prec: u32) -> Cx {
        let re = self.rho.to_flt(prec + 8).mul(&flt::ln2(prec + 8), prec);
        let im = self.theta.centered().round(prec + 8).mul(&flt::pi(prec + 8).ldexp(1), prec);
        Cx::new(re, im)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn mul(&self, o: &LogPolar) -> LogPolar {
        if self.zero || o.zero {
            return LogPolar::zero();
        }
        LogPolar::new(self.rho.add(&o.rho), self.theta.add(&o.theta))
    }

    pub fn div(&self, o: &LogPolar) -> Result<LogPolar> {
        if o.zero {
            return Err(Error::DivisionByZero);
        }
        if self.zero {
            return Ok(LogPolar::zero());
        }
        Ok(LogPolar::new(self.rho.sub(&o.rho), self.theta.sub(&o.theta)))
    }

    pub fn recip(&self) -> Result<LogPolar> {
        LogPolar::one().div(self)
    }

    pub fn neg(&self) -> LogPolar {
        if self.zero {
            return self.clone();
        }
        LogPolar::new(self.rho.clone(), self.theta.add(&Angle::from_ratio(1, 2, 1)))
    }

    pub fn conj(&self) -> LogPolar {
        if self.zero {
            return self.clone();
        }
        LogPolar::new(self.rho.clone(), self.theta.neg())
    }

    /// Multiply the modulus by `2^s`.
    pub fn scale(&self, s: &Rho) -> LogPolar {
        if self.zero {
            return self.clone();
        }
        LogPolar::new(self.rho.add(s), self.theta.clone())
    }

    /// Rotate by `t` turns.
    pub fn rotate(&self, t: &Angle) -> LogPolar {
        if self.zero {
            return self.clone();
        }
        LogPolar::new(self.rho.clone(), self.theta.add(t))
    }

    /// `z^n` for `n ≥ 0`.
    pub fn pow(&self, n: &BigInt) -> LogPolar {
        assert!(!n.is_negative(), "LogPolar::pow needs n >= 0");
        if n.is_zero() {
            return LogPolar::one();
        }
        if self.zero {
            return self.clone();
        }
        LogPolar::new(self.rho.mul_int(n), self.theta.mul_int(n))
    }

    /// `z^(2^j)`.
    pub fn pow_pow2(&self, j: u64) -> LogPolar {
        if self.zero {
            return self.clone();
        }
        LogPolar::new(self.rho.mul_pow2(j), self.theta.mul_pow2(j))
    }

    /// The `branch`-th `n`-th root: `rho/n`, `(theta + branch)/n`.
    ///
    /// Exact when `n` is a power of two; otherwise the fraction is rounded at
    /// `ctx.p_ang` bits.
    pub fn root(&self, n: &BigInt, branch: &BigInt, ctx: &NumCtx) -> Result<LogPolar> {
        if !n.is_positive() {
            return Err(Error::Contract(format!("root degree must be >= 1, got {n}")));
        }
        if branch.is_negative() || branch >= n {
            return Err(Error::Contract(format!("branch {branch} outside 0..{n}")));
        }
        if self.zero {
            return Ok(self.clone());
        }
        let rho = self.rho.div_int(n, ctx.p_sig as u64 + 64);
        Ok(LogPolar::new(rho, self.theta.root(n, branch, ctx.p_ang)))
    }

    /// Value divided by `2^s`, as a complex float.
    pub fn to_cx_scaled(&self, s: &Rho, prec: u32) -> Cx {
        if self.zero {
            return Cx::zero();
        }
        let d = self.rho.sub(s);
        let m = flt::exp2(&d.to_flt(prec + 16), prec + 4);
        Cx::polar(&m, &self.theta.centered().round(prec + 8), prec)
    }

    pub fn to_cx(&self, prec: u32) -> Cx {
        self.to_cx_scaled(&Rho::zero(), prec)
    }

    /// `(re, im)` as `f64`; only meaningful when `|rho|` is moderate.
    pub fn to_c64(&self) -> (f64, f64) {
        if self.zero {
            return (0.0, 0.0);
        }
        let m = self.rho.to_f64().exp2();
        let t = self.theta.to_f64() * std::f64::consts::TAU;
        (m * t.cos(), m * t.sin())
    }

    /// `log₂|z|` as `f64`.
    pub fn rho_f64(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.rho.to_f64()
        }
    }
}

impl fmt::Display for LogPolar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            return f.write_str("0");
        }
        write!(f, "2^{:.12}·e(2πi·{:.12})", self.rho, self.theta)
    }
}

/// `z + w` in log-polar form.
///
/// The larger term is factored out and `1 + p` is formed for the ratio `p`. When `p`
/// points away from `-1` the log of `|1+p|` comes from `log1p`; when it points towards
/// `-1`, `1 + p = -(e^v - 1)` with `v` built from the exact rho gap and exact angle
/// offset, so near-cancellation keeps full relative accuracy.
pub fn lp_add(z: &LogPolar, w: &LogPolar, ctx: &NumCtx) -> (LogPolar, AddFlag) {
    if z.zero {
        return (w.clone(), AddFlag::Normal);
    }
    if w.zero {
        return (z.clone(), AddFlag::Normal);
    }
    let (a, b) = match z.rho.cmp(&w.rho).then_with(|| w.theta.cmp(&z.theta)) {
        std::cmp::Ordering::Less => (w, z),
        _ => (z, w),
    };
    let d = b.rho.sub(&a.rho);
    if d < Rho::from_int(-(ctx.guard as i64)) {
        return (a.clone(), AddFlag::Negligible);
    }
    let wp = ctx.wp();
    let dphi = b.theta.sub(&a.theta);
    let phi = dphi.centered();
    let df = d.to_flt(wp + 16);
    let toward_minus_one = {
        let pm = df.to_f64().exp2() * (phi.to_f64() * std::f64::consts::TAU).cos();
        pm < -0.5
    };
    let (ln_mod, arg) = if !toward_minus_one {
        let m = flt::exp2(&df, wp);
        let (s, c) = flt::sincos_turns(&phi.round(wp + 8), wp);
        let re = m.mul(&c, wp);
        let im = m.mul(&s, wp);
        let t = re.ldexp(1).add(&m.mul(&m, wp), wp);
        let lm = flt::log1p(&t, wp).ldexp(-1);
        let arg = flt::atan2_turns(&im, &Flt::one().add(&re, wp), wp);
        (lm, arg)
    } else {
        let psi = dphi.add(&Angle::from_ratio(1, 2, 1)).centered();
        if d.is_zero() && psi.is_zero() {
            return (LogPolar::zero(), AddFlag::Cancellation);
        }
        let psi = psi.round(wp + 8);
        let av = df.mul(&flt::ln2(wp + 8), wp);
        let em = flt::expm1(&av, wp);
        let cm = flt::cosm1_turns(&psi, wp);
        let (s, c) = flt::sincos_turns(&psi, wp);
        let re_e = em.mul(&c, wp).add(&cm, wp);
        let im_e = Flt::one().add(&em, wp).mul(&s, wp);
        let e = Cx::new(re_e, im_e);
        let lm = e.ln_abs(wp);
        let arg = flt::atan2_turns(&e.im.neg(), &e.re.neg(), wp);
        (lm, arg)
    };
    let l2 = ln_mod.div(&flt::ln2(wp + 8), wp);
    let rho = a.rho.add(&Rho::from_flt(&l2));
    let cap = ctx.p_ang.max(a.theta.bits());
    let theta = a.theta.add_flt(&arg, cap);
    (LogPolar::new(rho, theta), AddFlag::Normal)
}

/// `z - w`.
pub fn lp_sub(z: &LogPolar, w: &LogPolar, ctx: &NumCtx) -> (LogPolar, AddFlag) {
    lp_add(z, &w.neg(), ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> NumCtx {
        NumCtx::default()
    }

    #[test]
    fn dominance_drops_small_term() {
        let (s, f) = lp_add(&LogPolar::pow2(752), &LogPolar::pow2(4), &ctx());
        assert_eq!(f, AddFlag::Negligible);
        assert_eq!(s, LogPolar::pow2(752));
    }

    #[test]
    fn exact_cancellation() {
        let a = LogPolar::pow2(3);
        let (s, f) = lp_add(&a, &a.neg(), &ctx());
        assert_eq!(f, AddFlag::Cancellation);
        assert!(s.is_zero());
    }

    #[test]
    fn third_turn_sum() {
        let a = LogPolar::pow2(3);
        let b = LogPolar::new(Rho::from_int(3), Angle::from_ratio(1, 3, 4096));
        let (s, f) = lp_add(&a, &b, &ctx());
        assert_eq!(f, AddFlag::Normal);
        assert!((s.rho.to_f64() - 3.0).abs() < 1e-30);
        assert!((s.theta.to_f64() - 1.0 / 6.0).abs() < 1e-30);
    }

    #[test]
    fn root_then_pow_is_identity() {
        let z = LogPolar::new(Rho::from_f64(7.0), Angle::from_ratio(1, 2, 1));
        let r = z.root(&BigInt::from(2), &BigInt::from(1), &ctx()).unwrap();
        assert_eq!(r.rho, Rho::from_f64(3.5));
        assert_eq!(r.theta, Angle::from_ratio(3, 4, 2));
        assert_eq!(r.pow(&BigInt::from(2)), z);
    }

    #[test]
    fn branch_out_of_range() {
        let z = LogPolar::one();
        assert!(matches!(z.root(&BigInt::from(4), &BigInt::from(4), &ctx()), Err(Error::Contract(_))));
    }
}
