//! The piecewise model map `h_N`, with the correction map taken to be the identity.
//!
//! The plane is cut into pieces by `|z|`:
//!
//! | piece | radii | map |
//! |---|---|---|
//! | `OriginPoly` | `[0, r_N - 1)` | `q_N(z) = c_N z^{M_N} + r_N z` |
//! | `BumpRegion(N)` | `[r_N - 1, r_N)` | `g_N(z) = c_N z^{M_N} + r_N z η(z)` |
//! | `SeamAnnulus(j)` | `[r_j, r_j e^{π/M_j})` | `S_j(z) = c_j z^{M_j}(z^{M_j} - ζ_j^{M_j}) / r_j^{M_j}` |
//! | `PowerAnnulus(j)` | `[r_{j-1} e^{π/M_{j-1}}, r_j)` | `c_j z^{M_j}` |
//!
//! `S_j` is a holomorphic stand-in for the interpolating map of the construction.
//! It vanishes exactly at `r_j e^{π/(4M_j)} e^{iπ(2m+1)/M_j}` and agrees with the
//! neighbouring power maps up to a bounded factor on both seam circles.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{flt, lp_add, AddFlag, Angle, Cx, DyadicReal, Flt, LogPolar, NumCtx, Rho};
use crate::params::ParamTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PieceId {
    OriginPoly,
    BumpRegion(u32),
    PowerAnnulus(u32),
    SeamAnnulus(u32),
}

impl fmt::Display for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PieceId::OriginPoly => f.write_str("origin"),
            PieceId::BumpRegion(k) => write!(f, "bump({k})"),
            PieceId::PowerAnnulus(j) => write!(f, "power({j})"),
            PieceId::SeamAnnulus(j) => write!(f, "seam({j})"),
        }
    }
}

/// Zeros, critical points and critical values of `q_N`.
#[derive(Clone, Debug)]
pub struct QnLandmarks {
    pub zeros: Vec<LogPolar>,
    pub crit_points: Vec<LogPolar>,
    pub crit_values: Vec<LogPolar>,
    /// `|q_N'|` at every nonzero zero, `r_N (M_N - 1)`.
    pub deriv_at_zero: DyadicReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DilatationSup {
    pub k: u32,
    /// `log₂ sup |μ_k|` over the grid.
    pub log2_sup: f64,
    pub sup: f64,
    pub samples: usize,
    /// Samples dropped because the denominator cancelled.
    pub flagged: usize,
}

#[derive(Debug, PartialEq)]
enum MuSample {
    Zero,
    /// The denominator cancelled.
    Flagged,
    Log2(Rho),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeamMismatch {
    pub j: u32,
    pub inner_max_log2_ratio: f64,
    pub outer_max_log2_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ModelMap {
    pub table: ParamTable,
    pub ctx: NumCtx,
    /// Petal-ball constants.
    pub lambda: f64,
    pub delta: f64,
    /// `log₂ e^{π/4}`, rounded once; `M_j` times the log-offset of `ζ_j`.
    quarter: Rho,
    /// `log₂ e^π`, rounded once; `M_j` times the seam width in rho.
    seam_span: Rho,
}

/// `log₂ b(s)` for the bump `b(x) = exp(1 + 1/(x² - 1))`; `None` where `b = 0`.
fn log2_bump(s: &Flt, prec: u32) -> Option<Flt> {
    if s.sign() <= 0 {
        return Some(Flt::zero());
    }
    let one = Flt::one();
    let d = s.mul(s, prec).sub(&one, prec);
    if d.sign() >= 0 {
        return None;
    }
    let lnb = one.add(&one.div(&d, prec), prec);
    Some(lnb.div(&flt::ln2(prec), prec))
}

/// `log₂ |b'(s)|` for `s ∈ (0, 1)`; `None` where `b' = 0`.
fn log2_bump_slope(s: &Flt, prec: u32) -> Option<Flt> {
    if s.sign() <= 0 {
        return None;
    }
    let lb = log2_bump(s, prec)?;
    let one = Flt::one();
    let q = one.sub(&s.mul(s, prec), prec);
    // |b'| = b · 2s / (1 - s²)².
    let l = flt::log2(&s.ldexp(1), prec).sub(&flt::log2(&q, prec).ldexp(1), prec);
    Some(lb.add(&l, prec))
}

impl ModelMap {
    pub fn new(table: ParamTable, ctx: NumCtx) -> Self {
        let wp = ctx.wp();
        let pi_l2 = flt::pi(wp + 8).div(&flt::ln2(wp + 8), wp);
        ModelMap {
            table,
            ctx,
            lambda: 0.05,
            delta: 0.25,
            quarter: Rho::from_flt(&pi_l2.ldexp(-2)),
            seam_span: Rho::from_flt(&pi_l2),
        }
    }

    pub fn with_petal_constants(mut self, lambda: f64, delta: f64) -> Self {
        self.lambda = lambda;
        self.delta = delta;
        self
    }

    pub fn n(&self) -> u32 {
        self.table.n
    }

    fn e(&self, j: u32) -> Rho {
        Rho::from_int(self.table.e(j).clone())
    }

    fn eps(&self, j: u32) -> Rho {
        Rho::from_int(self.table.eps(j).clone())
    }

    /// `log₂ e^{π/4}` as stored.
    pub fn quarter_log2(&self) -> &Rho {
        &self.quarter
    }

    /// `log₂ (r_j e^{π/M_j})`, the outer seam radius.
    pub fn seam_outer(&self, j: u32) -> Rho {
        self.e(j).add(&self.seam_span.div_pow2(j as u64))
    }

    /// `ζ_j = r_j e^{π/(4M_j)} e^{iπ/M_j}`.
    pub fn zeta(&self, j: u32) -> LogPolar {
        LogPolar::new(self.e(j).add(&self.quarter.div_pow2(j as u64)), Angle::from_fixed(BigInt::one(), j as u64 + 1))
    }

    /// The `m`-th zero of `S_j`, at angle `(2m+1)/(2M_j)` turns.
    pub fn seam_zero(&self, j: u32, m: &BigInt) -> LogPolar {
        let z = self.zeta(j);
        let t = Angle::from_fixed(m * 2 + 1, j as u64 + 1);
        LogPolar::new(z.rho, t)
    }

    /// Lower radius (log₂) of every piece, in increasing order.
    pub fn piece_starts(&self) -> Vec<(PieceId, DyadicReal)> {
        let n = self.n();
        let p = self.ctx.p_sig;
        let mut out = vec![(PieceId::OriginPoly, DyadicReal::zero(p))];
        // r_N - 1 needs e_N + 1 significant bits to differ from r_N.
        let en = self.table.e(n).to_u32().unwrap_or(u32::MAX);
        let bp = if en < 1 << 20 { p.max(en + 2) } else { p };
        let rn = self.table.r(n, bp);
        out.push((PieceId::BumpRegion(n), rn.sub(&DyadicReal::from_i64(1, bp))));
        for j in n..=self.table.jmax() {
            out.push((PieceId::SeamAnnulus(j), self.table.r(j, p)));
            if j < self.table.jmax() {
                let lo = DyadicReal::from_rho(&self.seam_outer(j), p);
                out.push((PieceId::PowerAnnulus(j + 1), lo));
            }
        }
        out
    }

    /// `s = |z| - (r_N - 1)` for `z` just below `r_N`; `None` when `z` is clearly in the origin piece.
    pub fn bump_coordinate(&self, z: &LogPolar) -> Option<Flt> {
        let n = self.n();
        let d = z.rho.sub(&self.e(n));
        let en = self.table.e(n).to_i64()?;
        let wp = self.ctx.wp();
        let df = d.to_flt(wp + 8);
        if df.top() > 0 {
            return None;
        }
        // s = 1 + r_N (2^d - 1).
        let t = flt::expm1(&df.mul(&flt::ln2(wp + 8), wp + 8), wp).ldexp(en);
        let s = Flt::one().add(&t, wp);
        (s.sign() >= 0).then_some(s)
    }

    pub fn piece_of(&self, z: &LogPolar) -> Result<PieceId> {
        let n = self.n();
        if z.is_zero() {
            return Ok(PieceId::OriginPoly);
        }
        if z.rho < self.e(n) {
            return Ok(match self.bump_coordinate(z) {
                Some(_) => PieceId::BumpRegion(n),
                None => PieceId::OriginPoly,
            });
        }
        let top = self.table.jmax();
        let rz = z.rho.floor();
        let mut j = n;
        while j < top && self.table.e(j + 1) <= &rz {
            j += 1;
        }
        if z.rho < self.seam_outer(j) {
            return Ok(PieceId::SeamAnnulus(j));
        }
        if j == top {
            return Err(Error::Domain(format!("log2|z| = {} lies beyond r_{top}", z.rho.to_decimal(6))));
        }
        Ok(PieceId::PowerAnnulus(j + 1))
    }

    /// `h_N(z)` and the piece that produced it.
    pub fn eval_model(&self, z: &LogPolar) -> Result<(LogPolar, PieceId)> {
        let piece = self.piece_of(z)?;
        Ok((self.eval_piece(piece, z)?, piece))
    }

    /// Evaluate one piece's formula at `z`, regardless of where `z` is.
    pub fn eval_piece(&self, piece: PieceId, z: &LogPolar) -> Result<LogPolar> {
        if z.is_zero() {
            return Ok(LogPolar::zero());
        }
        Ok(match piece {
            PieceId::OriginPoly => self.eval_qn(z),
            PieceId::PowerAnnulus(j) => self.eval_power(j, z),
            PieceId::SeamAnnulus(j) => self.eval_seam(j, z).0,
            PieceId::BumpRegion(k) => {
                let s = self.bump_coordinate(z).unwrap_or_else(Flt::zero);
                self.eval_g(k, &s, z)
            }
        })
    }

    /// `c_j z^{M_j}`, exact.
    pub fn eval_power(&self, j: u32, z: &LogPolar) -> LogPolar {
        z.pow_pow2(j as u64).scale(&self.eps(j))
    }

    /// `q_N(z) = c_N z^{M_N} + r_N z`.
    pub fn eval_qn(&self, z: &LogPolar) -> LogPolar {
        let n = self.n();
        let a = self.eval_power(n, z);
        let b = z.scale(&self.e(n));
        lp_add(&a, &b, &self.ctx).0
    }

    /// `S_j(z)` as `A + B` with `A = c_j r_j^{-M_j} z^{2M_j}` and `B = c_j e^{π/4} z^{M_j}`.
    pub fn eval_seam(&self, j: u32, z: &LogPolar) -> (LogPolar, AddFlag) {
        let (a, b) = self.seam_terms(j, z);
        lp_add(&a, &b, &self.ctx)
    }

    fn seam_terms(&self, j: u32, z: &LogPolar) -> (LogPolar, LogPolar) {
        let mj = crate::params::m(j);
        let sa = self.eps(j).sub(&self.e(j).mul_int(&mj));
        let a = z.pow_pow2(j as u64 + 1).scale(&sa);
        let b = z.pow_pow2(j as u64).scale(&self.eps(j).add(&self.quarter));
        (a, b)
    }

    /// `g_k` at `|z| = r_k - 1 + s`, `arg z = θ`.
    ///
    /// Below `s = 0` the bump is `1` and above `s = 1` it is `0`, so the two
    /// neighbouring formulas are reproduced. The offset `s - 1` moves `log₂|z|` by
    /// less than `2^{-e_k}`, far below working precision, so `|z|` is taken as `r_k`.
    pub fn eval_bump_gk(&self, k: u32, s: &Flt, theta: &Angle) -> Result<LogPolar> {
        if k < 5 {
            return Err(Error::Contract(format!("bump interpolation needs k >= 5, got {k}")));
        }
        let z = LogPolar::new(self.e(k), theta.clone());
        Ok(self.eval_g(k, s, &z))
    }

    fn eval_g(&self, k: u32, s: &Flt, z: &LogPolar) -> LogPolar {
        let a = self.eval_power(k, z);
        match log2_bump(s, self.ctx.wp()) {
            None => a,
            Some(lb) => {
                let b = z.scale(&self.e(k).add(&Rho::from_flt(&lb)));
                lp_add(&a, &b, &self.ctx).0
            }
        }
    }

    /// `log₂ |μ_k|` at one point of the bump strip.
    fn log2_mu(&self, k: u32, s: &Flt, theta: &Angle) -> MuSample {
        let wp = self.ctx.wp();
        let z = LogPolar::new(self.e(k), theta.clone());
        let Some(lslope) = log2_bump_slope(s, wp) else {
            return MuSample::Zero;
        };
        let lslope = Rho::from_flt(&lslope);
        let rk = self.e(k);
        // (g_k)_z = M c z^{M-1} + r (η + b'|z|/2), with b' < 0.
        let mj = crate::params::m(k);
        let d1 = z.pow(&(&mj - 1)).scale(&self.eps(k).add_int(&BigInt::from(k)));
        let slope_term = LogPolar::new(lslope.add(&z.rho).add_int(&BigInt::from(-1)), Angle::from_ratio(1, 2, 1));
        let real = match log2_bump(s, wp) {
            Some(lb) => lp_add(&LogPolar::new(Rho::from_flt(&lb), Angle::zero()), &slope_term, &self.ctx),
            None => (slope_term, AddFlag::Normal),
        };
        if real.1 == AddFlag::Cancellation {
            return MuSample::Flagged;
        }
        let d2 = real.0.scale(&rk);
        let (den, flag) = lp_add(&d1, &d2, &self.ctx);
        if flag == AddFlag::Cancellation {
            return MuSample::Flagged;
        }
        // |(g_k)_z̄| = r |b'| |z| / 2.
        let num = rk.add(&lslope).add(&z.rho).add_int(&BigInt::from(-1));
        MuSample::Log2(num.sub(&den.rho))
    }

    /// Supremum of `|μ_k|` on a `(grid + 1) × grid/4` sample of `s ∈ [0, 1]` and `θ`.
    pub fn dilatation_sup(&self, k: u32, grid: u32) -> Result<DilatationSup> {
        if k < 5 {
            return Err(Error::Contract(format!("dilatation needs k >= 5, got {k}")));
        }
        if grid < 64 {
            return Err(Error::Contract(format!("grid must be >= 64, got {grid}")));
        }
        let wp = self.ctx.wp();
        let nth = (grid / 4) as i64;
        let mut best: Option<Rho> = None;
        let mut flagged = 0;
        let mut samples = 0;
        for i in 0..=grid {
            let s = Flt::ratio(i as i64, grid as i64, wp);
            for l in 0..nth {
                // Odd multiples of 1/(2·nth) avoid the axis directions.
                let th = Angle::from_ratio(2 * l + 1, 2 * nth, 64);
                samples += 1;
                match self.log2_mu(k, &s, &th) {
                    MuSample::Zero => {}
                    MuSample::Flagged => flagged += 1,
                    MuSample::Log2(v) => {
                        if best.as_ref().is_none_or(|b| &v > b) {
                            best = Some(v);
                        }
                    }
                }
            }
        }
        let log2_sup = best.map(|b| b.to_f64()).unwrap_or(f64::NEG_INFINITY);
        Ok(DilatationSup { k, log2_sup, sup: log2_sup.exp2(), samples, flagged })
    }

    /// Largest `|log₂|` ratio of `S_j` to the neighbouring power map on both seam circles.
    ///
    /// The ratio depends on `z^{M_j}` only, so one period `θ ∈ [0, 1/M_j)` is sampled.
    pub fn seam_mismatch(&self, j: u32, samples: u32) -> Result<SeamMismatch> {
        if samples < 256 {
            return Err(Error::Contract(format!("samples must be >= 256, got {samples}")));
        }
        if j + 1 > self.table.jmax() {
            return Err(Error::Domain(format!("seam {j} has no outer neighbour in the table")));
        }
        let bits = (samples as u64).next_power_of_two().trailing_zeros() as u64;
        let (mut inner, mut outer) = (0f64, 0f64);
        let ri = self.e(j);
        let ro = self.seam_outer(j);
        for i in 0..samples {
            let th = Angle::from_fixed(BigInt::from(i), bits + j as u64);
            let z = LogPolar::new(ri.clone(), th.clone());
            let r = self.eval_seam(j, &z).0.rho.sub(&self.eval_power(j, &z).rho);
            inner = inner.max(r.to_f64().abs());
            let z = LogPolar::new(ro.clone(), th);
            let r = self.eval_seam(j, &z).0.rho.sub(&self.eval_power(j + 1, &z).rho);
            outer = outer.max(r.to_f64().abs());
        }
        Ok(SeamMismatch { j, inner_max_log2_ratio: inner, outer_max_log2_ratio: outer })
    }

    /// Other pieces whose boundary lies within `2^{-p_sig}` of `|z|`.
    fn straddled(&self, z: &LogPolar, here: PieceId) -> Option<PieceId> {
        let tol = Rho::from_parts(BigInt::one(), self.ctx.p_sig as u64);
        let lo = LogPolar::new(z.rho.sub(&tol), z.theta.clone());
        let hi = LogPolar::new(z.rho.add(&tol), z.theta.clone());
        [lo, hi].iter().filter_map(|w| self.piece_of(w).ok()).find(|p| *p != here)
    }

    /// Derivative of the active piece. In the bump strip this is the `∂/∂z` partial.
    pub fn deriv_model(&self, z: &LogPolar) -> Result<LogPolar> {
        let piece = self.piece_of(z)?;
        if !z.is_zero() {
            if let Some(other) = self.straddled(z, piece) {
                return Err(Error::Ambiguous(piece.to_string(), other.to_string()));
            }
        }
        self.deriv_piece(piece, z)
    }

    pub fn deriv_piece(&self, piece: PieceId, z: &LogPolar) -> Result<LogPolar> {
        let n = self.n();
        Ok(match piece {
            PieceId::OriginPoly => {
                let mn = crate::params::m(n);
                let a = z.pow(&(&mn - 1)).scale(&self.eps(n).add_int(&BigInt::from(n)));
                lp_add(&a, &LogPolar::pow2(self.table.e(n).clone()), &self.ctx).0
            }
            PieceId::PowerAnnulus(j) => {
                if z.is_zero() {
                    return Ok(LogPolar::zero());
                }
                let mj = crate::params::m(j);
                z.pow(&(&mj - 1)).scale(&self.eps(j).add_int(&BigInt::from(j)))
            }
            PieceId::SeamAnnulus(j) => {
                if z.is_zero() {
                    return Ok(LogPolar::zero());
                }
                // S' = (M/z)(2A + B).
                let (a, b) = self.seam_terms(j, z);
                let (s, _) = lp_add(&a.scale(&Rho::from_int(1)), &b, &self.ctx);
                s.div(z)?.scale(&Rho::from_int(j))
            }
            PieceId::BumpRegion(k) => {
                let wp = self.ctx.wp();
                let s = self.bump_coordinate(z).unwrap_or_else(Flt::zero);
                let mj = crate::params::m(k);
                let d1 = z.pow(&(&mj - 1)).scale(&self.eps(k).add_int(&BigInt::from(k)));
                let eta = log2_bump(&s, wp).map(|lb| LogPolar::new(Rho::from_flt(&lb), Angle::zero()));
                let slope = log2_bump_slope(&s, wp).map(|l| {
                    LogPolar::new(Rho::from_flt(&l).add(&z.rho).add_int(&BigInt::from(-1)), Angle::from_ratio(1, 2, 1))
                });
                let real = match (eta, slope) {
                    (Some(a), Some(b)) => lp_add(&a, &b, &self.ctx).0,
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => LogPolar::zero(),
                };
                lp_add(&d1, &real.scale(&self.e(k)), &self.ctx).0
            }
        })
    }

    /// Zeros, critical points and critical values of `q_N`.
    pub fn qn_landmarks(&self) -> Result<QnLandmarks> {
        let n = self.n();
        let mn = crate::params::m(n);
        let d = &mn - 1;
        let half = Angle::from_ratio(1, 2, 1);
        // -r/c and -r/(cM).
        let base = LogPolar::new(self.e(n).sub(&self.eps(n)), half);
        let cbase = base.scale(&Rho::from_int(-(n as i64)));
        let mut zeros = vec![LogPolar::zero()];
        let mut crit_points = Vec::new();
        let mut crit_values = Vec::new();
        let wp = self.ctx.wp();
        let shrink = Rho::from_flt(&flt::log2(&Flt::one().sub(&Flt::one().ldexp(-(n as i64)), wp), wp));
        let mut b = BigInt::from(0);
        while b < d {
            zeros.push(base.root(&d, &b, &self.ctx)?);
            let c = cbase.root(&d, &b, &self.ctx)?;
            // q_N(c) = c · r_N (1 - 1/M_N).
            crit_values.push(c.scale(&self.e(n).add(&shrink)));
            crit_points.push(c);
            b += 1;
        }
        let deriv_at_zero = self.table.r(n, self.ctx.p_sig).mul(&DyadicReal::from_i64(mn.to_i64().unwrap_or(i64::MAX) - 1, self.ctx.p_sig));
        Ok(QnLandmarks { zeros, crit_points, crit_values, deriv_at_zero })
    }

    /// Common modulus of the critical values of `S_j`: `(e^{π/2}/4) c_j r_j^{M_j}`.
    pub fn seam_critical_value(&self, j: u32) -> Rho {
        let mj = crate::params::m(j);
        self.eps(j).add(&self.e(j).mul_int(&mj)).add(&self.quarter.mul_int(&BigInt::from(2))).add_int(&BigInt::from(-2))
    }

    /// The `m`-th critical point of `S_j`, where `z^{M_j} = ζ_j^{M_j} / 2`.
    pub fn seam_critical_point(&self, j: u32, m: &BigInt) -> LogPolar {
        let z = self.seam_zero(j, m);
        z.scale(&Rho::from_int(-1).div_pow2(j as u64))
    }

    /// The point `w (1 + u)` next to the `m`-th zero `w` of `S_j`.
    pub fn near_zero(&self, j: u32, m: &BigInt, u: &Cx) -> LogPolar {
        self.seam_zero(j, m).mul(&LogPolar::one_plus(u, &self.ctx))
    }

    /// `S_j(w (1 + u))` for the `m`-th zero `w`, computed from `u` directly.
    ///
    /// With `E = (1 + u)^{M_j} - 1`, `S_j = c_j r_j^{M_j} e^{π/2} (1 + E) E`, which keeps
    /// full relative accuracy however small `u` is.
    pub fn eval_near_zero(&self, j: u32, u: &Cx) -> LogPolar {
        let wp = self.ctx.wp() + 16;
        let mj = Flt::one().ldexp(j as i64);
        let e = u.pow1p_m1(&mj, wp);
        if e.is_zero() {
            return LogPolar::zero();
        }
        let scale = self.seam_scale(j);
        LogPolar::from_cx(&e, &self.ctx).mul(&LogPolar::one_plus(&e, &self.ctx)).scale(&scale)
    }

    /// `log₂ (c_j r_j^{M_j} e^{π/2})`.
    pub fn seam_scale(&self, j: u32) -> Rho {
        let mj = crate::params::m(j);
        self.eps(j).add(&self.e(j).mul_int(&mj)).add(&self.quarter.mul_int(&BigInt::from(2)))
    }
}

impl ModelMap {
    /// The `branch`-th preimage of `t` under `c_j z^{M_j}`. Exact.
    pub fn power_preimage(&self, j: u32, t: &LogPolar, branch: &BigInt) -> Result<LogPolar> {
        let w = t.scale(&self.eps(j).neg());
        w.root(&crate::params::m(j), branch, &self.ctx)
    }

    /// Preimage of `t` under `S_j` next to the `m`-th zero, in closed form.
    ///
    /// With `X = z^{M_j}`, `S_j` is the quadratic `(c_j/r_j^{M_j}) X (X - ζ_j^{M_j})`, so the
    /// root near `ζ_j^{M_j}` is `X = ζ_j^{M_j}(1 + σ/2)` with `σ = √(1 + τ) - 1` and
    /// `τ = 4t / (c_j r_j^{M_j} e^{π/2})`; then `z = w_m (1 + σ/2)^{1/M_j}`.
    pub fn seam_preimage(&self, j: u32, m: &BigInt, t: &LogPolar) -> Result<LogPolar> {
        if t.is_zero() {
            return Ok(self.seam_zero(j, m));
        }
        let wp = self.ctx.wp() + 16;
        let tau = LogPolar::new(t.rho.sub(&self.seam_scale(j)).add_int(&BigInt::from(2)), t.theta.clone());
        if tau.rho >= Rho::from_int(-1) {
            return Err(Error::Domain(format!(
                "target 2^{} is too large for a petal branch of seam {j}",
                t.rho.to_decimal(3)
            )));
        }
        let tau = tau.to_cx(wp);
        let h = tau.ln1p(wp);
        let sigma = Cx::new(h.re.ldexp(-1), h.im.ldexp(-1)).expm1(wp);
        let s = sigma.ldexp(-1);
        let u = s.pow1p_m1(&Flt::one().ldexp(-(j as i64)), wp);
        Ok(self.near_zero(j, m, &u))
    }

    /// The `branch`-th preimage of `t` under `q_N`: branch 0 is the one near `0`, branch
    /// `b ≥ 1` the one near the zero `(-r_N/c_N)^{1/(M_N-1)}` with root index `b - 1`.
    ///
    /// Solved by fixed-point iteration in log-polar form, `z ← (t/r_N)/(1 + p(z))` on
    /// branch 0 and `z ← ((r_N/c_N)(t/(r_N z) - 1))^{1/(M_N-1)}` otherwise. Both maps
    /// contract by a factor of order `|t| / (r_N |z| M_N)` near the solution.
    pub fn qn_preimage(&self, t: &LogPolar, branch: &BigInt) -> Result<LogPolar> {
        let n = self.n();
        let mn = crate::params::m(n);
        if branch < &BigInt::from(0) || branch >= &mn {
            return Err(Error::Contract(format!("origin branch {branch} outside 0..{mn}")));
        }
        let d = &mn - 1;
        let rn = self.e(n);
        let frac = self.ctx.p_ang;
        let t_over_r = t.scale(&rn.neg());
        let zero_b = {
            let base = LogPolar::new(rn.sub(&self.eps(n)), Angle::from_ratio(1, 2, 1));
            let b1 = if branch > &BigInt::from(0) { branch - 1 } else { BigInt::from(0) };
            LogPolar::new(base.rho.div_int(&d, frac), base.theta.root(&d, &b1, frac))
        };
        let step = |z: &LogPolar| -> Result<LogPolar> {
            if branch == &BigInt::from(0) {
                let p = z.pow(&d).scale(&self.eps(n).sub(&rn));
                let (den, _) = lp_add(&LogPolar::one(), &p, &self.ctx);
                return t_over_r.div(&den);
            }
            let w = t_over_r.div(z)?;
            if w.rho < Rho::from_int(-8) {
                // Near the zero, z = z_b (1 - w)^{1/(M-1)} with the principal root.
                let wp = self.ctx.wp();
                let u = w.to_cx(wp).neg().pow1p_m1(&Flt::ratio(1, d.to_i64().unwrap_or(i64::MAX), wp), wp);
                return Ok(zero_b.mul(&LogPolar::one_plus(&u, &self.ctx)));
            }
            let (v, _) = lp_add(&w, &LogPolar::one().neg(), &self.ctx);
            let base = v.scale(&rn.sub(&self.eps(n)));
            let b1 = branch - 1;
            Ok(LogPolar::new(base.rho.div_int(&d, frac), base.theta.root(&d, &b1, frac)))
        };
        let mut z = if branch == &BigInt::from(0) {
            if t.is_zero() {
                return Ok(LogPolar::zero());
            }
            t_over_r.clone()
        } else {
            zero_b.clone()
        };
        if t.is_zero() {
            return Ok(z);
        }
        let mut last = f64::INFINITY;
        let floor = -((frac as f64) - 32.0);
        for _ in 0..64 {
            let next = step(&z)?;
            let dr = next.rho.sub(&z.rho);
            let dt = next.theta.sub(&z.theta).centered();
            let size = [dr.to_flt(64), dt]
                .iter()
                .filter(|x| !x.is_zero())
                .map(|x| x.top() as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            z = next;
            if size < floor || size >= last {
                return Ok(z);
            }
            last = size;
        }
        Err(Error::NonConvergence { steps: 64, residual: last.exp2() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm(n: u32) -> ModelMap {
        ModelMap::new(ParamTable::build(n, 8, 1.0).unwrap(), NumCtx::default())
    }

    #[test]
    fn pieces_in_order() {
        let m = mm(5);
        let starts = m.piece_starts();
        for w in starts.windows(2) {
            assert!(w[0].1 < w[1].1, "{:?} !< {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn classify_each_piece() {
        let m = mm(5);
        let at = |r: Rho| m.piece_of(&LogPolar::new(r, Angle::zero())).unwrap();
        assert_eq!(at(Rho::from_int(10)), PieceId::OriginPoly);
        assert_eq!(at(Rho::from_int(752)), PieceId::SeamAnnulus(5));
        assert_eq!(at(Rho::from_int(753)), PieceId::PowerAnnulus(6));
        assert_eq!(at(Rho::from_int(23008)), PieceId::SeamAnnulus(6));
        assert_eq!(at(Rho::from_int(23007)), PieceId::PowerAnnulus(6));
    }

    #[test]
    fn bump_strip_is_detected() {
        let m = mm(5);
        // |z| = r_N - 1/2.
        let wp = 256;
        let l = flt::log1p(&Flt::one().ldexp(-753).neg(), wp).div(&flt::ln2(wp), wp);
        let z = LogPolar::new(Rho::from_int(752).add(&Rho::from_flt(&l)), Angle::zero());
        assert_eq!(m.piece_of(&z).unwrap(), PieceId::BumpRegion(5));
        let s = m.bump_coordinate(&z).unwrap();
        assert!((s.to_f64() - 0.5).abs() < 1e-30);
    }

    #[test]
    fn bump_edges() {
        let m = mm(5);
        let th = Angle::from_ratio(1, 7, 64);
        let z = LogPolar::new(Rho::from_int(752), th.clone());
        let left = m.eval_bump_gk(5, &Flt::zero(), &th).unwrap();
        assert_eq!(left, lp_add(&m.eval_power(5, &z), &z.scale(&Rho::from_int(752)), &m.ctx).0);
        let right = m.eval_bump_gk(5, &Flt::one(), &th).unwrap();
        assert_eq!(right, m.eval_power(5, &z));
    }

    #[test]
    fn bump_slope_peak_below_e() {
        let x0 = Flt::from_f64((1.0f64 / 3.0).powf(0.25));
        let v = log2_bump_slope(&x0, 128).unwrap().to_f64();
        assert!(v < std::f64::consts::E.log2());
        for x in [0.5, 0.7, 0.8] {
            assert!(log2_bump_slope(&Flt::from_f64(x), 128).unwrap().to_f64() <= v + 1e-12);
        }
    }

    #[test]
    fn seam_vanishes_at_zeros() {
        let m = mm(5);
        for j in 5..8 {
            for b in [0i64, 3, (1 << j) - 1] {
                let z = m.seam_zero(j, &BigInt::from(b));
                let (v, flag) = m.eval_seam(j, &z);
                assert_eq!(flag, AddFlag::Cancellation);
                assert!(v.is_zero());
            }
        }
    }

    #[test]
    fn mu_vanishes_where_holomorphic() {
        let m = mm(5);
        assert_eq!(m.log2_mu(6, &Flt::one(), &Angle::from_ratio(1, 3, 64)), MuSample::Zero);
    }
}
