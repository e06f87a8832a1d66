//! Nested annuli `Γ_{k,m}` inside `V_{k+1}`, their widths and tangents.
//!
//! On `V_k` the model map is `C_k z^{n_k}` and the entire map is `f = C_k φ^{-1}(z)^{n_k}`,
//! so an inverse branch is `w ↦ φ((w/C_k)^{1/n_k})`. Boundaries of `Γ_{k,m}` are traced by
//! pulling the circles `|w| = R/4` and `|w| = 3R/4` of scale `k + m + 1` back `m` times.
//!
//! With `w = φ(u)` and `u` the root, `w f'(w)/f(w) = n_k u φ'(u)/φ(u)`; every tangent and
//! angle quantity below is a product or sum of that factor along the pull-back chain.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::modelmap::ModelMap;
use crate::numerics::{Angle, Cx, DyadicReal, Flt, LogPolar, Rho};
use crate::params::{self, ParamTable};

/// Fourier modes of the synthetic phase field.
const MODES: [i64; 4] = [-2, -1, 1, 2];

/// `max |z/s|^{±2}` over `V_k`, where `|z/s| ∈ [4/5, 6/5]`.
const MODE_CAP: f64 = 1.5625;

/// The correction map `φ` on each `V_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum DistortionModel {
    Identity,
    /// `φ(z) = z(1 + ε(z))`, `ε(z) = a_k Σ c_m (z/s_k)^m` over `m ∈ {±1, ±2}` on `V_k`,
    /// where `s_k = R_k/2` and `a_k = 1 - exp(-C' ω_p(4/R_k))`.
    SyntheticOmega { cprime: f64, p: f64, phase_seed: u64 },
}

impl DistortionModel {
    pub fn synthetic(cprime: f64, p: f64, phase_seed: u64) -> Self {
        DistortionModel::SyntheticOmega { cprime, p, phase_seed }
    }

    /// `C' ω_p` at the inner edge of `V_k` (rounded down to `R_k/4`), where it is largest.
    pub fn omega_bound(&self, t: &ParamTable, k: u32) -> f64 {
        match *self {
            DistortionModel::Identity => 0.0,
            DistortionModel::SyntheticOmega { cprime, p, .. } => {
                let rho = t.big_r(k) - 2;
                cprime * params::omega_at_log2(p, &rho).unwrap_or(1.0)
            }
        }
    }

    /// Amplitude `a_k`; both `|ε|` and `|φ' - 1|` stay below it on `V_k`.
    pub fn amplitude(&self, t: &ParamTable, k: u32) -> f64 {
        -(-self.omega_bound(t, k)).exp_m1()
    }

    /// Coefficients `c_m`, normalised so `Σ |c_m| max(1, |m+1|) MODE_CAP = 1`.
    pub fn coefficients(&self, k: u32) -> [(i64, f64, f64); 4] {
        let seed = match *self {
            DistortionModel::Identity => return MODES.map(|m| (m, 0.0, 0.0)),
            DistortionModel::SyntheticOmega { phase_seed, .. } => phase_seed,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let raw = MODES.map(|m| (m, rng.gen_range(-1.0f64..1.0), rng.gen_range(-1.0f64..1.0)));
        let norm: f64 = raw.iter().map(|&(m, re, im)| re.hypot(im) * ((m + 1).abs().max(1) as f64)).sum::<f64>() * MODE_CAP;
        raw.map(|(m, re, im)| (m, re / norm, im / norm))
    }

    /// `(ε(u), φ'(u) - 1)` for `u` in `V_k`.
    pub fn eps_and_slope(&self, mm: &ModelMap, k: u32, u: &LogPolar) -> (Cx, Cx) {
        if *self == DistortionModel::Identity {
            return (Cx::zero(), Cx::zero());
        }
        let wp = mm.ctx.wp();
        let t = &mm.table;
        let x = u.to_cx_scaled(&Rho::from_int(t.big_r(k) - 1), wp);
        let xi = Cx::one().div(&x, wp);
        let pows = [xi.mul(&xi, wp), xi, x.clone(), x.mul(&x, wp)];
        let a = Flt::from_f64(self.amplitude(t, k));
        let (mut eps, mut slope) = (Cx::zero(), Cx::zero());
        for ((m, re, im), xm) in self.coefficients(k).iter().zip(pows.iter()) {
            let term = Cx::new(Flt::from_f64(*re), Flt::from_f64(*im)).mul(xm, wp);
            eps = eps.add(&term, wp);
            slope = slope.add(&term.scale(&Flt::from_i64(m + 1), wp), wp);
        }
        (eps.scale(&a, wp), slope.scale(&a, wp))
    }

    /// `φ(u)` for `u` in `V_k`.
    pub fn apply(&self, mm: &ModelMap, k: u32, u: &LogPolar) -> LogPolar {
        if *self == DistortionModel::Identity {
            return u.clone();
        }
        let (eps, _) = self.eps_and_slope(mm, k, u);
        u.mul(&LogPolar::one_plus(&eps, &mm.ctx))
    }

    /// `u φ'(u) / φ(u) = φ'(u) / (1 + ε(u))`.
    pub fn log_factor(&self, mm: &ModelMap, k: u32, u: &LogPolar) -> Cx {
        if *self == DistortionModel::Identity {
            return Cx::zero();
        }
        let wp = mm.ctx.wp();
        let (eps, slope) = self.eps_and_slope(mm, k, u);
        slope.ln1p(wp).sub(&eps.ln1p(wp), wp)
    }
}

fn ser_rhos<S: Serializer>(v: &[Rho], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_decimal(40)))
}

fn ser_angles<S: Serializer>(v: &[Angle], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|a| a.to_string()))
}

/// One partial tangent product `Π_{i<m} u_i φ'(u_i)/φ(u_i)`.
#[derive(Clone, Debug, Serialize)]
pub struct TangentPartial {
    pub m: u32,
    pub re: f64,
    pub im: f64,
    /// Natural log of the modulus.
    pub log_modulus: f64,
    /// `|P_m / P_{m-1} - 1|`; zero for the first entry.
    pub cauchy_diff: f64,
    /// `exp(Σ_{i=m-1}^{m} 2C' 2^{-√(i+N+2)/4}) - 1`.
    pub cauchy_bound: f64,
}

/// Traced boundaries of `Γ_{k,m}`, indexed by the parameter angle at scale `k + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct CurveTrace {
    pub k: u32,
    pub m: u32,
    #[serde(serialize_with = "ser_angles")]
    pub theta_grid: Vec<Angle>,
    /// `log₂` of the inner boundary modulus.
    #[serde(serialize_with = "ser_rhos")]
    pub inner_radii: Vec<Rho>,
    #[serde(serialize_with = "ser_rhos")]
    pub outer_radii: Vec<Rho>,
    /// Tangent partial products along the outer boundary chain at `theta_grid[0]`.
    pub tangent_partials: Vec<TangentPartial>,
}

impl CurveTrace {
    /// `max - min` of a radius list, in `log₂` units.
    pub fn oscillation(v: &[Rho]) -> f64 {
        match (v.iter().max(), v.iter().min()) {
            (Some(hi), Some(lo)) => hi.sub(lo).to_f64(),
            _ => 0.0,
        }
    }

    pub fn radial_oscillation(&self) -> f64 {
        Self::oscillation(&self.inner_radii).max(Self::oscillation(&self.outer_radii))
    }

    /// Whether `inner < outer` at every grid angle.
    pub fn ordered(&self) -> bool {
        self.inner_radii.iter().zip(&self.outer_radii).all(|(a, b)| a < b)
    }

    /// Whether every radius lies in `[(2/5) R_{k+1}, (3/5) R_{k+1}]`.
    pub fn within_v(&self, t: &ParamTable) -> bool {
        let e = Rho::from_int(t.big_r(self.k + 1).clone());
        let lo = e.add(&Rho::from_f64(0.4f64.log2()));
        let hi = e.add(&Rho::from_f64(0.6f64.log2()));
        self.inner_radii.iter().chain(&self.outer_radii).all(|r| *r >= lo && *r <= hi)
    }

    /// `(theta, inner_rho, outer_rho)` rows.
    pub fn rows(&self) -> Vec<[String; 3]> {
        self.theta_grid
            .iter()
            .zip(self.inner_radii.iter().zip(&self.outer_radii))
            .map(|(t, (a, b))| [t.to_string(), a.to_decimal(40), b.to_decimal(40)])
            .collect()
    }
}

/// One link of a pull-back chain: the root `u` and the point `w = φ(u)`, both in `V_level`.
#[derive(Clone, Debug)]
pub struct ChainLink {
    pub level: u32,
    pub u: LogPolar,
    pub w: LogPolar,
}

fn angle_bits(t: &ParamTable, lo: u32, hi: u32) -> u64 {
    (lo..hi).map(|i| t.nk_shift(i) as u64).sum()
}

fn check_budget(mm: &ModelMap, lo: u32, hi: u32, extra: u64) -> Result<()> {
    if mm.table.j_of(hi) > mm.table.jmax() {
        return Err(Error::Domain(format!("scale {hi} is beyond the parameter table")));
    }
    let need = angle_bits(&mm.table, lo, hi) + extra;
    if need > mm.ctx.p_ang {
        return Err(Error::Budget { needed: need, available: mm.ctx.p_ang });
    }
    Ok(())
}

/// Pull `top` (a point of scale `hi`) back to scale `lo` along the branch whose roots have
/// argument closest to `n_lo ⋯ n_{i-1} θ` at scale `i`. Links are returned from `lo` up.
///
/// A root further than `1/(4 n_i)` turns from its target is a branch inconsistency.
pub fn pull_chain(mm: &ModelMap, phi: &DistortionModel, theta: &Angle, lo: u32, hi: u32, top: &LogPolar) -> Result<Vec<ChainLink>> {
    let t = &mm.table;
    let wp = mm.ctx.wp();
    let mut targets = vec![theta.clone()];
    for i in lo..hi {
        let next = targets.last().unwrap().mul_pow2(t.nk_shift(i) as u64);
        targets.push(next);
    }
    let mut links = Vec::with_capacity((hi - lo) as usize);
    let mut w = top.clone();
    for i in (lo..hi).rev() {
        let sh = t.nk_shift(i);
        let n = t.nk(i);
        let want = &targets[(i - lo) as usize];
        let d = want.turns().ldexp(sh as i64).sub(&w.theta.turns(), wp);
        let b = d.round_int().mod_floor(&n);
        let u = mm.power_preimage(t.j_of(i), &w, &b)?;
        let off = u.theta.dist_f64(want);
        if off * 4.0 >= 1.0 / n.to_f64().unwrap_or(f64::INFINITY) {
            return Err(Error::Domain(format!(
                "branch inconsistency at scale {i} in the cell of theta = {theta} (offset {off:.3e} turns)"
            )));
        }
        w = phi.apply(mm, i, &u);
        links.push(ChainLink { level: i, u, w: w.clone() });
    }
    links.reverse();
    Ok(links)
}

/// `log₂` of `R_k / 4` or `3R_k / 4`.
fn trace_circle(t: &ParamTable, k: u32, outer: bool) -> Rho {
    let e = Rho::from_int(t.big_r(k) - 2);
    if outer {
        e.add(&Rho::from_f64(3f64.log2()))
    } else {
        e
    }
}

/// Boundaries of `Γ_{k,depth}` on a `grid`-point parameter grid.
pub fn trace_gamma(mm: &ModelMap, phi: &DistortionModel, k: u32, depth: u32, grid: u32) -> Result<CurveTrace> {
    if grid < 256 {
        return Err(Error::Contract(format!("grid must be >= 256, got {grid}")));
    }
    if depth == 0 {
        return Err(Error::Contract("depth must be >= 1".into()));
    }
    let (lo, hi) = (k + 1, k + 1 + depth);
    let gbits = (grid as u64).next_power_of_two().trailing_zeros() as u64;
    check_budget(mm, lo, hi, gbits + 64)?;
    let t = &mm.table;
    let theta_grid: Vec<Angle> = (0..grid).map(|i| Angle::from_ratio(i as i64, grid as i64, gbits + 64)).collect();
    let top_bits = angle_bits(t, lo, hi);
    let ends = theta_grid
        .par_iter()
        .map(|th| {
            let top_angle = th.mul_pow2(top_bits);
            let inner = pull_chain(mm, phi, th, lo, hi, &LogPolar::new(trace_circle(t, hi, false), top_angle.clone()))?;
            let outer = pull_chain(mm, phi, th, lo, hi, &LogPolar::new(trace_circle(t, hi, true), top_angle))?;
            Ok((inner[0].w.rho.clone(), outer))
        })
        .collect::<Result<Vec<_>>>()?;
    let inner_radii = ends.iter().map(|(a, _)| a.clone()).collect();
    let outer_radii = ends.iter().map(|(_, c)| c[0].w.rho.clone()).collect();
    let first_chain = ends.into_iter().next().map(|(_, c)| c);
    let tangent_partials = partials(mm, phi, &first_chain.unwrap_or_default());
    Ok(CurveTrace { k, m: depth, theta_grid, inner_radii, outer_radii, tangent_partials })
}

/// `Σ_{i=lo}^{hi} 2C' 2^{-√(i+N+2)/4}`, with `i` counted from scale 2.
fn summed_tail(t: &ParamTable, cprime: f64, lo: u32, hi: u32) -> f64 {
    (lo..=hi).map(|i| 2.0 * cprime * (-(((i + t.n + 2) as f64).sqrt()) / 4.0).exp2()).sum()
}

fn cprime_of(phi: &DistortionModel) -> f64 {
    match *phi {
        DistortionModel::Identity => 0.0,
        DistortionModel::SyntheticOmega { cprime, .. } => cprime,
    }
}

/// Running products of the chain's factors, one entry per link.
fn partials(mm: &ModelMap, phi: &DistortionModel, chain: &[ChainLink]) -> Vec<TangentPartial> {
    let wp = mm.ctx.wp();
    let cp = cprime_of(phi);
    let mut acc = Cx::zero();
    let mut out: Vec<TangentPartial> = Vec::new();
    for (i, link) in chain.iter().enumerate() {
        acc = acc.add(&phi.log_factor(mm, link.level, &link.u), wp);
        out.push(partial_entry(&mm.table, cp, i as u32 + 1, &acc, out.last()));
    }
    out
}

fn partial_entry(t: &ParamTable, cprime: f64, m: u32, log_p: &Cx, prev: Option<&TangentPartial>) -> TangentPartial {
    let (lr, li) = log_p.to_f64();
    let (re, im) = (lr.exp() * li.cos(), lr.exp() * li.sin());
    let (cauchy_diff, cauchy_bound) = match prev {
        None => (0.0, 0.0),
        Some(p) => {
            let (dr, di) = (lr - p.log_modulus, li - p.im.atan2(p.re));
            let d = (dr.exp() * di.cos() - 1.0).hypot(dr.exp() * di.sin());
            (d, summed_tail(t, cprime, m - 1, m).exp_m1())
        }
    };
    TangentPartial { m, re, im, log_modulus: lr, cauchy_diff, cauchy_bound }
}

/// Partial products `P_m = Π_{i<m} u_i φ'(u_i)/φ(u_i)` for `m = 1..=mmax`, where `u_i` runs
/// along the chain of `γ_0^m(θ₀) ∈ V_2` pulled back from the circle `|w| = R_{m+2}/2`.
///
/// `(γ_0^m)'(θ) = i γ_0^m(θ) P_m`. Each `P_m` uses its own chain, so `cauchy_diff` compares
/// consecutive depths.
pub fn tangent_products(mm: &ModelMap, phi: &DistortionModel, theta0: &Angle, mmax: u32) -> Result<Vec<TangentPartial>> {
    check_budget(mm, 2, 2 + mmax, theta0.bits() + 64)?;
    let t = &mm.table;
    let wp = mm.ctx.wp();
    let cp = cprime_of(phi);
    let mut out: Vec<TangentPartial> = Vec::new();
    for m in 1..=mmax {
        let hi = 2 + m;
        let top = LogPolar::new(Rho::from_int(t.big_r(hi) - 1), theta0.mul_pow2(angle_bits(t, 2, hi)));
        let chain = pull_chain(mm, phi, theta0, 2, hi, &top)?;
        let mut acc = Cx::zero();
        for link in &chain {
            acc = acc.add(&phi.log_factor(mm, link.level, &link.u), wp);
        }
        out.push(partial_entry(t, cp, m, &acc, out.last()));
    }
    Ok(out)
}

/// `γ_0^m(θ)`, the point whose tangent [`tangent_products`] describes.
pub fn gamma_point(mm: &ModelMap, phi: &DistortionModel, theta: &Angle, m: u32) -> Result<LogPolar> {
    let t = &mm.table;
    let hi = 2 + m;
    let top = LogPolar::new(Rho::from_int(t.big_r(hi) - 1), theta.mul_pow2(angle_bits(t, 2, hi)));
    Ok(pull_chain(mm, phi, theta, 2, hi, &top)?.remove(0).w)
}

/// `exp(-Σ_{i≥0} 2C' 2^{-√(i+N)/4})`, a floor for every `|P_m|`.
pub fn c1_modulus_floor(n: u32, cprime: f64) -> f64 {
    let c = std::f64::consts::LN_2 / 4.0;
    let kk = 1_000_000u64;
    let head: f64 = (0..kk).map(|i| (-c * ((i + n as u64) as f64).sqrt()).exp()).sum();
    // Σ_{x>K} e^{-c√x} ≤ ∫_K^∞ e^{-c√x} dx = 2 e^{-c√K} (√K/c + 1/c²).
    let s = ((kk + n as u64) as f64).sqrt();
    let tail = 2.0 * (-c * s).exp() * (s / c + 1.0 / (c * c));
    (-2.0 * cprime * (head + tail)).exp()
}

/// Largest angle, in radians, between leaves of the foliations of `Γ_{k,n1}` and `Γ_{k,n2}`.
///
/// The leaf of `Γ_{k,n}` through `z` is the pull-back of a circle by `f^n`, whose normal
/// makes the angle `arg(z (f^n)'(z)/f^n(z)) = Σ_{i<n} arg(u_i φ'(u_i)/φ(u_i))` with the ray.
/// Sampled over `samples` angles and three radii of the top circle.
pub fn angle_check(mm: &ModelMap, phi: &DistortionModel, k: u32, n1: u32, n2: u32, samples: u32) -> Result<f64> {
    if n1 >= n2 {
        return Err(Error::Contract(format!("need n1 < n2, got {n1} >= {n2}")));
    }
    if samples == 0 {
        return Err(Error::Contract("samples must be positive".into()));
    }
    let (lo, hi) = (k + 1, k + 1 + n2);
    let sbits = (samples as u64).next_power_of_two().trailing_zeros() as u64;
    check_budget(mm, lo, hi, sbits + 64)?;
    let t = &mm.table;
    let wp = mm.ctx.wp();
    let e = Rho::from_int(t.big_r(hi).clone());
    let radii = [0.45f64, 0.5, 0.55].map(|f| e.add(&Rho::from_f64(f.log2())));
    let mut worst = 0f64;
    for i in 0..samples {
        let th = Angle::from_ratio(2 * i as i64 + 1, 2 * samples as i64, sbits + 64);
        let top_angle = th.mul_pow2(angle_bits(t, lo, hi));
        for r in &radii {
            let chain = pull_chain(mm, phi, &th, lo, hi, &LogPolar::new(r.clone(), top_angle.clone()))?;
            let mut s = Flt::zero();
            for link in &chain[n1 as usize..n2 as usize] {
                s = s.add(&phi.log_factor(mm, link.level, &link.u).im, wp);
            }
            worst = worst.max(s.to_f64().abs());
        }
    }
    Ok(worst)
}

/// `Σ_{i=n1}^{n2-1} 2 arcsin a_{k+1+i}`, the bound [`angle_check`] is held to.
pub fn angle_bound(t: &ParamTable, phi: &DistortionModel, k: u32, n1: u32, n2: u32) -> f64 {
    (n1..n2).map(|i| 2.0 * phi.amplitude(t, k + 1 + i).min(1.0).asin()).sum()
}

/// `Σ 2 C' ω_p / ln 2` over the scales a trace visits, in `log₂` units.
pub fn oscillation_budget(t: &ParamTable, phi: &DistortionModel, k: u32, depth: u32) -> f64 {
    (k + 1..k + 1 + depth).map(|i| 2.0 * phi.omega_bound(t, i) / std::f64::consts::LN_2).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthCheck {
    pub k: u32,
    pub m: u32,
    /// `log₂` of the largest linear width `|outer| - |inner|`.
    pub log2_measured: f64,
    /// `log₂ (8^{m-1} R_{k+1} / (n_{k+1} ⋯ n_{k+m}))`.
    pub log2_bound: f64,
    pub pass: bool,
}

/// Largest linear width of a trace against the nesting bound.
pub fn width_check(t: &ParamTable, trace: &CurveTrace) -> WidthCheck {
    let mut best = f64::NEG_INFINITY;
    for (a, b) in trace.inner_radii.iter().zip(&trace.outer_radii) {
        let d = b.sub(a).to_f64();
        let lw = a.sub(&Rho::from_int(t.big_r(trace.k + 1).clone())).to_f64() + (d * std::f64::consts::LN_2).exp_m1().log2();
        best = best.max(lw);
    }
    let base = t.big_r(trace.k + 1).to_f64().unwrap_or(f64::INFINITY);
    let log2_measured = base + best;
    let log2_bound = base + 3.0 * (trace.m as f64 - 1.0) - angle_bits(t, trace.k + 1, trace.k + 1 + trace.m) as f64;
    WidthCheck { k: trace.k, m: trace.m, log2_measured, log2_bound, pass: log2_measured <= log2_bound }
}

#[derive(Clone, Debug, Serialize)]
pub struct DilatationIntegral {
    /// `log₂ (1/r)`.
    pub log2_inv_r: f64,
    /// Smallest `j` with `1/r < r_j e^{π/M_j}`.
    pub j_r: u32,
    pub i_estimate: f64,
    pub omega1: f64,
}

/// `π((r_j/(r_j - 1))² e^{2π/M_j} - 1)`, the area of the `j`-th support annulus over its
/// inner `|z|²`.
pub fn dilatation_summand(e_j: Option<&BigInt>, j: u32) -> f64 {
    let mj = (j as f64).exp2();
    let inv_r = e_j.and_then(|e| e.to_i64()).map(|e| (-(e as f64)).exp2()).unwrap_or(0.0);
    let l = -2.0 * (-inv_r).ln_1p() + std::f64::consts::TAU / mj;
    std::f64::consts::PI * l.exp_m1()
}

/// Sum of [`dilatation_summand`] from `j(r)` on, next to `ω₁(r)`.
///
/// Terms past the table use `1/r_j = 0`; past `j(r) + 200` the geometric tail is bounded by
/// twice the last term.
pub fn dilatation_integral(t: &ParamTable, r: &DyadicReal) -> Result<DilatationIntegral> {
    if r.sign() <= 0 || r >= &DyadicReal::from_i64(1, 64) {
        return Err(Error::Domain("dilatation integral needs 0 < r < 1".into()));
    }
    let inv = r.log2(64)?.neg();
    let log2_inv_r = inv.to_f64();
    let ln2 = std::f64::consts::LN_2;
    let jr = (1..)
        .find(|&j| {
            let edge = if j <= t.jmax() { t.e(j).to_f64().unwrap_or(f64::INFINITY) } else { f64::INFINITY };
            log2_inv_r < edge + std::f64::consts::PI / ((j as f64).exp2() * ln2)
        })
        .unwrap();
    let last = jr + 200;
    let mut sum = 0.0;
    for j in jr..=last {
        let e = (j <= t.jmax()).then(|| t.e(j));
        sum += dilatation_summand(e, j);
    }
    sum += 2.0 * dilatation_summand(None, last + 1);
    Ok(DilatationIntegral { log2_inv_r, j_r: jr, i_estimate: sum, omega1: params::omega_eval(1.0, r)? })
}
