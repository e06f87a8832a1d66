//! Annuli, petals and level lines.
//!
//! With `j = k + N - 1`, `R_k = r_j` and `n_k = M_j`:
//!
//! - `A_k = A(R_k/4, 4R_k)`, `B_k = A(4R_k, R_{k+1}/4)`, `V_k = A(2R_k/5, 3R_k/5)`;
//! - the petals of `A_k` are the balls `B(w, R_k/2^{n_k})` around the `n_k` zeros `w` of
//!   the seam map, which sit on `|z| = R_k e^{π/(4n_k)}`;
//! - `D = B(0, R_1/4)` is the origin disk.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::modelmap::ModelMap;
use crate::numerics::{flt, Angle, Cx, DyadicReal, Flt, LogPolar, Rho};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Ak(i64),
    Bk(i64),
    Vk(i64),
    /// Petal `j` (1-based) of `A_k`.
    Petal(i64, BigInt),
    OriginDisk,
    LevelLineZone(u32),
    /// Within the classification margin of a threshold.
    Boundary,
}

impl Region {
    /// Annulus index, when the tag carries one.
    pub fn index(&self) -> Option<i64> {
        match self {
            Region::Ak(k) | Region::Bk(k) | Region::Vk(k) | Region::Petal(k, _) => Some(*k),
            _ => None,
        }
    }

    /// `A_k`, `V_k` and petals all lie in `A_k`.
    pub fn in_a(&self) -> bool {
        matches!(self, Region::Ak(_) | Region::Vk(_) | Region::Petal(_, _))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Ak(k) => write!(f, "A({k})"),
            Region::Bk(k) => write!(f, "B({k})"),
            Region::Vk(k) => write!(f, "V({k})"),
            Region::Petal(k, j) => write!(f, "P({k},{j})"),
            Region::OriginDisk => f.write_str("D"),
            Region::LevelLineZone(n) => write!(f, "L({n})"),
            Region::Boundary => f.write_str("boundary"),
        }
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PetalSpec {
    pub k: u32,
    /// 1-based petal index.
    pub j: String,
    #[serde(serialize_with = "ser_lp")]
    pub center: LogPolar,
    /// `R_k / 2^{n_k}`.
    pub radius: DyadicReal,
    /// `λ (e^{π/n_k} - 1) R_k`.
    pub conformal_radius: DyadicReal,
}

fn ser_lp<S: Serializer>(z: &LogPolar, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(z)
}

impl PetalSpec {
    pub fn radius_inside_conformal(&self) -> bool {
        self.radius < self.conformal_radius
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelLines {
    pub n: u32,
    /// `2^{Nn}`.
    pub count: String,
    /// Sampled minimum of `diam f(γ_n) / (R_1 diam γ_n)` over all sampled branches.
    pub expansion_check: f64,
    /// The same minimum restricted to branches that never use the preimage near `0`.
    pub expansion_away_from_origin: f64,
    /// Branch paths whose inversion failed, with the error.
    pub failures: Vec<(Vec<String>, String)>,
}

/// `log₂ x` of a positive rational constant, as an exact dyadic rounded at 200 bits.
fn log2_const(p: i64, q: i64) -> Rho {
    Rho::from_flt(&flt::log2(&Flt::ratio(p, q, 220), 200))
}

/// `(z / w) - 1` from exact log-polar differences.
pub fn relative_offset(z: &LogPolar, w: &LogPolar, prec: u32) -> Cx {
    let dr = z.rho.sub(&w.rho).to_flt(prec + 8).mul(&flt::ln2(prec + 8), prec + 8);
    let dt = z.theta.sub(&w.theta).centered().round(prec + 8).mul(&flt::pi(prec + 8).ldexp(1), prec + 8);
    Cx::new(dr, dt).expm1(prec)
}

/// `(j, k)` for the annulus scale of `z`: the largest `j ≥ N` with `e_j - 2 ≤ rho`.
fn scale_index(m: &ModelMap, rho: &Rho) -> Result<Option<u32>> {
    let t = &m.table;
    let n = t.n;
    if rho < &Rho::from_int(t.e(n) - 2) {
        return Ok(None);
    }
    let top = t.jmax();
    let mut j = n;
    while j < top && Rho::from_int(t.e(j + 1) - 2) <= *rho {
        j += 1;
    }
    if j == top {
        return Err(Error::Domain(format!("log2|z| = {} lies beyond the table", rho.to_decimal(3))));
    }
    Ok(Some(j))
}

/// The petal of `A_k` (raw index `j`) containing `z`, compared with margin `margin` in log₂.
fn petal_hit(m: &ModelMap, j: u32, z: &LogPolar, margin: f64) -> Option<std::result::Result<BigInt, ()>> {
    if j >= 62 {
        return None;
    }
    let n = 1i64 << j;
    let wp = m.ctx.wp();
    let idx = z.theta.turns().ldexp(j as i64).floor_int();
    let w = m.seam_zero(j, &idx);
    let dr = z.rho.sub(&w.rho).to_flt(64);
    let dt = z.theta.sub(&w.theta).centered();
    let lim = -n + 2;
    if (!dr.is_zero() && dr.top() > lim) || (!dt.is_zero() && dt.top() > lim) {
        return None;
    }
    let u = relative_offset(z, &w, wp);
    if u.is_zero() {
        return Some(Ok(idx + 1));
    }
    // log₂ of the radius ratio R_k 2^{-n} / |w| = -n - log₂e^{π/4} / n.
    let lu = flt::log2(&u.abs2(wp), wp).ldexp(-1).to_f64();
    let lr = -(n as f64) - m.quarter_log2().to_f64() / n as f64;
    if (lu - lr).abs() < margin {
        return Some(Err(()));
    }
    (lu < lr).then_some(Ok(idx + 1))
}

/// Region tag of `z`. Points within `margin` (log₂ units) of any threshold are `Boundary`.
pub fn classify(m: &ModelMap, z: &LogPolar, margin: f64) -> Result<Region> {
    if z.is_zero() {
        return Ok(Region::OriginDisk);
    }
    let t = &m.table;
    let n = t.n;
    let near = |thr: &Rho| z.rho.sub(thr).to_f64().abs() < margin;
    let Some(j) = scale_index(m, &z.rho)? else {
        let thr = Rho::from_int(t.e(n) - 2);
        return Ok(if near(&thr) { Region::Boundary } else { Region::OriginDisk });
    };
    let k = (j - n + 1) as i64;
    let ej = Rho::from_int(t.e(j).clone());
    let thresholds = [
        Rho::from_int(t.e(j) - 2),
        ej.add(&log2_const(2, 5)),
        ej.add(&log2_const(3, 5)),
        Rho::from_int(t.e(j) + 2),
        Rho::from_int(t.e(j + 1) - 2),
    ];
    if thresholds.iter().any(near) {
        return Ok(Region::Boundary);
    }
    if z.rho >= thresholds[3] {
        return Ok(Region::Bk(k));
    }
    if z.rho > thresholds[1] && z.rho < thresholds[2] {
        return Ok(Region::Vk(k));
    }
    match petal_hit(m, j, z, margin) {
        Some(Ok(p)) => Ok(Region::Petal(k, p)),
        Some(Err(())) => Ok(Region::Boundary),
        None => Ok(Region::Ak(k)),
    }
}

/// Petal `pj` (1-based) of `A_k`.
pub fn petal_spec(m: &ModelMap, k: u32, pj: &BigInt) -> PetalSpec {
    let t = &m.table;
    let j = t.j_of(k);
    let p = m.ctx.p_sig;
    let center = m.seam_zero(j, &(pj - 1));
    let e = t.e(j);
    let nk = t.nk(k);
    let radius = DyadicReal::pow2(e - &nk, p);
    let nf = nk.to_f64().unwrap_or(f64::INFINITY);
    let factor = m.lambda * (std::f64::consts::PI / nf).exp_m1();
    let conformal_radius = DyadicReal::from_f64(factor, p).mul(&DyadicReal::pow2(e.clone(), p));
    PetalSpec { k, j: pj.to_string(), center, radius, conformal_radius }
}

/// Largest zero list [`zeros_in_annulus`] will materialize.
pub const MAX_LISTED_ZEROS: u32 = 20;

/// The `n_k` zeros of the seam map inside `A_k`.
pub fn zeros_in_annulus(m: &ModelMap, k: u32) -> Result<Vec<LogPolar>> {
    if k < 1 {
        return Err(Error::Contract("k must be >= 1".into()));
    }
    let j = m.table.j_of(k);
    if j > MAX_LISTED_ZEROS {
        return Err(Error::Resource(format!("n_{k} = 2^{j} zeros is more than 2^{MAX_LISTED_ZEROS}")));
    }
    Ok((0..1u64 << j).map(|i| m.seam_zero(j, &BigInt::from(i))).collect())
}

/// Diameter (log₂) of a sampled curve, measured relative to an anchor point near it.
fn log2_diam(points: &[LogPolar], anchor: &LogPolar, prec: u32) -> f64 {
    let (local, base): (Vec<Cx>, f64) = if anchor.is_zero() {
        let top = points.iter().map(|p| p.rho.clone()).max().unwrap_or_else(Rho::zero);
        (points.iter().map(|p| p.to_cx_scaled(&top, prec)).collect(), top.to_f64())
    } else {
        (points.iter().map(|p| relative_offset(p, anchor, prec)).collect(), anchor.rho.to_f64())
    };
    let mut best = f64::NEG_INFINITY;
    for (i, a) in local.iter().enumerate() {
        for b in &local[i + 1..] {
            let d = a.sub(b, prec).abs2(prec);
            if !d.is_zero() {
                best = best.max(flt::log2(&d, prec).to_f64() / 2.0);
            }
        }
    }
    base + best
}

/// Level lines `Γ_n = q_N^{-n}(γ)`, `γ = {|z| = 4R_1}`: component count and sampled expansion.
///
/// Each sampled component is followed along a branch path; its diameter is measured in
/// coordinates relative to the preimage of `0` it surrounds, so components far below
/// working precision in absolute terms are still resolved.
pub fn level_lines(m: &ModelMap, n: u32, samples: u32) -> Result<LevelLines> {
    if n < 1 {
        return Err(Error::Contract("n must be >= 1".into()));
    }
    let t = &m.table;
    let big_n = t.n;
    let mn = crate::params::m(big_n);
    let count = BigInt::from(1) << (big_n as u64 * n as u64);
    let prec = m.ctx.wp();
    let r1 = Rho::from_int(t.e(big_n).clone());
    let gamma: Vec<LogPolar> = (0..samples)
        .map(|i| LogPolar::new(r1.add_int(&BigInt::from(2)), Angle::from_ratio(i as i64, samples as i64, 64)))
        .collect();
    let choices = [BigInt::zero(), BigInt::from(1), &mn >> 1u32];
    let mut paths: Vec<Vec<BigInt>> = vec![vec![]];
    for _ in 0..n {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |c| {
                    let mut q = p.clone();
                    q.push(c.clone());
                    q
                })
            })
            .collect();
    }
    let mut all = f64::INFINITY;
    let mut away = f64::INFINITY;
    let mut failures = Vec::new();
    let r1f = r1.to_f64();
    'path: for path in &paths {
        let mut pts = gamma.clone();
        let mut anchor = LogPolar::zero();
        let mut prev = log2_diam(&pts, &anchor, prec);
        for (level, b) in path.iter().enumerate() {
            let step = |p: &LogPolar| m.qn_preimage(p, b);
            let next: Result<Vec<LogPolar>> = pts.iter().map(step).collect();
            let next_anchor = step(&anchor);
            let (next, next_anchor) = match (next, next_anchor) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    failures.push((path.iter().map(|x| x.to_string()).collect(), e.to_string()));
                    continue 'path;
                }
            };
            pts = next;
            anchor = next_anchor;
            let d = log2_diam(&pts, &anchor, prec);
            let ratio = (prev - d - r1f).exp2();
            all = all.min(ratio);
            if path[..=level].iter().all(|x| !x.is_zero()) {
                away = away.min(ratio);
            }
            prev = d;
        }
    }
    Ok(LevelLines {
        n,
        count: count.to_string(),
        expansion_check: all,
        expansion_away_from_origin: away,
        failures,
    })
}
