//! Forward orbits, inverse branches, backward itineraries and mapping inclusions.
//!
//! Power pieces act exactly on log-polar points, so orbits through `V_k` lose nothing.
//! Seam and origin pieces round once per step; an orbit tracks the log₂ relative
//! error this introduces, amplified by `|z f'(z) / f(z)|` at every later step, and is
//! truncated once the error would blur the next region test.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{classify, Region};
use crate::modelmap::{ModelMap, PieceId};
use crate::numerics::{flt, Angle, Cx, Flt, LogPolar, NumCtx, Rho};
use crate::report::{Certificate, CertificateReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitClass {
    FatouEscape(i64),
    ECandidate,
    YLike(usize),
    /// Step at which the final run through `V` annuli starts.
    Z1Like(usize),
    Z2Like,
    Truncated(String),
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitClass::FatouEscape(k) => write!(f, "fatou-escape({k})"),
            OrbitClass::ECandidate => f.write_str("e-candidate"),
            OrbitClass::YLike(c) => write!(f, "y-like({c})"),
            OrbitClass::Z1Like(l) => write!(f, "z1-like({l})"),
            OrbitClass::Z2Like => f.write_str("z2-like"),
            OrbitClass::Truncated(r) => write!(f, "truncated({r})"),
        }
    }
}

impl Serialize for OrbitClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    #[serde(serialize_with = "ser_points")]
    pub points: Vec<LogPolar>,
    pub regions: Vec<Region>,
    /// `k(z, n)`; `None` in `B` annuli. Origin-disk steps before an entry into `A_k`
    /// count down from `k`.
    pub orbit_seq: Vec<Option<i64>>,
    pub backwards_events: Vec<usize>,
    pub classification: OrbitClass,
    /// Estimated log₂ relative error of the last point.
    pub error_log2: f64,
}

fn ser_points<S: Serializer>(p: &[LogPolar], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(|z| z.to_string()))
}

/// One inverse branch of the model map; also one step of an itinerary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum InverseBranchSpec {
    /// Root of `C_k z^{n_k}` landing in `V_k`, branch `0..n_k`.
    VkRoot { k: u32, branch: BigInt },
    /// Inverse of the seam map on petal `j` (1-based) of `A_k`.
    PetalInverse { k: u32, j: BigInt },
    /// Inverse of `q_N` near its zero `index` (`0` is the zero at the origin).
    OriginBranch { index: BigInt },
}

impl InverseBranchSpec {
    pub fn v(k: u32, branch: i64) -> Self {
        InverseBranchSpec::VkRoot { k, branch: BigInt::from(branch) }
    }

    pub fn petal(k: u32, j: i64) -> Self {
        InverseBranchSpec::PetalInverse { k, j: BigInt::from(j) }
    }

    pub fn origin(index: i64) -> Self {
        InverseBranchSpec::OriginBranch { index: BigInt::from(index) }
    }

    /// Region the branch output lies in.
    pub fn region(&self) -> Region {
        match self {
            InverseBranchSpec::VkRoot { k, .. } => Region::Vk(*k as i64),
            InverseBranchSpec::PetalInverse { k, j } => Region::Petal(*k as i64, j.clone()),
            InverseBranchSpec::OriginBranch { .. } => Region::OriginDisk,
        }
    }

    /// Whether an orbit may go from this branch's region to `next`'s.
    pub fn may_precede(&self, next: &InverseBranchSpec) -> bool {
        use InverseBranchSpec::*;
        match (self, next) {
            (VkRoot { k, .. }, VkRoot { k: k2, .. } | PetalInverse { k: k2, .. }) => *k2 == k + 1,
            (VkRoot { .. }, OriginBranch { .. }) => false,
            (PetalInverse { k, .. }, VkRoot { k: k2, .. } | PetalInverse { k: k2, .. }) => *k2 <= k + 1,
            (PetalInverse { .. }, OriginBranch { .. }) => true,
            (OriginBranch { .. }, VkRoot { k: k2, .. } | PetalInverse { k: k2, .. }) => *k2 == 1,
            (OriginBranch { .. }, OriginBranch { .. }) => true,
        }
    }
}

impl fmt::Display for InverseBranchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InverseBranchSpec::VkRoot { k, branch } => write!(f, "V({k})#{branch}"),
            InverseBranchSpec::PetalInverse { k, j } => write!(f, "P({k},{j})"),
            InverseBranchSpec::OriginBranch { index } => write!(f, "D#{index}"),
        }
    }
}

impl std::str::FromStr for InverseBranchSpec {
    type Err = Error;

    /// `V(k)#b`, `P(k,j)` or `D#i`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Contract(format!("cannot parse itinerary step {s:?}"));
        let int = |x: &str| x.trim().parse::<BigInt>().map_err(|_| bad());
        let small = |x: &str| x.trim().parse::<u32>().map_err(|_| bad());
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("D#") {
            return Ok(InverseBranchSpec::OriginBranch { index: int(rest)? });
        }
        if let Some(rest) = s.strip_prefix("V(") {
            let (k, b) = rest.split_once(")#").ok_or_else(bad)?;
            return Ok(InverseBranchSpec::VkRoot { k: small(k)?, branch: int(b)? });
        }
        if let Some(rest) = s.strip_prefix("P(").and_then(|r| r.strip_suffix(')')) {
            let (k, j) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(InverseBranchSpec::PetalInverse { k: small(k)?, j: int(j)? });
        }
        Err(bad())
    }
}

/// log₂ of `|z f'(z) / f(z)|`, the factor by which a step amplifies relative error.
fn amplification(m: &ModelMap, piece: PieceId, z: &LogPolar, fz: &LogPolar) -> f64 {
    if let PieceId::PowerAnnulus(j) = piece {
        return j as f64;
    }
    match m.deriv_piece(piece, z) {
        Ok(d) if !d.is_zero() && !fz.is_zero() => d.rho.add(&z.rho).sub(&fz.rho).to_f64().max(0.0),
        _ => f64::INFINITY,
    }
}

/// Whether evaluating `piece` at `z` is exact: power maps are, and so is `q_N` where
/// its linear term falls below the addition guard.
fn exact_step(m: &ModelMap, piece: PieceId, z: &LogPolar) -> bool {
    match piece {
        PieceId::PowerAnnulus(_) => true,
        PieceId::OriginPoly if !z.is_zero() => {
            let t = &m.table;
            let n = t.n;
            let gap = z.rho.mul_int(&(crate::params::m(n) - 1)).add_int(&(t.eps(n) - t.e(n)));
            gap.to_f64().abs() > m.ctx.guard as f64
        }
        _ => false,
    }
}

/// Bits of relative accuracy a region test at `region` needs.
fn resolution(m: &ModelMap, region: &Region) -> f64 {
    match region {
        Region::Petal(k, _) => m.table.nk(*k as u32).to_f64().unwrap_or(f64::INFINITY) + 64.0,
        _ => 64.0,
    }
}

/// Forward orbit of `z` for up to `nmax` steps, with region tags at `margin` (log₂).
pub fn iterate_orbit(m: &ModelMap, z: &LogPolar, nmax: usize, margin: f64) -> OrbitRecord {
    let rounding = -(m.ctx.wp().min(m.ctx.p_ang as u32) as f64) + 4.0;
    let mut points = Vec::new();
    let mut regions = Vec::new();
    let mut class = None;
    let mut err = f64::NEG_INFINITY;
    let mut z = z.clone();
    for n in 0..=nmax {
        let region = match classify(m, &z, margin) {
            Ok(r) => r,
            Err(e) => {
                class = Some(OrbitClass::Truncated(format!("step {n}: {e}")));
                break;
            }
        };
        let need = resolution(m, &region);
        if err > -need {
            let bits = (m.ctx.wp() as f64 + err + need).ceil();
            class = Some(OrbitClass::Truncated(format!("step {n}: {bits} bits needed")));
            break;
        }
        points.push(z.clone());
        regions.push(region.clone());
        if region == Region::Boundary {
            class = Some(OrbitClass::Truncated(format!("step {n}: boundary")));
            break;
        }
        if n == nmax && !matches!(region, Region::Bk(_)) {
            break;
        }
        let (fz, piece) = match m.eval_model(&z) {
            Ok(v) => v,
            Err(e) => {
                class = Some(OrbitClass::Truncated(format!("step {n}: {e}")));
                break;
            }
        };
        if let Region::Bk(k) = region {
            // Record the image so the escape can be checked.
            if let Ok(r) = classify(m, &fz, margin) {
                points.push(fz);
                regions.push(r);
            }
            class = Some(OrbitClass::FatouEscape(k));
            break;
        }
        if fz.is_zero() && !z.is_zero() {
            points.push(fz);
            regions.push(Region::OriginDisk);
            class = Some(OrbitClass::Truncated(format!("step {}: landed on a zero", n + 1)));
            break;
        }
        let amp = amplification(m, piece, &z, &fz);
        err += amp;
        if !exact_step(m, piece, &z) && !z.is_zero() {
            err = err.max(rounding + amp);
        }
        z = fz;
    }
    let orbit_seq = orbit_sequence(&regions);
    let backwards_events: Vec<usize> = (1..orbit_seq.len())
        .filter(|&n| matches!((orbit_seq[n - 1], orbit_seq[n]), (Some(a), Some(b)) if b < a + 1))
        .collect();
    let classification = class.unwrap_or_else(|| window_class(&regions, &backwards_events));
    OrbitRecord { points, regions, orbit_seq, backwards_events, classification, error_log2: err }
}

fn orbit_sequence(regions: &[Region]) -> Vec<Option<i64>> {
    let mut seq: Vec<Option<i64>> = regions
        .iter()
        .map(|r| match r {
            Region::Bk(_) => None,
            r => r.index(),
        })
        .collect();
    let mut next: Option<i64> = None;
    for i in (0..regions.len()).rev() {
        if regions[i] == Region::OriginDisk {
            seq[i] = next.map(|k| k - 1);
        }
        next = seq[i];
    }
    seq
}

fn window_class(regions: &[Region], backwards: &[usize]) -> OrbitClass {
    if regions.iter().all(|r| *r == Region::OriginDisk) {
        return OrbitClass::ECandidate;
    }
    if !backwards.is_empty() {
        return OrbitClass::YLike(backwards.len());
    }
    let run = regions.iter().rev().take_while(|r| matches!(r, Region::Vk(_))).count();
    if 2 * run >= regions.len() {
        OrbitClass::Z1Like(regions.len() - run)
    } else {
        OrbitClass::Z2Like
    }
}

/// Apply one inverse branch to `target` and confirm `h_N` maps the result back within
/// `tol` in log₂ modulus and in turns.
pub fn inverse_step(m: &ModelMap, target: &LogPolar, branch: &InverseBranchSpec, tol: f64) -> Result<LogPolar> {
    let z = match branch {
        InverseBranchSpec::VkRoot { k, branch } => {
            let j = m.table.j_of(*k);
            m.power_preimage(j, target, branch)?
        }
        InverseBranchSpec::PetalInverse { k, j } => {
            if j < &BigInt::one() || j > &m.table.nk(*k) {
                return Err(Error::Contract(format!("petal {j} outside 1..n_{k}")));
            }
            m.seam_preimage(m.table.j_of(*k), &(j - 1), target)?
        }
        InverseBranchSpec::OriginBranch { index } => m.qn_preimage(target, index)?,
    };
    let (fz, _) = m.eval_model(&z)?;
    let residual = if fz.is_zero() || target.is_zero() {
        if fz.is_zero() && target.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        let dr = fz.rho.sub(&target.rho).to_f64().abs();
        let dt = fz.theta.sub(&target.theta).centered().to_f64().abs();
        dr.max(dt)
    };
    if residual > tol {
        return Err(Error::NonConvergence { steps: 0, residual: residual.log2() });
    }
    Ok(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct BackwardOrbit {
    #[serde(serialize_with = "ser_lp")]
    pub point: LogPolar,
    /// Precision the point was built at; forward re-iteration must use it.
    pub ctx: NumCtx,
    pub record: OrbitRecord,
}

fn ser_lp<S: Serializer>(z: &LogPolar, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(z)
}

/// Check an itinerary against the transition rules.
pub fn check_itinerary(itinerary: &[InverseBranchSpec]) -> Result<()> {
    for (i, w) in itinerary.windows(2).enumerate() {
        if !w[0].may_precede(&w[1]) {
            return Err(Error::Contract(format!("illegal transition at step {}: {} -> {}", i + 1, w[0], w[1])));
        }
    }
    Ok(())
}

fn pull_back(m: &ModelMap, itinerary: &[InverseBranchSpec], anchor: &LogPolar) -> Result<Vec<LogPolar>> {
    let mut pts = vec![anchor.clone()];
    for (i, b) in itinerary.iter().enumerate().rev() {
        let z = inverse_step(m, pts.last().unwrap(), b, f64::INFINITY)
            .map_err(|e| Error::Domain(format!("step {i} ({b}): {e}")))?;
        pts.push(z);
    }
    pts.reverse();
    Ok(pts)
}

/// Largest extra precision [`backward_construct`] will use.
///
/// A backward move from a petal of `A_k` to `A_j` amplifies errors by about
/// `2^{e_{k+N} - e_{j+N-1}}`, so only moves out of the first petals fit.
pub const MAX_CONSTRUCT_BITS: u32 = 1 << 17;

/// A point whose forward orbit realizes `itinerary` and then lands on `anchor`.
///
/// The orbit is pulled back once at the model's precision to measure how much each
/// forward step amplifies rounding, then again at a precision covering the total, and
/// finally re-iterated forward to confirm every region tag.
pub fn backward_construct(m: &ModelMap, itinerary: &[InverseBranchSpec], anchor: &LogPolar) -> Result<BackwardOrbit> {
    if itinerary.is_empty() {
        return Err(Error::Contract("empty itinerary".into()));
    }
    check_itinerary(itinerary)?;
    let rough = pull_back(m, itinerary, anchor)?;
    // Rounding enters only at petal and origin steps; from there every later step
    // amplifies it, and it must stay below the resolution of the region tested next.
    let mut cost: f64 = 0.0;
    let mut suffix = 0.0;
    let mut need: f64 = 64.0;
    for (i, b) in itinerary.iter().enumerate().rev() {
        let piece = m.piece_of(&rough[i])?;
        suffix += amplification(m, piece, &rough[i], &rough[i + 1]);
        need = need.max(resolution(m, &b.region()));
        if !matches!(b, InverseBranchSpec::VkRoot { .. }) {
            cost = cost.max(suffix + need);
        }
    }
    if !cost.is_finite() {
        return Err(Error::Domain("itinerary passes through a critical point".into()));
    }
    if cost + 64.0 > MAX_CONSTRUCT_BITS as f64 {
        return Err(Error::Budget { needed: (cost + 64.0).ceil() as u64, available: MAX_CONSTRUCT_BITS as u64 });
    }
    let bits = (cost + 64.0).ceil() as u32;
    if cost == 0.0 {
        let pts = pull_back(m, itinerary, anchor)?;
        return finish(m, itinerary, pts, m.ctx);
    }
    let p_sig = (m.ctx.p_sig + bits).div_ceil(64) * 64;
    let ctx = NumCtx { p_sig, p_ang: m.ctx.p_ang.max(p_sig as u64 + 128), guard: m.ctx.guard };
    let fine = ModelMap::new(m.table.clone(), ctx).with_petal_constants(m.lambda, m.delta);
    let pts = pull_back(&fine, itinerary, anchor)?;
    finish(&fine, itinerary, pts, ctx)
}

fn finish(m: &ModelMap, itinerary: &[InverseBranchSpec], pts: Vec<LogPolar>, ctx: NumCtx) -> Result<BackwardOrbit> {
    let record = iterate_orbit(m, &pts[0], itinerary.len(), 0.0);
    for (i, b) in itinerary.iter().enumerate() {
        let got = record.regions.get(i);
        if got != Some(&b.region()) {
            let got = got.map_or("nothing".to_string(), |r| r.to_string());
            return Err(Error::Domain(format!(
                "re-iteration left the itinerary at step {i}: expected {}, got {got} ({})",
                b.region(),
                record.classification
            )));
        }
    }
    Ok(BackwardOrbit { point: pts[0].clone(), ctx, record })
}

/// Sampled extrema of `log₂|h_N|` over a circle.
fn circle_extrema(m: &ModelMap, rho: &Rho, samples: u32) -> Result<(Rho, Rho)> {
    let mut lo: Option<Rho> = None;
    let mut hi: Option<Rho> = None;
    for i in 0..samples {
        let z = LogPolar::new(rho.clone(), Angle::from_ratio(2 * i as i64 + 1, 2 * samples as i64, 64));
        let (f, _) = m.eval_model(&z)?;
        if f.is_zero() {
            return Err(Error::Domain(format!("zero of h_N on the circle 2^{}", rho.to_decimal(4))));
        }
        lo = Some(lo.map_or(f.rho.clone(), |l| l.min(f.rho.clone())));
        hi = Some(hi.map_or(f.rho.clone(), |h| h.max(f.rho)));
    }
    Ok((lo.unwrap(), hi.unwrap()))
}

/// Sampled extrema of `log₂|h_N|` over the boundary of petal `pm` (0-based) of seam `j`.
///
/// With `pm = None` the local form around the zero is used, otherwise the model is
/// evaluated directly at the boundary points.
fn petal_extrema(m: &ModelMap, j: u32, pm: Option<&BigInt>, samples: u32) -> Result<(Rho, Rho)> {
    let wp = m.ctx.wp();
    let n = 1i64 << j;
    // |u| = 2^{-n} e^{-π/(4n)}: radius R_k / 2^{n_k} relative to |w| = R_k e^{π/(4n_k)}.
    let shrink = flt::exp(&flt::pi(wp).div_i64(-4 * n, wp), wp).ldexp(-n);
    let mut lo: Option<Rho> = None;
    let mut hi: Option<Rho> = None;
    for i in 0..samples {
        let t = Flt::ratio(2 * i as i64 + 1, 2 * samples as i64, wp);
        let u = Cx::polar(&shrink, &t, wp);
        let f = match pm {
            None => m.eval_near_zero(j, &u),
            Some(pm) => m.eval_model(&m.near_zero(j, pm, &u))?.0,
        };
        lo = Some(lo.map_or(f.rho.clone(), |l| l.min(f.rho.clone())));
        hi = Some(hi.map_or(f.rho.clone(), |h| h.max(f.rho)));
    }
    Ok((lo.unwrap(), hi.unwrap()))
}

fn log2_ratio(p: i64, q: i64) -> Rho {
    Rho::from_flt(&flt::log2(&Flt::ratio(p, q, 220), 200))
}

fn fmt_rho(r: &Rho) -> String {
    r.to_decimal(6)
}

/// Margin added to every sampled comparison, in bits.
pub const INCLUSION_MARGIN: i64 = 2;

/// Boundary-circle checks of the mapping inclusions around `A_k`, `V_k` and the petals.
pub fn verify_inclusions(m: &ModelMap, k: u32, samples: u32) -> Result<CertificateReport> {
    if samples < 1 << 12 {
        return Err(Error::Contract(format!("need at least 4096 samples per circle, got {samples}")));
    }
    if k < 1 || m.table.j_of(k) + 2 > m.table.jmax() {
        return Err(Error::Contract(format!("k = {k} outside the table")));
    }
    let t = &m.table;
    let j = t.j_of(k);
    let e = |i: u32| Rho::from_int(t.e(i).clone());
    let mg = BigInt::from(INCLUSION_MARGIN);
    let ki = k as i64;
    let mut rep = CertificateReport::default();
    // below(x, y): x + margin < y.
    let mut below = |name: &str, x: &Rho, y: &Rho| {
        let pass = x.add_int(&mg) < *y;
        rep.push(Certificate::new(name, ki, fmt_rho(x), fmt_rho(y), pass));
    };
    let four_rk = e(j).add_int(&BigInt::from(2));
    let b_lo = e(j + 1).add_int(&BigInt::from(2));
    let b_hi = e(j + 2).add_int(&BigInt::from(-2));
    let eight = e(j + 1).add_int(&BigInt::from(3));
    let eighth = e(j + 2).add_int(&BigInt::from(-3));

    let (lo, _) = circle_extrema(m, &e(j).add_int(&BigInt::from(-2)), samples)?;
    below("quarter_rk_min_in_bk", &four_rk, &lo);

    let (_, hi) = circle_extrema(m, &e(j).add(&log2_ratio(2, 5)), samples)?;
    below("inner_vk_max", &hi, &e(j + 1).add_int(&BigInt::from(-2)));

    let (lo, hi) = circle_extrema(m, &e(j).add(&log2_ratio(3, 5)), samples)?;
    below("outer_vk_min", &b_lo, &lo);
    below("outer_vk_max", &hi, &b_hi);

    let (lo, hi) = circle_extrema(m, &e(j).add(&log2_ratio(5, 4)), samples)?;
    below("five_quarters_rk_min", &b_lo, &lo);
    below("five_quarters_rk_max", &hi, &b_hi);

    let (lo, hi) = circle_extrema(m, &four_rk, samples)?;
    below("four_rk_min", &eight, &lo);
    below("four_rk_max", &hi, &eighth);

    let (lo, hi) = circle_extrema(m, &e(j + 1).add_int(&BigInt::from(-2)), samples)?;
    below("quarter_rk1_min", &eight, &lo);
    below("quarter_rk1_max", &hi, &eighth);

    // Rotation by 1/n_k permutes the petals, so all boundaries have the same image
    // modulus. The first is sampled in local form, the middle and last directly.
    let nk = t.nk(k);
    for pm in [None, Some(&nk >> 1u32), Some(&nk - 1)] {
        let (lo, hi) = petal_extrema(m, j, pm.as_ref(), samples)?;
        below("petal_boundary_min", &b_lo, &lo);
        below("petal_boundary_max", &hi, &b_hi);
    }
    Ok(rep)
}

/// Every critical value lies in the `B` annulus the construction assigns it to.
pub fn check_singular_values(m: &ModelMap) -> Result<CertificateReport> {
    let t = &m.table;
    let n = t.n;
    let mut rep = CertificateReport::default();
    let e = |i: u32| Rho::from_int(t.e(i).clone());
    // (8 r_N, r_{N+1} / (16√2)).
    let lo = e(n).add_int(&BigInt::from(3));
    let hi = e(n + 1).sub(&Rho::from_parts(BigInt::from(9), 1));
    let marks = m.qn_landmarks()?;
    for (i, v) in marks.crit_values.iter().enumerate() {
        let pass = v.rho > lo && v.rho < hi;
        rep.push(Certificate::new("qn_critical_value", i as i64, fmt_rho(&v.rho), format!("({}, {})", fmt_rho(&lo), fmt_rho(&hi)), pass));
    }
    for k in 1..=t.kmax {
        let j = t.j_of(k);
        if j + 2 > t.jmax() {
            break;
        }
        let v = m.seam_critical_value(j);
        let lo = e(j + 1).add_int(&BigInt::from(3));
        let hi = e(j + 2).add_int(&BigInt::from(-3));
        let pass = v > lo && v < hi;
        rep.push(Certificate::new("seam_critical_value", k as i64, fmt_rho(&v), format!("({}, {})", fmt_rho(&lo), fmt_rho(&hi)), pass));
        // C_k R_k^{n_k} = 2^{n_k} R_{k+1}.
        let nk = t.nk(k);
        let lhs = t.eps(j) + &nk * t.e(j);
        let rhs = &nk + t.e(j + 1);
        rep.push(Certificate::eq("ck_rk_nk_identity", k as i64, &lhs, &rhs));
    }
    Ok(rep)
}

/// Whether two points agree to `2^bits` in log₂ modulus and in turns.
pub fn same_point(a: &LogPolar, b: &LogPolar, bits: i64) -> bool {
    if a.is_zero() || b.is_zero() {
        return a.is_zero() && b.is_zero();
    }
    let small = |x: &Flt| x.is_zero() || x.top() < bits;
    small(&a.rho.sub(&b.rho).to_flt(64)) && small(&a.theta.sub(&b.theta).centered())
}
