//! Covering-sum bounds for Hausdorff dimension.
//!
//! Every sum is accumulated as a base-2 logarithm: the terms are far outside `f64`
//! range (`R_k^{-t}` with `log₂ R_k` in the millions), while their logarithms are not.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::numerics::DyadicReal;
use crate::params::ParamTable;
use crate::report::{Certificate, CertificateReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

/// Koebe constants and petal constants a report depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub lpp: f64,
    pub pp: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { lpp: 10.0, pp: 10.0, delta: 0.25, lambda: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub name: String,
    pub t: f64,
    /// log₂ of the summed terms.
    pub log2_partial_sum: f64,
    /// log₂ of the bound on everything after the partial sum.
    pub log2_tail_bound: f64,
    /// log₂ of the first omitted term.
    pub log2_first_omitted: f64,
    /// Ratio bounding consecutive omitted terms.
    pub ratio: f64,
    pub log2_ratio: f64,
    pub verdict: Verdict,
    pub constants_used: Constants,
    /// Exact critical exponent, when the sum has one in closed form.
    pub critical_exponent: Option<String>,
    pub diagnosis: Option<String>,
}

impl CoverReport {
    /// log₂ of partial sum plus tail.
    pub fn log2_total(&self) -> f64 {
        log2_add(self.log2_partial_sum, self.log2_tail_bound)
    }

    pub fn converges(&self) -> bool {
        self.verdict == Verdict::Converges
    }
}

/// `log₂(2^a + 2^b)`.
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// `log₂(1 / (1 - 2^x))` for `x < 0`.
fn log2_geometric(x: f64) -> f64 {
    -(-(x.exp2())).ln_1p() / std::f64::consts::LN_2
}

fn big_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn report(name: &str, t: f64, c: Constants) -> CoverReport {
    CoverReport {
        name: name.into(),
        t,
        log2_partial_sum: f64::NEG_INFINITY,
        log2_tail_bound: f64::NEG_INFINITY,
        log2_first_omitted: f64::NEG_INFINITY,
        ratio: 0.0,
        log2_ratio: f64::NEG_INFINITY,
        verdict: Verdict::Inconclusive,
        constants_used: c,
        critical_exponent: None,
        diagnosis: None,
    }
}

/// Close a report given the first omitted term and a ratio bounding all later ones.
fn close_tail(r: &mut CoverReport, first: f64, log2_ratio: f64) {
    r.log2_first_omitted = first;
    r.log2_ratio = log2_ratio;
    r.ratio = log2_ratio.exp2();
    if log2_ratio < 0.0 {
        r.log2_tail_bound = first + log2_geometric(log2_ratio);
        r.verdict = Verdict::Converges;
    } else {
        r.log2_tail_bound = f64::INFINITY;
        r.diagnosis = Some(format!("tail ratio 2^{log2_ratio:.4} is not below 1"));
    }
}

/// `Σ_n 2^{Nn} R_1^{-tn}`, the cover of the origin Cantor set by level-`n` components.
///
/// Geometric with ratio `2^{N - t e_N}`; the critical exponent is `N / e_N`.
pub fn origin_dim_bound(table: &ParamTable, tdim: f64) -> CoverReport {
    let n = table.n;
    let en = table.e(n);
    let mut r = report("origin", tdim, Constants::default());
    let tstar = BigRational::new(BigInt::from(n), en.clone());
    r.critical_exponent = Some(tstar.to_string());
    let x = n as f64 - tdim * big_f64(en);
    r.log2_partial_sum = x;
    close_tail(&mut r, 2.0 * x, x);
    if x > 0.0 {
        r.verdict = Verdict::Diverges;
    } else if x == 0.0 {
        r.verdict = Verdict::Inconclusive;
    }
    r
}

/// `N / e_N` as `f64`.
pub fn origin_critical_exponent(table: &ParamTable) -> f64 {
    table.n as f64 / big_f64(table.e(table.n))
}

/// `log₂ L_k = Σ_{i ≤ k} log₂ n_i`.
fn log2_lk(table: &ParamTable, k: u32) -> f64 {
    (1..=k).map(|i| table.nk_shift(i) as f64).sum()
}

/// log₂ of `2^k L_k R_k^{-t}`.
pub fn holesum_term(table: &ParamTable, k: u32, tdim: f64) -> f64 {
    k as f64 + log2_lk(table, k) - tdim * big_f64(table.big_r(k))
}

/// `Σ_k 2^k L_k R_k^{-t}` over `k ≤ kcut`, with the tail bounded through the ratio
/// `8 n_k 2^{-t n_k}` of consecutive terms.
pub fn holesum_eval(table: &ParamTable, tdim: f64, kcut: u32) -> CoverReport {
    let mut r = report("holesum", tdim, Constants::default());
    if kcut < 3 || table.j_of(kcut + 1) > table.jmax() {
        r.diagnosis = Some(format!("kcut = {kcut} outside 3..={}", table.jmax() - table.n));
        return r;
    }
    r.log2_partial_sum = (1..=kcut).map(|k| holesum_term(table, k, tdim)).fold(f64::NEG_INFINITY, log2_add);
    let first = holesum_term(table, kcut + 1, tdim);
    // 8 n 2^{-tn} decreases once t n ln 2 > 1, so its value at n_kcut bounds every later ratio.
    let nk = table.nk(kcut).to_f64().unwrap_or(f64::INFINITY);
    let lr = 3.0 + nk.log2() - tdim * nk;
    if tdim * nk * std::f64::consts::LN_2 <= 1.0 {
        r.log2_first_omitted = first;
        r.diagnosis = Some(format!("ratio bound not yet decreasing at n_{kcut} = {nk}"));
        return r;
    }
    close_tail(&mut r, first, lr);
    r
}

/// Easy and hard layer conditions, and the geometric layer total.
pub fn layer_checks(table: &ParamTable, tdim: f64, lpp: f64) -> CertificateReport {
    let n = table.n;
    let mut rep = CertificateReport::default();
    let hundredth = -(100f64.log2());
    // (L'')^t 2^N R_1^{-t} ≤ 1/100.
    let easy = tdim * lpp.log2() + n as f64 - tdim * big_f64(table.e(n));
    rep.push(Certificate::new("easy_w", n as i64, easy, hundredth, easy <= hundredth));
    // Σ 2^k L_k R_k^{-t} ≤ (1/100) (2 / L''²)^t.
    let hole = holesum_eval(table, tdim, 3);
    let lhs = if hole.converges() { hole.log2_total() } else { f64::INFINITY };
    let rhs = hundredth + tdim * (1.0 - 2.0 * lpp.log2());
    rep.push(Certificate::new("hard_w", n as i64, lhs, rhs, lhs <= rhs));
    // Σ_{m ≥ 1} (1/10)^m = 1/9.
    let total: f64 = (1..=60).map(|m| 0.1f64.powi(m)).sum();
    rep.push(Certificate::new("layer_total", n as i64, total, 1.0 / 9.0, total <= 1.0 / 9.0 + 1e-15));
    rep
}

/// Smallest `N ≤ 64` passing [`layer_checks`] at `tdim`.
pub fn layer_fix_n(tdim: f64, lpp: f64) -> Option<u32> {
    (5..=64).find(|&n| ParamTable::build(n, 4, 1.0).is_ok_and(|t| layer_checks(&t, tdim, lpp).all_pass()))
}

/// log₂ of `2^j L_{k+j} 2^{-t n_{k+j}}`.
pub fn z2_term(table: &ParamTable, k: u32, j: u32, tdim: f64) -> f64 {
    let kj = k + j;
    let nkj = table.nk_shift(kj) as f64;
    j as f64 + log2_lk(table, kj) - tdim * nkj.exp2()
}

/// Number of terms summed explicitly by [`z2_tail`].
pub const Z2_TERMS: u32 = 8;

/// `(P')^t R_k^t Σ_{j ≥ lcut} 2^j L_{k+j} 2^{-t n_{k+j}}`, the cover of `Z₂ ∩ A_k` by
/// petal chains; the tail uses the ratio `4 n_{k+j} 2^{-t n_{k+j}}`.
pub fn z2_tail(table: &ParamTable, k: u32, tdim: f64, lcut: u32, pp: f64) -> CoverReport {
    let c = Constants { pp, ..Constants::default() };
    let mut r = report("z2_tail", tdim, c);
    let pre = tdim * (pp.log2() + big_f64(table.big_r(k)));
    let last = lcut + Z2_TERMS - 1;
    r.log2_partial_sum = (lcut..=last).map(|j| pre + z2_term(table, k, j, tdim)).fold(f64::NEG_INFINITY, log2_add);
    let first = pre + z2_term(table, k, last + 1, tdim);
    let n = (table.nk_shift(k + last) as f64).exp2();
    if tdim * n * std::f64::consts::LN_2 <= 1.0 {
        r.log2_first_omitted = first;
        r.diagnosis = Some(format!("ratio bound not yet decreasing at n = {n}"));
        return r;
    }
    close_tail(&mut r, first, 2.0 + n.log2() - tdim * n);
    r
}

/// Smallest `l` with the `Z₂` cover sum from `l` on below `eps`.
pub fn z2_lcut_for(table: &ParamTable, k: u32, tdim: f64, pp: f64, eps: f64) -> Option<u32> {
    (1..=256).find(|&l| {
        let r = z2_tail(table, k, tdim, l, pp);
        r.converges() && r.log2_total() < eps.log2()
    })
}

/// Whether all four covering conditions certify `tdim` at parameter `N`.
pub fn certifies(n: u32, tdim: f64, c: &Constants) -> bool {
    let Ok(t) = ParamTable::build(n, 4, 1.0) else {
        return false;
    };
    origin_dim_bound(&t, tdim).converges()
        && holesum_eval(&t, tdim, 3).converges()
        && layer_checks(&t, tdim, c.lpp).all_pass()
        && z2_tail(&t, 1, tdim, 1, c.pp).converges()
}

/// Smallest `N ≤ 64` at which [`certifies`] holds.
pub fn min_n_for_dimension(tdim: f64, c: &Constants) -> Option<u32> {
    (5..=64).find(|&n| certifies(n, tdim, c))
}

/// log₂ of `Σ diam^t`.
pub fn hausdorff_sum_log2(diams: &[DyadicReal], tdim: f64) -> f64 {
    diams
        .iter()
        .map(|d| {
            let l = d.log2(64).map(|r| r.to_f64()).unwrap_or(f64::NEG_INFINITY);
            tdim * l
        })
        .fold(f64::NEG_INFINITY, log2_add)
}

/// `Σ diam^t`; zero when the sum underflows `f64`.
pub fn hausdorff_sum(diams: &[DyadicReal], tdim: f64) -> f64 {
    hausdorff_sum_log2(diams, tdim).exp2()
}
