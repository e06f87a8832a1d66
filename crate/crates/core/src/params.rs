//! The parameter sequences `M_j`, `r_j`, `c_j` and their re-indexed forms.
//!
//! Every `r_j` and `c_j` is an exact power of two, so the table stores only the
//! exponents `e_j = log₂ r_j` and `ε_j = log₂ c_j`. They obey
//!
//! ```text
//! e_{j+1} = ε_j + M_j (e_j - 1),    ε_{j+1} = ε_j - M_j e_j,    M_j = 2^j
//! ```
//!
//! starting from `r_1 = 16`, `c_1 = 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{BigExp, DyadicReal};
use crate::report::{Certificate, CertificateReport};

/// Largest exponent bit-length the table will hold.
pub const EXP_BITS_MAX: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct ParamTable {
    /// The level offset `N`.
    pub n: u32,
    pub kmax: u32,
    /// Distortion constant `C'`.
    pub cprime: f64,
    /// Radius `R` the distortion estimate is stated beyond (used by `k0`).
    pub r_far: f64,
    e: Vec<BigInt>,
    eps: Vec<BigInt>,
    k0: Option<u32>,
}

/// `M_j = 2^j`.
pub fn m(j: u32) -> BigInt {
    BigInt::one() << j
}

/// Natural log of a positive integer of any size.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let b = x.bits();
    if b <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let lead = (x >> (b - 64)).to_f64().unwrap();
    lead.ln() + (b - 64) as f64 * std::f64::consts::LN_2
}

impl ParamTable {
    /// Build exponents up to `j = kmax + N + 1`, so `R_{kmax+2}` is available.
    pub fn build(n: u32, kmax: u32, cprime: f64) -> Result<Self> {
        if n < 5 {
            return Err(Error::Contract(format!("N must be >= 5, got {n}")));
        }
        if kmax < 1 {
            return Err(Error::Contract("kmax must be >= 1".into()));
        }
        let jmax = kmax + n + 1;
        let mut e = vec![BigInt::zero(), BigInt::from(4)];
        let mut eps = vec![BigInt::zero(), BigInt::zero()];
        for j in 1..jmax {
            let ju = j as usize;
            let mj = m(j);
            let next_e = &eps[ju] + &mj * (&e[ju] - BigInt::one());
            let next_eps = &eps[ju] - &mj * &e[ju];
            if next_e.bits() > EXP_BITS_MAX || next_eps.bits() > EXP_BITS_MAX {
                return Err(Error::Resource(format!("exponent of r_{} exceeds {} bits", j + 1, EXP_BITS_MAX)));
            }
            e.push(next_e);
            eps.push(next_eps);
        }
        let mut t = ParamTable { n, kmax, cprime, r_far: 16.0, e, eps, k0: None };
        t.k0 = t.compute_k0();
        Ok(t)
    }

    /// Same table with a different `R` for the `k0` condition.
    pub fn with_r_far(mut self, r_far: f64) -> Self {
        self.r_far = r_far;
        self.k0 = self.compute_k0();
        self
    }

    pub fn jmax(&self) -> u32 {
        (self.e.len() - 1) as u32
    }

    /// `e_j = log₂ r_j`, `j ≥ 1`.
    pub fn e(&self, j: u32) -> &BigInt {
        assert!(j >= 1, "r_j is defined for j >= 1");
        &self.e[j as usize]
    }

    /// `ε_j = log₂ c_j`, `j ≥ 1`.
    pub fn eps(&self, j: u32) -> &BigInt {
        assert!(j >= 1, "c_j is defined for j >= 1");
        &self.eps[j as usize]
    }

    pub fn r(&self, j: u32, prec: u32) -> DyadicReal {
        DyadicReal::pow2(self.e(j).clone(), prec)
    }

    pub fn c(&self, j: u32, prec: u32) -> DyadicReal {
        DyadicReal::pow2(self.eps(j).clone(), prec)
    }

    pub fn r_exp(&self, j: u32) -> BigExp {
        BigExp(self.e(j).clone())
    }

    /// `j = k + N - 1`, the raw index behind `n_k`, `R_k`, `C_k`.
    pub fn j_of(&self, k: u32) -> u32 {
        k + self.n - 1
    }

    /// `log₂ n_k = k + N - 1`.
    pub fn nk_shift(&self, k: u32) -> u32 {
        self.j_of(k)
    }

    pub fn nk(&self, k: u32) -> BigInt {
        m(self.nk_shift(k))
    }

    /// `log₂ R_k`.
    pub fn big_r(&self, k: u32) -> &BigInt {
        self.e(self.j_of(k))
    }

    /// `log₂ C_k`.
    pub fn big_c(&self, k: u32) -> &BigInt {
        self.eps(self.j_of(k))
    }

    /// Largest `k` with `R_{k+1}` in the table.
    pub fn k_limit(&self) -> u32 {
        self.jmax() - self.n
    }

    /// `C'·2^{-√(k+N-1)/4}`.
    fn dist_budget(&self, k: u32) -> f64 {
        self.cprime * 0.5f64.powf(((k + self.n - 1) as f64).sqrt() / 4.0)
    }

    /// `α_k = 1 / (1 - C'·2^{-√(k+N-1)/4})`; infinite when the budget reaches 1.
    pub fn alpha(&self, k: u32) -> f64 {
        let d = self.dist_budget(k);
        if d >= 1.0 {
            f64::INFINITY
        } else {
            1.0 / (1.0 - d)
        }
    }

    /// `β_k = 1 / (1 + C'·2^{-√(k+N-1)/4})`.
    pub fn beta(&self, k: u32) -> f64 {
        1.0 / (1.0 + self.dist_budget(k))
    }

    /// Whether `99/100 < β_k < 1 < α_k < 101/100`.
    pub fn alpha_beta_ok(&self, k: u32) -> bool {
        let (a, b) = (self.alpha(k), self.beta(k));
        0.99 < b && b < 1.0 && 1.0 < a && a < 1.01
    }

    /// Smallest `N` for which the window holds at every `k ≥ 1` with this `C'`.
    pub fn alpha_beta_min_n(cprime: f64) -> u32 {
        // Both sides tighten as k+N-1 grows, so k = 1 is the binding case.
        let mut n = 1u32;
        loop {
            let d = cprime * 0.5f64.powf((n as f64).sqrt() / 4.0);
            if 1.0 / (1.0 + d) > 0.99 && d < 1.0 && 1.0 / (1.0 - d) < 1.01 {
                return n;
            }
            n += 1;
        }
    }

    /// `ln ln(r_j / 20)`, or `None` if `r_j ≤ 20·e`.
    pub fn lnln_r_over_20(&self, j: u32) -> Option<f64> {
        let e = self.e(j);
        let l = if e.bits() <= 1000 {
            e.to_f64().unwrap() * std::f64::consts::LN_2 - 20f64.ln()
        } else {
            return Some(ln_bigint(e) + std::f64::consts::LN_2.ln());
        };
        if l <= 1.0 {
            None
        } else {
            Some(l.ln())
        }
    }

    fn k0_condition(&self, k: u32) -> bool {
        self.lnln_r_over_20(k).is_some_and(|v| v >= k as f64 / 2.0)
    }

    fn compute_k0(&self) -> Option<u32> {
        let need = (20.0 * self.r_far).log2();
        let top = self.jmax();
        (1..=top).find(|&k| {
            self.e(k).to_f64().unwrap_or(f64::INFINITY) >= need && (k..=top).all(|kk| self.k0_condition(kk))
        })
    }

    /// Smallest `k` with `ln ln(r_k/20) ≥ k/2` from there on and `r_k ≥ 20R`.
    pub fn k0(&self) -> Option<u32> {
        self.k0
    }

    /// Rows of `(j, M_j, log₂ c_j, log₂ r_j)`.
    pub fn rows(&self, upto: u32) -> Vec<ParamRow> {
        (1..=upto.min(self.jmax()))
            .map(|j| ParamRow {
                j,
                m: m(j).to_string(),
                log2_c: self.eps(j).to_string(),
                log2_r: self.e(j).to_string(),
            })
            .collect()
    }

    /// Permissibility `r_{j+1} ≥ e^{π/M_j} r_j` at one index.
    pub fn permissible_at(&self, j: u32) -> Certificate {
        let gap = self.e(j + 1) - self.e(j);
        let need = std::f64::consts::PI / (2f64.powi(j as i32) * std::f64::consts::LN_2);
        // `need` is rounded up by a relative 1e-12 before comparing.
        let pass = gap.to_f64().unwrap_or(f64::INFINITY) >= need * (1.0 + 1e-12);
        Certificate::new("permissible", j as i64, &gap, format!("{need:.12}"), pass)
    }

    /// Every growth inequality and identity, in exact exponent arithmetic.
    pub fn verify_inequalities(&self) -> CertificateReport {
        let mut rep = CertificateReport::default();
        let top = self.jmax();
        let two = BigInt::from(2);

        rep.push(Certificate::gt("r2_gt_r1", 1, self.e(2), self.e(1)));
        for k in 3..top {
            let mk = m(k);
            let lhs = &mk * self.e(k) + self.eps(k);
            let rhs = (m(k - 1) + 1) * self.e(k);
            rep.push(Certificate::ge("ckrkeq", k as i64, &lhs, &rhs));
        }
        for k in 2..top {
            // √r_{k+1} ≥ r_k, compared as e_{k+1} ≥ 2 e_k.
            let lhs = BigRational::new(self.e(k + 1).clone(), two.clone());
            let rhs = BigRational::from_integer(self.e(k).clone());
            rep.push(Certificate::ge_q("sqrt_rk1_ge_rk", k as i64, &lhs, &rhs));
        }
        for k in 3..top {
            let rhs = -m(k) + (m(k - 1) + 1) * self.e(k);
            rep.push(Certificate::ge("rk1_ge_2mk_rk_pow", k as i64, self.e(k + 1), &rhs));
        }
        for k in 5..top {
            rep.push(Certificate::ge("rk1_ge_2_pow_mk", k as i64, self.e(k + 1), &m(k)));
            let rhs = &two + &two * self.e(k);
            rep.push(Certificate::ge("rk1_ge_4rk2", k as i64, self.e(k + 1), &rhs));
        }
        for k in 1..=self.k_limit() {
            let n_k = self.nk(k);
            let n_km1 = m(self.nk_shift(k) - 1);
            let rk = self.big_r(k);
            let lhs = &n_k * rk + self.big_c(k);
            let rhs = (&n_km1 + 1) * rk;
            rep.push(Certificate::ge("Rk_nk_Ck", k as i64, &lhs, &rhs));
            let rhs = -&n_k + (&n_km1 + 1) * rk;
            rep.push(Certificate::ge("Rk1_lower", k as i64, self.big_r(k + 1), &rhs));
            rep.push(Certificate::ge("Rk_double_exp", k as i64, rk, &m(k + self.n - 2)));
            let rhs = &two + &two * rk;
            rep.push(Certificate::ge("Rk1_ge_4Rk2", k as i64, self.big_r(k + 1), &rhs));
            // C_k R_k^{n_k} = 2^{n_k} R_{k+1}.
            let lhs = self.big_c(k) + &n_k * rk;
            let rhs = &n_k + self.big_r(k + 1);
            rep.push(Certificate::eq("Ck_Rk_nk_identity", k as i64, &lhs, &rhs));
        }
        for k in 1..=self.k_limit() {
            let lhs = BigInt::from(self.nk_shift(k) + 1);
            rep.push(Certificate::eq("nk_double", k as i64, &lhs, &BigInt::from(self.nk_shift(k + 1))));
            let sum: BigInt = m(self.n) + (1..=k).map(|i| self.nk(i)).sum::<BigInt>();
            let target = self.nk(k + 1);
            rep.push(Certificate::new("nk_sum", k as i64, &sum, &target, sum == target));
        }
        for k in 2..=top {
            let sum: BigInt = (0..=k - 2).map(m).sum();
            let rhs = m(k - 1) - 1;
            rep.push(Certificate::new("mj_sum", k as i64, &sum, &rhs, sum == rhs));
        }
        for j in 1..top {
            let lhs = self.e(j + 1) + m(j);
            let rhs = self.eps(j) + m(j) * self.e(j);
            rep.push(Certificate::eq("r_recurrence", j as i64, &lhs, &rhs));
        }
        for j in 2..=top {
            let rhs = self.eps(j - 1) + (m(j - 1) - m(j)) * self.e(j - 1);
            rep.push(Certificate::eq("c_recurrence", j as i64, self.eps(j), &rhs));
        }
        for j in self.n..top {
            rep.push(self.permissible_at(j));
        }
        if self.n >= 10 {
            let (lo, mid, hi) = self.quotient_est_exponents();
            rep.push(Certificate::ge_q("quotient_est_lower", self.n as i64, &mid, &lo));
            rep.push(Certificate::ge_q("quotient_est_upper", self.n as i64, &hi, &mid));
        }
        rep
    }

    /// Base-2 exponents of `2^{M_{N-7}} r_{N-1}`, `(r_N/(c_N M_N))^{1/(M_N-1)}` and `r_{N-1}²/√2`.
    pub fn quotient_est_exponents(&self) -> (BigRational, BigRational, BigRational) {
        let n = self.n;
        let lo = BigRational::from_integer(m(n - 7) + self.e(n - 1));
        let num = self.e(n) - self.eps(n) - BigInt::from(n);
        let mid = BigRational::new(num, m(n) - 1);
        let hi = BigRational::from_integer(BigInt::from(2) * self.e(n - 1)) - BigRational::new(1.into(), 2.into());
        (lo, mid, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamRow {
    pub j: u32,
    pub m: String,
    pub log2_c: String,
    pub log2_r: String,
}

/// `ω_p(r) = (1/2)^{√(ln ln r⁻¹)/p}` with natural logs, from the exponent field of `r`.
pub fn omega_eval(p: f64, r: &DyadicReal) -> Result<f64> {
    if r.sign() <= 0 {
        return Err(Error::Domain("omega needs r > 0".into()));
    }
    let lnln = lnln_inv(r)?;
    if lnln < 0.0 {
        return Err(Error::Domain("omega needs ln ln(1/r) >= 0, i.e. r <= 1/e".into()));
    }
    Ok(0.5f64.powf(lnln.sqrt() / p))
}

/// `ln ln (1/r)` for `0 < r < 1`.
pub fn lnln_inv(r: &DyadicReal) -> Result<f64> {
    let x = r.exponent();
    if x.bits() <= 1000 {
        let l2 = -(x.to_f64().unwrap() + r.significand().to_f64().log2());
        if l2 <= 0.0 {
            return Err(Error::Domain("omega needs r < 1".into()));
        }
        Ok((l2 * std::f64::consts::LN_2).ln())
    } else if x.is_negative() {
        Ok(ln_bigint(&-x) + std::f64::consts::LN_2.ln())
    } else {
        Err(Error::Domain("omega needs r < 1".into()))
    }
}

/// `ω_p` at `1/|z|` for `log₂|z| = rho` (any size).
pub fn omega_at_log2(p: f64, rho_int: &BigInt) -> Result<f64> {
    omega_eval(p, &DyadicReal::pow2(-rho_int.clone(), 64))
}

/// `⌈a/b⌉` on integers, for budget arithmetic.
pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_head() {
        let t = ParamTable::build(5, 4, 1.0).unwrap();
        let e: Vec<i64> = (1..=4).map(|j| t.e(j).to_i64().unwrap()).collect();
        let c: Vec<i64> = (1..=4).map(|j| t.eps(j).to_i64().unwrap()).collect();
        assert_eq!(e, [4, 6, 12, 56]);
        assert_eq!(c, [0, -8, -32, -128]);
    }

    #[test]
    fn omega_examples() {
        let r = DyadicReal::from_f64((-(4f64.exp())).exp(), 128);
        assert!((omega_eval(1.0, &r).unwrap() - 0.25).abs() < 1e-12);
        assert!(omega_eval(1.0, &DyadicReal::from_f64(0.5, 64)).is_err());
    }

    #[test]
    fn k0_is_three_by_default() {
        let t = ParamTable::build(5, 8, 1.0).unwrap();
        assert_eq!(t.k0(), Some(3));
    }
}
