use dimone::numerics::DyadicReal;
use dimone::params::{omega_eval, ParamTable};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

/// Actual values `r_j`, `c_j` (not exponents) from the defining products, for small `j`.
fn direct_values(jmax: u32) -> Vec<(BigRational, BigRational)> {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut out = vec![(BigRational::zero(), BigRational::zero())];
    let mut r = BigRational::from_integer(BigInt::from(16));
    let mut c = BigRational::one();
    out.push((r.clone(), c.clone()));
    for j in 1..jmax {
        let mj = 1i32 << j;
        let next_r = &c * (&r / &two).pow(mj);
        // c_{j+1} = c_j · r_j^{M_j - M_{j+1}}
        let next_c = &c * r.pow(mj - 2 * mj);
        r = next_r;
        c = next_c;
        out.push((r.clone(), c.clone()));
    }
    out
}

fn log2_exact(q: &BigRational) -> i64 {
    let (n, d) = (q.numer(), q.denom());
    if d.is_one() {
        assert_eq!(n.trailing_zeros().unwrap() + 1, n.bits(), "not a power of two");
        n.bits() as i64 - 1
    } else {
        assert!(n.is_one());
        -(d.bits() as i64 - 1)
    }
}

#[test]
fn exponents_match_direct_products() {
    let direct = direct_values(6);
    let t = ParamTable::build(5, 4, 1.0).unwrap();
    for j in 1..=6u32 {
        let (r, c) = &direct[j as usize];
        assert_eq!(t.e(j).to_i64().unwrap(), log2_exact(r), "r_{j}");
        assert_eq!(t.eps(j).to_i64().unwrap(), log2_exact(c), "c_{j}");
    }
    assert_eq!(t.e(5), &BigInt::from(752));
    assert_eq!(t.eps(5), &BigInt::from(-1024));
    assert_eq!(t.e(6), &BigInt::from(23008));
}

#[test]
fn all_certificates_pass_for_reference_offsets() {
    for n in [5u32, 10, 14] {
        let t = ParamTable::build(n, 64, 1.0).unwrap();
        let rep = t.verify_inequalities();
        let bad: Vec<_> = rep.failures().collect();
        assert!(bad.is_empty(), "N={n}: {bad:?}");
        assert_eq!(rep.named("quotient_est_lower").count(), usize::from(n >= 10));
    }
}

#[test]
fn certificate_examples() {
    let t = ParamTable::build(5, 8, 1.0).unwrap();
    let rep = t.verify_inequalities();
    let c = rep.named("ckrkeq").find(|c| c.index == 4).unwrap();
    assert_eq!((c.lhs_exponent.as_str(), c.rhs_exponent.as_str()), ("768", "504"));
    let s = rep.named("sqrt_rk1_ge_rk").find(|c| c.index == 2).unwrap();
    assert_eq!((s.lhs_exponent.as_str(), s.rhs_exponent.as_str(), s.pass), ("6", "6", true));
}

#[test]
fn permissibility_fails_only_at_the_first_index() {
    let t = ParamTable::build(5, 4, 1.0).unwrap();
    assert!(!t.permissible_at(1).pass);
    assert!((2..t.jmax()).all(|j| t.permissible_at(j).pass));
}

#[test]
fn exponent_identity_holds_everywhere() {
    let t = ParamTable::build(5, 64, 1.0).unwrap();
    for j in 1..t.jmax() {
        let mj = BigInt::one() << j;
        assert_eq!(t.e(j + 1) + &mj, t.eps(j) + &mj * t.e(j));
    }
    for j in 1..=64u32 {
        assert!(t.r(j, 128).is_pow2());
    }
}

#[test]
fn alpha_beta_are_monotone_and_need_large_offset() {
    let t = ParamTable::build(5, 64, 1.0).unwrap();
    for k in 1..64 {
        assert!(t.alpha(k + 1) < t.alpha(k));
        assert!(t.beta(k + 1) > t.beta(k));
    }
    // With C' = 1 the 1/100 window needs k + N - 1 beyond about 700.
    assert!(!t.alpha_beta_ok(1));
    let nmin = ParamTable::alpha_beta_min_n(1.0);
    assert!((700..=720).contains(&nmin));
}

#[test]
fn k0_properties() {
    let t = ParamTable::build(10, 64, 1.0).unwrap();
    let k0 = t.k0().unwrap();
    for k in [k0, k0 + 1] {
        assert!(t.lnln_r_over_20(k).unwrap() >= k as f64 / 2.0);
    }
    // At k = 10: ln(e_10 ln 2 - ln 20).
    let e10 = t.e(10).to_f64().unwrap();
    let want = (e10 * std::f64::consts::LN_2 - 20f64.ln()).ln();
    assert!((t.lnln_r_over_20(10).unwrap() - want).abs() < 1e-12 * want);
}

#[test]
fn omega_of_huge_scale() {
    // r = 2^{-2^16}, p = 2√2.
    let p = 2.0 * 2f64.sqrt();
    let r = DyadicReal::pow2(-(1i64 << 16), 128);
    let want = 0.5f64.powf((65536.0 * std::f64::consts::LN_2).ln().sqrt() / p);
    assert!((omega_eval(p, &r).unwrap() - want).abs() < 1e-14);
    // ln ln(e^e) = 1, so ω_p = 2^{-1/p}.
    let r = DyadicReal::from_f64((-std::f64::consts::E).exp(), 128);
    assert!((omega_eval(p, &r).unwrap() - 0.5f64.powf(1.0 / p)).abs() < 1e-12);
    // Far beyond f64 range.
    let r = DyadicReal::pow2(-(BigInt::one() << 3000u32), 64);
    let lnln = 3000.0 * std::f64::consts::LN_2 + std::f64::consts::LN_2.ln();
    let want = 0.5f64.powf(lnln.sqrt() / p);
    assert!((omega_eval(p, &r).unwrap() - want).abs() < 1e-12 * want);
}

proptest! {
    #[test]
    fn omega_decreases_as_r_shrinks(a in 2i64..60, b in 2i64..60) {
        prop_assume!(a < b);
        let p = 2.0 * 2f64.sqrt();
        let wa = omega_eval(p, &DyadicReal::pow2(-(1i64 << a), 64)).unwrap();
        let wb = omega_eval(p, &DyadicReal::pow2(-(1i64 << b), 64)).unwrap();
        prop_assert!(wb < wa);
    }
}
