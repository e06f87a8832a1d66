use dimone::modelmap::{ModelMap, PieceId};
use dimone::numerics::{Angle, Cx, Flt, LogPolar, NumCtx, Rho};
use dimone::params::ParamTable;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn model(n: u32) -> ModelMap {
    ModelMap::new(ParamTable::build(n, 8, 1.0).unwrap(), NumCtx::default())
}

fn dec(s: &str) -> Flt {
    Flt::parse_decimal(s, 200).unwrap()
}

fn lp(rho: Rho, t: Angle) -> LogPolar {
    LogPolar::new(rho, t)
}

#[test]
fn power_piece_is_exact() {
    let m = model(5);
    for j in 6..=9u32 {
        let ej = m.table.e(j).clone();
        let z = lp(Rho::from_int(&ej - 3), Angle::zero());
        let (f, piece) = m.eval_model(&z).unwrap();
        assert_eq!(piece, PieceId::PowerAnnulus(j));
        let want = m.table.eps(j) + (BigInt::from(1) << j) * (&ej - 3);
        assert_eq!(f, LogPolar::pow2(want));
    }
}

#[test]
fn two_fifths_r2_reference() {
    let m = model(5);
    let l = dimone::numerics::flt::log2(&Flt::ratio(2, 5, 220), 220);
    let z = lp(Rho::from_int(23008).add(&Rho::from_flt(&l)), Angle::from_ratio(1, 9, 64));
    let (f, piece) = m.eval_model(&z).unwrap();
    assert_eq!(piece, PieceId::PowerAnnulus(6));
    // mpmath: -25088 + 64·(23008 + log2(2/5)).
    let want = dec("1447339.396601927208809736299556512679029");
    let d = f.rho.to_flt(200).sub(&want, 200);
    assert!(d.is_zero() || d.top() < -100);
}

#[test]
fn seam_zero_and_derivative() {
    let m = model(5);
    let j = 5;
    let w = m.seam_zero(j, &BigInt::from(7));
    let (f, piece) = m.eval_model(&w).unwrap();
    assert_eq!(piece, PieceId::SeamAnnulus(5));
    assert!(f.is_zero());

    // mpmath: log2|S'(w)| - (ε_5 + 32 e_5 - e_5) = 5 + 2q - q/32 with q = log2 e^{π/4}.
    let d = m.deriv_model(&w).unwrap();
    let base = m.table.eps(j) + m.table.e(j) * 31;
    let frac = d.rho.sub(&Rho::from_int(base)).to_f64();
    assert!((frac - 7.230771007305571953).abs() < 1e-15);

    // Finite-difference quotient in shifted coordinates.
    let u = Cx::from_f64(1.0, 0.3).ldexp(-40);
    let s = m.eval_near_zero(j, &u);
    let ul = LogPolar::from_cx(&u, &m.ctx);
    let fd = s.rho.sub(&w.rho).sub(&ul.rho);
    assert!((fd.sub(&d.rho).to_f64()).abs() < 1.5e-6);
}

#[test]
fn near_zero_agrees_with_direct_evaluation() {
    let m = model(5);
    for (j, b) in [(5u32, 0i64), (6, 40), (7, 127)] {
        let u = Cx::from_f64(-0.7, 0.45).ldexp(-(1i64 << j) - 3);
        let br = BigInt::from(b);
        let z = m.near_zero(j, &br, &u);
        let (direct, piece) = m.eval_model(&z).unwrap();
        assert_eq!(piece, PieceId::SeamAnnulus(j));
        let local = m.eval_near_zero(j, &u);
        assert!(direct.rho.sub(&local.rho).to_f64().abs() < 1e-30);
        assert!(direct.theta.sub(&local.theta).centered().to_f64().abs() < 1e-30);
    }
}

#[test]
fn qn_landmarks_oracle() {
    let m = model(5);
    let l = m.qn_landmarks().unwrap();
    assert_eq!(l.zeros.len(), 32);
    assert_eq!(l.crit_points.len(), 31);
    // |q_N'(0)| = r_N.
    let d0 = m.deriv_piece(PieceId::OriginPoly, &LogPolar::zero()).unwrap();
    assert_eq!(d0, LogPolar::pow2(752));
    // r_N (M_N - 1) = 31·2^752.
    assert_eq!(l.deriv_at_zero.to_sci(6), "1.937500×2^756");
    let want_l2 = 4.954196310386875208806123599175554423549;
    for z in &l.zeros[1..] {
        let scale = z.rho.add(&Rho::from_int(752));
        let q = m.eval_piece(PieceId::OriginPoly, z).unwrap();
        assert!(q.is_zero() || q.rho < scale.add_int(&BigInt::from(-100)));
        let d = m.deriv_piece(PieceId::OriginPoly, z).unwrap();
        let rel = d.rho.sub(&Rho::from_int(752)).to_f64() - want_l2;
        assert!(rel.abs() < 1e-12 / std::f64::consts::LN_2);
    }
    for (c, v) in l.crit_points.iter().zip(&l.crit_values) {
        let d = m.deriv_piece(PieceId::OriginPoly, c).unwrap();
        assert!(d.is_zero() || d.rho < Rho::from_int(752 - 100));
        let q = m.eval_piece(PieceId::OriginPoly, c).unwrap();
        assert!(q.rho.sub(&v.rho).to_f64().abs() < 1e-30);
        assert!(q.theta.sub(&v.theta).centered().to_f64().abs() < 1e-30);
        assert!(v.rho > Rho::from_int(755) && v.rho < Rho::from_int(23008 - 5));
    }
}

#[test]
fn qn_sandwich_on_middle_annulus() {
    let m = model(5);
    let c = m.table.eps(5).to_i64().unwrap() as f64;
    for i in 0..64 {
        let frac = 0.05 + 0.9 * (i as f64 + 0.5) / 64.0;
        let r = Rho::from_int(752).add(&Rho::from_f64(frac.log2()));
        let z = lp(r.clone(), Angle::from_ratio(i, 64, 64));
        let q = m.eval_qn(&z);
        let rel = q.rho.to_f64() - (c + 32.0 * r.to_f64());
        assert!((-1.0..=1.0).contains(&rel), "{frac}: {rel}");
    }
}

#[test]
fn seam_critical_values() {
    let m = model(5);
    for j in 5..8u32 {
        let c = m.seam_critical_point(j, &BigInt::from(3));
        assert_eq!(m.piece_of(&c).unwrap(), PieceId::SeamAnnulus(j));
        let d = m.deriv_piece(PieceId::SeamAnnulus(j), &c).unwrap();
        assert!(d.is_zero() || d.rho < c.rho.add_int(&BigInt::from(-100)));
        let v = m.eval_piece(PieceId::SeamAnnulus(j), &c).unwrap();
        assert!(v.rho.sub(&m.seam_critical_value(j)).to_f64().abs() < 1e-30);
    }
}

#[test]
fn seam_mismatch_bounds() {
    let m = model(5);
    let a = m.seam_mismatch(5, 256).unwrap();
    let b = m.seam_mismatch(6, 256).unwrap();
    // log2(1 + e^{π/4}) and -log2(1 - e^{-3π/4}).
    assert!(a.inner_max_log2_ratio <= 1.675039082846557 + 1e-12);
    assert!(a.inner_max_log2_ratio > 1.67);
    assert!(a.outer_max_log2_ratio <= 0.1436599932581092 + 1e-12);
    assert!(a.outer_max_log2_ratio > 0.143);
    assert!((a.inner_max_log2_ratio - b.inner_max_log2_ratio).abs() < 1e-3);
    assert!((a.outer_max_log2_ratio - b.outer_max_log2_ratio).abs() < 1e-3);
}

#[test]
fn dilatation_is_small_and_decreasing() {
    let m = model(5);
    let mut prev = f64::INFINITY;
    for k in 5..=13 {
        let d = m.dilatation_sup(k, 64).unwrap();
        assert_eq!(d.flagged, 0);
        assert!(d.sup < 1.0 && d.log2_sup < 0.0);
        assert!(d.log2_sup < prev);
        prev = d.log2_sup;
    }
}

#[test]
fn deriv_rejects_boundary_points() {
    let m = model(5);
    let z = lp(Rho::from_int(752), Angle::zero());
    assert!(matches!(m.deriv_model(&z), Err(dimone::Error::Ambiguous(_, _))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_point_has_one_piece(r in 0.0f64..30000.0, t in 0u64..1024) {
        let m = model(5);
        let z = lp(Rho::from_f64(r), Angle::from_fixed(BigInt::from(t), 10));
        let p = m.piece_of(&z).unwrap();
        let starts = m.piece_starts();
        let i = starts.iter().position(|(q, _)| *q == p).unwrap();
        if p != PieceId::OriginPoly {
            prop_assert!(starts[i].1.log2(200).unwrap() <= z.rho);
        }
        if let Some((_, hi)) = starts.get(i + 1) {
            prop_assert!(z.rho < hi.log2(200).unwrap());
        }
    }
}

fn close(a: &LogPolar, b: &LogPolar, bits: f64) -> bool {
    let dr = a.rho.sub(&b.rho).to_f64().abs();
    let dt = a.theta.sub(&b.theta).centered().to_f64().abs();
    dr < bits.exp2() && dt < bits.exp2()
}

#[test]
fn power_preimage_round_trip() {
    let m = model(5);
    let t = lp(Rho::from_int(1_447_000), Angle::from_ratio(3, 7, 64));
    for b in [0i64, 1, 63] {
        let z = m.power_preimage(6, &t, &BigInt::from(b)).unwrap();
        assert_eq!(m.eval_power(6, &z), t);
    }
}

#[test]
fn seam_preimage_round_trip() {
    let m = model(5);
    let j = 5;
    // Targets well inside the petal image, at several sizes below the seam scale.
    let scale = m.seam_scale(j);
    for (drop, turn) in [(8i64, 1i64), (40, 3), (300, 5)] {
        let t = lp(scale.add_int(&BigInt::from(-drop)), Angle::from_ratio(turn, 11, 64));
        let z = m.seam_preimage(j, &BigInt::from(9), &t).unwrap();
        let (f, piece) = m.eval_model(&z).unwrap();
        assert_eq!(piece, PieceId::SeamAnnulus(j));
        assert!(close(&f, &t, -60.0), "drop {drop}: {f} vs {t}");
    }
    let big = lp(scale.clone(), Angle::zero());
    assert!(matches!(m.seam_preimage(j, &BigInt::from(0), &big), Err(dimone::Error::Domain(_))));
}

#[test]
fn qn_preimage_round_trip() {
    let m = model(5);
    let t = lp(Rho::from_int(754), Angle::from_ratio(5, 13, 64));
    let mut seen = Vec::new();
    for b in [0i64, 1, 2, 16, 31] {
        let z = m.qn_preimage(&t, &BigInt::from(b)).unwrap();
        let q = m.eval_qn(&z);
        assert!(close(&q, &t, -60.0), "branch {b}: {q} vs {t}");
        assert!(seen.iter().all(|w: &LogPolar| !close(w, &z, -20.0)));
        seen.push(z);
    }
    assert!(m.qn_preimage(&t, &BigInt::from(32)).is_err());
}
