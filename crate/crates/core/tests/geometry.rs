use dimone::geometry::{classify, level_lines, petal_spec, zeros_in_annulus, Region};
use dimone::modelmap::ModelMap;
use dimone::numerics::{flt, Angle, Cx, Flt, LogPolar, NumCtx, Rho};
use dimone::params::ParamTable;
use num_bigint::BigInt;
use proptest::prelude::*;

fn model(n: u32) -> ModelMap {
    ModelMap::new(ParamTable::build(n, 8, 1.0).unwrap(), NumCtx::default())
}

fn at(ej: i64, factor: f64, turn: i64) -> LogPolar {
    LogPolar::new(
        Rho::from_int(ej).add(&Rho::from_flt(&flt::log2(&Flt::from_f64(factor), 128))),
        Angle::from_ratio(turn, 97, 64),
    )
}

#[test]
fn tags_across_one_annulus() {
    let m = model(5);
    let e = 752;
    let cases = [
        (0.1, Region::OriginDisk),
        (0.3, Region::Ak(1)),
        (0.5, Region::Vk(1)),
        (0.9, Region::Ak(1)),
        (3.0, Region::Ak(1)),
        (5.0, Region::Bk(1)),
    ];
    for (f, want) in cases {
        assert_eq!(classify(&m, &at(e, f, 1), 0.0).unwrap(), want, "{f}");
    }
    let far = LogPolar::new(Rho::from_int(23008 - 3), Angle::zero());
    assert_eq!(classify(&m, &far, 0.0).unwrap(), Region::Bk(1));
    let next = LogPolar::new(Rho::from_int(23008), Angle::zero());
    assert_eq!(classify(&m, &next, 0.0).unwrap(), Region::Ak(2));
    assert_eq!(classify(&m, &LogPolar::zero(), 0.0).unwrap(), Region::OriginDisk);
}

#[test]
fn margin_marks_boundaries() {
    let m = model(5);
    let z = at(752, 0.4, 0);
    assert_eq!(classify(&m, &at(752, 0.402, 0), 0.01).unwrap(), Region::Boundary);
    assert_eq!(classify(&m, &at(752, 0.45, 0), 0.01).unwrap(), Region::Vk(1));
    assert_eq!(classify(&m, &z, 0.5).unwrap(), Region::Boundary);
}

#[test]
fn petals_around_zeros() {
    let m = model(5);
    let j = 5;
    let n = 32i64;
    let w = m.seam_zero(j, &BigInt::from(4));
    assert_eq!(classify(&m, &w, 0.0).unwrap(), Region::Petal(1, BigInt::from(5)));
    // Radius ratio is 2^{-n} e^{-π/(4n)}; sit just inside and just outside.
    let ratio = (-(n as f64)).exp2() * (-std::f64::consts::PI / (4.0 * n as f64)).exp();
    for (f, inside) in [(0.98, true), (1.02, false)] {
        let u = Cx::from_f64(0.6 * f * ratio / (-(n as f64)).exp2(), 0.8 * f * ratio / (-(n as f64)).exp2())
            .ldexp(-n);
        let z = m.near_zero(j, &BigInt::from(4), &u);
        let tag = classify(&m, &z, 0.0).unwrap();
        assert_eq!(tag == Region::Petal(1, BigInt::from(5)), inside, "{f}: {tag}");
        if !inside {
            assert_eq!(tag, Region::Ak(1));
        }
    }
    let u = Cx::from_f64(ratio / (-(n as f64)).exp2(), 0.0).ldexp(-n);
    let edge = m.near_zero(j, &BigInt::from(4), &u);
    assert_eq!(classify(&m, &edge, 1e-3).unwrap(), Region::Boundary);
}

#[test]
fn region_strings() {
    let tags = [
        (Region::Ak(2), "A(2)"),
        (Region::Bk(1), "B(1)"),
        (Region::Vk(3), "V(3)"),
        (Region::Petal(1, BigInt::from(7)), "P(1,7)"),
        (Region::OriginDisk, "D"),
        (Region::LevelLineZone(2), "L(2)"),
        (Region::Boundary, "boundary"),
    ];
    for (r, s) in tags {
        assert_eq!(r.to_string(), s);
    }
}

#[test]
fn petal_specs_fit_inside_conformal_balls() {
    let m = model(5);
    for k in 1..=4u32 {
        let p = petal_spec(&m, k, &BigInt::from(1));
        assert!(p.radius_inside_conformal(), "k = {k}");
        assert_eq!(classify(&m, &p.center, 0.0).unwrap(), Region::Petal(k as i64, BigInt::from(1)));
    }
}

#[test]
fn zero_lists() {
    let m = model(5);
    let z = zeros_in_annulus(&m, 1).unwrap();
    assert_eq!(z.len(), 32);
    for w in &z {
        let (f, _) = m.eval_model(w).unwrap();
        assert!(f.is_zero());
    }
    assert!(matches!(zeros_in_annulus(&m, 20), Err(dimone::Error::Resource(_))));
}

#[test]
fn level_lines_expand() {
    let m = model(5);
    let l = level_lines(&m, 2, 16).unwrap();
    assert_eq!(l.count, (BigInt::from(1) << 10u32).to_string());
    assert!(l.failures.is_empty(), "{:?}", l.failures);
    // Near 0 the derivative is exactly R_1, elsewhere about 31 R_1.
    assert!(l.expansion_check > 1.0 - 1e-9, "{}", l.expansion_check);
    assert!(l.expansion_away_from_origin > 16.0, "{}", l.expansion_away_from_origin);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tag_index_matches_scale(r in 700.0f64..60000.0, t in 0i64..4096) {
        let m = model(5);
        let z = LogPolar::new(Rho::from_f64(r), Angle::from_ratio(t, 4096, 64));
        let tag = classify(&m, &z, 0.0).unwrap();
        if let Some(k) = tag.index() {
            let j = (k + 4) as u32;
            prop_assert!(r >= m.table.e(j).to_string().parse::<f64>().unwrap() - 2.0);
            prop_assert!(r < m.table.e(j + 1).to_string().parse::<f64>().unwrap() - 2.0);
        }
    }
}
