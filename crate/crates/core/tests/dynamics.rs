use dimone::dynamics::{
    backward_construct, check_itinerary, check_singular_values, inverse_step, iterate_orbit, verify_inclusions,
    InverseBranchSpec as B, OrbitClass,
};
use dimone::geometry::Region;
use dimone::modelmap::ModelMap;
use dimone::numerics::{flt, Angle, Flt, LogPolar, NumCtx, Rho};
use dimone::params::ParamTable;
use num_bigint::BigInt;
use proptest::prelude::*;

fn model(n: u32, kmax: u32) -> ModelMap {
    ModelMap::new(ParamTable::build(n, kmax, 1.0).unwrap(), NumCtx::default())
}

fn scaled(m: &ModelMap, k: u32, p: i64, q: i64, turn: (i64, i64)) -> LogPolar {
    let l = flt::log2(&Flt::ratio(p, q, 220), 200);
    let r = Rho::from_int(m.table.big_r(k).clone()).add(&Rho::from_flt(&l));
    LogPolar::new(r, Angle::from_ratio(turn.0, turn.1, 64))
}

#[test]
fn b_points_escape() {
    let m = model(5, 8);
    let z = scaled(&m, 1, 8, 1, (1, 7));
    let o = iterate_orbit(&m, &z, 10, 0.0);
    assert_eq!(o.classification, OrbitClass::FatouEscape(1));
    assert_eq!(o.regions, vec![Region::Bk(1), Region::Bk(2)]);
    assert_eq!(o.classification.to_string(), "fatou-escape(1)");
}

#[test]
fn five_quarters_circle_lands_in_next_b() {
    let m = model(5, 8);
    for k in 1..=3 {
        let o = iterate_orbit(&m, &scaled(&m, k, 5, 4, (2, 11)), 5, 0.0);
        assert_eq!(o.regions[0], Region::Ak(k as i64));
        assert_eq!(o.regions[1], Region::Bk(k as i64 + 1));
    }
}

#[test]
fn origin_is_an_e_candidate() {
    let m = model(5, 8);
    let o = iterate_orbit(&m, &LogPolar::zero(), 6, 0.0);
    assert_eq!(o.classification, OrbitClass::ECandidate);
    assert_eq!(o.regions.len(), 7);
}

#[test]
fn inverse_branches_round_trip() {
    let m = model(5, 8);
    let tol = (-64f64).exp2();
    let t = scaled(&m, 3, 1, 2, (5, 17));
    let z = inverse_step(&m, &t, &B::v(2, 37), tol).unwrap();
    assert_eq!(m.eval_model(&z).unwrap().0, t);
    let z = inverse_step(&m, &t, &B::petal(2, 40), tol).unwrap();
    assert_eq!(dimone::geometry::classify(&m, &z, 0.0).unwrap(), Region::Petal(2, BigInt::from(40)));
    let t1 = scaled(&m, 1, 3, 1, (1, 3));
    let z = inverse_step(&m, &t1, &B::origin(9), tol).map_err(|e| e.to_string()).unwrap();
    assert_eq!(dimone::geometry::classify(&m, &z, 0.0).unwrap(), Region::OriginDisk);
    assert!(inverse_step(&m, &t, &B::petal(2, 0), tol).is_err());
}

#[test]
fn petal_preimage_of_outer_circle_stays_in_the_ball() {
    let m = model(5, 8);
    for k in 1..=3u32 {
        let t = scaled(&m, k + 1, 4, 1, (1, 5));
        let z = inverse_step(&m, &t, &B::petal(k, 1), (-64f64).exp2()).unwrap();
        let tag = dimone::geometry::classify(&m, &z, 0.0).unwrap();
        assert_eq!(tag, Region::Petal(k as i64, BigInt::from(1)));
    }
}

#[test]
fn itinerary_rules() {
    assert!(check_itinerary(&[B::v(1, 0), B::v(2, 0), B::petal(3, 1), B::v(2, 5)]).is_ok());
    let e = check_itinerary(&[B::v(1, 0), B::v(3, 0)]).unwrap_err();
    assert!(e.to_string().contains("step 1: V(1)#0 -> V(3)#0"), "{e}");
    assert!(check_itinerary(&[B::v(1, 0), B::origin(0)]).is_err());
    assert!(check_itinerary(&[B::petal(2, 1), B::origin(3), B::origin(0), B::petal(1, 2)]).is_ok());
    let s: B = "P(3,17)".parse().unwrap();
    assert_eq!(s, B::petal(3, 17));
    assert_eq!("V(2)#5".parse::<B>().unwrap(), B::v(2, 5));
    assert_eq!("D#4".parse::<B>().unwrap(), B::origin(4));
}

#[test]
fn all_v_itinerary() {
    let m = model(5, 16);
    let it: Vec<B> = (1..=12).map(|k| B::v(k, (k as i64 * 7) % 32)).collect();
    let anchor = scaled(&m, 13, 1, 2, (1, 3));
    let b = backward_construct(&m, &it, &anchor).unwrap();
    assert_eq!(b.record.classification, OrbitClass::Z1Like(0));
    assert!(b.record.backwards_events.is_empty());
    assert_eq!(b.ctx, m.ctx);
}

#[test]
fn petal_then_v_is_z1_like() {
    let m = model(5, 16);
    let mut it = vec![B::petal(1, 3)];
    it.extend((2..=10).map(|k| B::v(k, 1)));
    let anchor = scaled(&m, 11, 1, 2, (1, 3));
    let b = backward_construct(&m, &it, &anchor).unwrap();
    assert_eq!(b.record.classification, OrbitClass::Z1Like(1));
    assert!(b.record.backwards_events.is_empty());
    // P_1 -> V_1 is a backward move.
    let mut it = vec![B::petal(1, 3)];
    it.extend((1..=9).map(|k| B::v(k, 1)));
    let anchor = scaled(&m, 10, 1, 2, (1, 3));
    let b = backward_construct(&m, &it, &anchor).unwrap();
    assert_eq!(b.record.classification, OrbitClass::YLike(1));
}

#[test]
fn petal_to_petal_is_y_like() {
    let m = model(5, 8);
    let it = vec![B::petal(1, 2), B::petal(1, 5), B::v(2, 3), B::v(3, 4)];
    let anchor = scaled(&m, 4, 1, 2, (1, 9));
    let b = backward_construct(&m, &it, &anchor).unwrap();
    assert_eq!(b.record.classification, OrbitClass::YLike(1));
    assert_eq!(b.record.backwards_events, vec![1]);
}

#[test]
fn late_petals_are_z2_like() {
    let m = model(5, 12);
    let it: Vec<B> = (1..=8u32)
        .map(|k| if [2, 3, 5].contains(&k) { B::petal(k, 7) } else { B::v(k, 1) })
        .collect();
    let anchor = scaled(&m, 9, 1, 2, (1, 9));
    let b = backward_construct(&m, &it, &anchor).unwrap();
    assert_eq!(b.record.classification, OrbitClass::Z2Like);
    assert!(b.record.backwards_events.is_empty());
}

#[test]
fn deep_backward_moves_exceed_the_budget() {
    let m = model(5, 8);
    let it = vec![B::v(1, 0), B::petal(2, 1), B::v(1, 0)];
    let anchor = scaled(&m, 2, 1, 2, (1, 9));
    assert!(matches!(backward_construct(&m, &it, &anchor), Err(dimone::Error::Budget { .. })));
}

#[test]
fn origin_prefix_counts_down() {
    let m = model(5, 8);
    let it = vec![B::origin(5), B::origin(0), B::v(1, 2), B::v(2, 3)];
    let anchor = scaled(&m, 3, 1, 2, (1, 3));
    let b = backward_construct(&m, &it, &anchor).map_err(|e| e.to_string()).unwrap();
    assert_eq!(&b.record.orbit_seq[..4], &[Some(-1), Some(0), Some(1), Some(2)]);
    assert!(b.record.backwards_events.is_empty());
}

#[test]
fn singular_values_sit_in_b() {
    let m = model(5, 8);
    let rep = check_singular_values(&m).unwrap();
    assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
    assert_eq!(rep.named("qn_critical_value").count(), 31);
}

#[test]
fn inclusions_at_k2() {
    let m = model(5, 8);
    let rep = verify_inclusions(&m, 2, 4096).unwrap();
    assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
    let c = rep.named("inner_vk_max").next().unwrap();
    assert!(c.lhs_exponent.starts_with("1447339.3966"), "{}", c.lhs_exponent);
    assert_eq!(c.rhs_exponent, "1447358.000000");
    assert!(verify_inclusions(&m, 2, 100).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_index_rises_by_at_most_one(r in 600.0f64..1_500_000.0, t in 0i64..1000) {
        let m = model(5, 8);
        let z = LogPolar::new(Rho::from_f64(r), Angle::from_ratio(t, 1000, 64));
        let o = iterate_orbit(&m, &z, 4, 0.0);
        for w in o.orbit_seq.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                prop_assert!(b <= a + 1);
            }
        }
    }
}
