use dimone::curves::*;
use dimone::modelmap::ModelMap;
use dimone::numerics::{Angle, DyadicReal, LogPolar, NumCtx, Rho};
use dimone::params::{omega_at_log2, ParamTable};
use dimone::Error;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

fn model(n: u32, kmax: u32) -> ModelMap {
    ModelMap::new(ParamTable::build(n, kmax, 1.0).unwrap(), NumCtx::default())
}

fn synth(cprime: f64) -> DistortionModel {
    DistortionModel::synthetic(cprime, 2.0 * 2f64.sqrt(), 7)
}

#[test]
fn identity_depth_one_matches_the_subannulus_radii() {
    let m = model(5, 8);
    let tr = trace_gamma(&m, &DistortionModel::Identity, 1, 1, 256).unwrap();
    let e = Rho::from_int(m.table.big_r(2).clone());
    let n = m.table.nk(2).to_f64().unwrap();
    let inner = e.to_f64() - 1.0 - 2.0 / n;
    let outer = e.to_f64() - 1.0 + (3f64.log2() - 2.0) / n;
    for (a, b) in tr.inner_radii.iter().zip(&tr.outer_radii) {
        assert!((a.sub(&e).to_f64() - (inner - e.to_f64())).abs() < 1e-12);
        assert!((b.sub(&e).to_f64() - (outer - e.to_f64())).abs() < 1e-12);
    }
    // Exactly e - 1 - 2/n, a dyadic rational.
    let exact = e.add_int(&BigInt::from(-1)).sub(&Rho::from_int(2).div_pow2(m.table.nk_shift(2) as u64));
    assert_eq!(tr.inner_radii[17], exact);
}

#[test]
fn identity_traces_are_nested_circles() {
    let m = model(5, 9);
    let id = DistortionModel::Identity;
    let mut prev: Option<CurveTrace> = None;
    for depth in 1..=8 {
        let tr = trace_gamma(&m, &id, 1, depth, 256).unwrap();
        assert!(tr.radial_oscillation() <= (-120f64).exp2(), "depth {depth}");
        assert!(tr.ordered() && tr.within_v(&m.table));
        let w = width_check(&m.table, &tr);
        assert!(w.pass, "depth {depth}: {w:?}");
        if let Some(p) = &prev {
            assert!(tr.inner_radii[0] > p.inner_radii[0] && tr.outer_radii[0] < p.outer_radii[0]);
            // The bound shrinks by n_{k+m}/8 per level.
            let wp = width_check(&m.table, p);
            let shrink = m.table.nk_shift(1 + depth) as f64 - 3.0;
            assert!((wp.log2_bound - w.log2_bound - shrink).abs() < 1e-6);
        }
        prev = Some(tr);
    }
}

#[test]
fn depth_one_width_is_below_r_over_n() {
    let m = model(5, 8);
    let tr = trace_gamma(&m, &DistortionModel::Identity, 2, 1, 256).unwrap();
    let w = width_check(&m.table, &tr);
    let r_over_n = m.table.big_r(3).to_f64().unwrap() - m.table.nk_shift(3) as f64;
    assert!(w.log2_measured <= r_over_n);
}

#[test]
fn synthetic_trace_oscillation_is_within_the_eps_budget() {
    let m = model(5, 8);
    let phi = synth(0.05);
    let tr = trace_gamma(&m, &phi, 1, 3, 256).unwrap();
    let osc = tr.radial_oscillation();
    assert!(osc > 0.0);
    assert!(osc <= oscillation_budget(&m.table, &phi, 1, 3), "{osc}");
    assert!(tr.ordered() && tr.within_v(&m.table));
    assert_eq!(tr.tangent_partials.len(), 3);
}

#[test]
fn traces_reject_small_grids_and_deep_requests() {
    let m = model(5, 6);
    assert!(matches!(trace_gamma(&m, &DistortionModel::Identity, 1, 1, 100), Err(Error::Contract(_))));
    assert!(matches!(trace_gamma(&m, &DistortionModel::Identity, 1, 40, 256), Err(Error::Domain(_))));
    let tight = ModelMap::new(ParamTable::build(5, 12, 1.0).unwrap(), NumCtx { p_ang: 80, ..NumCtx::default() });
    assert!(matches!(trace_gamma(&tight, &DistortionModel::Identity, 1, 8, 256), Err(Error::Budget { .. })));
}

#[test]
fn mismatched_top_angle_is_a_branch_inconsistency() {
    let m = model(5, 8);
    let th = Angle::from_ratio(3, 10, 80);
    let top = LogPolar::new(Rho::from_int(m.table.big_r(3) - 1), Angle::from_ratio(7, 10, 80));
    let err = pull_chain(&m, &DistortionModel::Identity, &th, 2, 3, &top).unwrap_err();
    assert!(err.to_string().contains("branch inconsistency"), "{err}");
}

#[test]
fn synthetic_model_respects_its_bounds() {
    let m = model(5, 8);
    let phi = synth(1.0);
    for k in 2..=6 {
        let om = phi.omega_bound(&m.table, k);
        let e = Rho::from_int(m.table.big_r(k).clone());
        for i in 0..64 {
            for f in [0.4, 0.5, 0.6] {
                let u = LogPolar::new(e.add(&Rho::from_f64(f64::log2(f))), Angle::from_ratio(i, 64, 8));
                let (eps, slope) = phi.eps_and_slope(&m, k, &u);
                let (er, ei) = eps.to_f64();
                let (sr, si) = slope.to_f64();
                assert!(er.hypot(ei) <= om);
                assert!(sr.hypot(si) <= 10.0 * om);
            }
        }
        // ω_p at V_k stays under the 2^{-√(k+N)/4} budget.
        assert!(om <= (-(((k + m.table.n) as f64).sqrt()) / 4.0).exp2());
        let direct = omega_at_log2(2.0 * 2f64.sqrt(), &(m.table.big_r(k) - 2)).unwrap();
        assert_eq!(om, direct);
    }
}

#[test]
fn identity_tangent_products_are_trivial() {
    let m = model(5, 10);
    let ps = tangent_products(&m, &DistortionModel::Identity, &Angle::from_ratio(5, 16, 8), 8).unwrap();
    for p in &ps {
        assert_eq!((p.re, p.im, p.cauchy_diff), (1.0, 0.0, 0.0));
    }
}

#[test]
fn synthetic_tangent_products_are_cauchy_and_nonvanishing() {
    let m = model(5, 10);
    let phi = synth(1.0);
    let ps = tangent_products(&m, &phi, &Angle::from_ratio(3, 16, 8), 8).unwrap();
    let floor = c1_modulus_floor(m.table.n, 1.0);
    assert!(floor > 0.0);
    for p in &ps {
        assert!(p.cauchy_diff <= p.cauchy_bound, "{p:?}");
        assert!(p.log_modulus >= floor.ln());
    }
    assert!(ps.iter().any(|p| p.cauchy_diff > 0.0));
}

/// Central difference of `γ_0^m` against `i γ_0^m P_m`.
#[test]
fn tangent_product_matches_a_finite_difference() {
    let m = model(5, 8);
    let phi = synth(0.3);
    let bits = 48u64;
    let th = Angle::from_ratio(11, 32, bits);
    let h = Angle::from_fixed(BigInt::from(1), bits);
    for depth in 1..=3 {
        let p = tangent_products(&m, &phi, &th, depth).unwrap().pop().unwrap();
        let g0 = gamma_point(&m, &phi, &th, depth).unwrap();
        let gp = gamma_point(&m, &phi, &th.add(&h), depth).unwrap().div(&g0).unwrap().to_cx(128);
        let gm = gamma_point(&m, &phi, &th.sub(&h), depth).unwrap().div(&g0).unwrap().to_cx(128);
        let d = gp.sub(&gm, 128).to_f64();
        let scale = 2.0 * (-(bits as f64)).exp2() * std::f64::consts::TAU;
        let (dr, di) = (d.0 / scale, d.1 / scale);
        // i P = (-Im P, Re P).
        assert!((dr + p.im).abs() < 1e-9 && (di - p.re).abs() < 1e-9, "depth {depth}: {dr} {di} vs {p:?}");
    }
}

#[test]
fn identity_leaves_meet_at_zero_angle() {
    let m = model(5, 8);
    assert_eq!(angle_check(&m, &DistortionModel::Identity, 1, 0, 3, 32).unwrap(), 0.0);
}

#[test]
fn synthetic_leaf_angles_obey_the_bounds() {
    let m = model(5, 8);
    let phi = synth(1.0);
    let one = angle_check(&m, &phi, 1, 0, 1, 64).unwrap();
    assert!(one > 0.0);
    assert!(one <= (48.0 * phi.omega_bound(&m.table, 2)).atan());
    assert!(one <= angle_bound(&m.table, &phi, 1, 0, 1));
    let three = angle_check(&m, &phi, 1, 0, 3, 64).unwrap();
    assert!(three <= angle_bound(&m.table, &phi, 1, 0, 3));
    let tail = angle_check(&m, &phi, 1, 1, 3, 64).unwrap();
    assert!(tail <= angle_bound(&m.table, &phi, 1, 1, 3));
    assert!(matches!(angle_check(&m, &phi, 1, 2, 2, 8), Err(Error::Contract(_))));
}

#[test]
fn dilatation_summand_follows_the_calculation_chain() {
    let t = ParamTable::build(5, 6, 1.0).unwrap();
    for j in 4..=12u32 {
        let s = dilatation_summand((j <= t.jmax()).then(|| t.e(j)), j);
        let r = t.e(j).to_f64().map(|e| (-e).exp2()).unwrap_or(0.0);
        let m = (j as f64).exp2().recip();
        // π((r/(r-1))² e^{2π/M} - 1) ≈ π(2/r + 2π/M) for large r and M.
        assert!(s <= 8.0 * std::f64::consts::PI * (r + m));
        assert!(s >= 2.0 * std::f64::consts::PI * std::f64::consts::PI * m);
    }
}

#[test]
fn dilatation_integral_is_dominated_by_omega_one() {
    let t = ParamTable::build(5, 6, 1.0).unwrap();
    let mut ratios = Vec::new();
    let mut halves = Vec::new();
    for s in 4..=14u32 {
        let r = DyadicReal::pow2(-(1i64 << s), 64);
        let d = dilatation_integral(&t, &r).unwrap();
        ratios.push(d.i_estimate / d.omega1);
        halves.push(d.i_estimate * (d.j_r as f64).exp2());
    }
    let k = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(k < 20.0, "{ratios:?}");
    let kh = halves.iter().cloned().fold(0.0, f64::max);
    assert!(kh < 50.0, "{halves:?}");
    assert!(dilatation_integral(&t, &DyadicReal::from_i64(2, 64)).is_err());
}

#[test]
fn modulus_floor_is_positive_and_monotone() {
    let a = c1_modulus_floor(5, 1.0);
    let b = c1_modulus_floor(10, 1.0);
    assert!(a > 0.0 && a < b && b < 1.0);
    assert_eq!(c1_modulus_floor(5, 0.0), 1.0);
}
