//! Log-polar SVG: `x = log₂|z|`, `y = arg z` in turns.

use std::fmt::Write;

use dimone::curves::CurveTrace;
use dimone::geometry::petal_spec;
use dimone::modelmap::ModelMap;
use dimone::numerics::LogPolar;
use num_bigint::BigInt;

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 400.0;

/// Petals are drawn only for annuli with at most this many.
pub const MAX_DRAWN_PETALS: u64 = 256;

pub struct Scene<'a> {
    pub model: &'a ModelMap,
    pub kshow: u32,
    pub orbit: Vec<LogPolar>,
    pub curves: Vec<CurveTrace>,
}

struct Frame {
    x0: f64,
    x1: f64,
}

impl Frame {
    fn x(&self, rho: f64) -> f64 {
        (rho - self.x0) / (self.x1 - self.x0) * WIDTH
    }

    fn y(turns: f64) -> f64 {
        turns * HEIGHT
    }
}

fn band(out: &mut String, f: &Frame, id: &str, class: &str, lo: f64, hi: f64) {
    let (a, b) = (f.x(lo), f.x(hi));
    let _ = writeln!(
        out,
        r#"    <rect id="{id}" class="{class}" x="{a:.4}" y="0" width="{:.4}" height="{HEIGHT}"/>"#,
        (b - a).max(0.5)
    );
}

pub fn render(s: &Scene) -> String {
    let t = &s.model.table;
    let e = |k: u32| t.big_r(k).to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    let f = Frame { x0: 0.0, x1: e(s.kshow + 1) + 4.0 };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<!-- build: dimone {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    out.push_str("  <style>.A{fill:#d8e4f0}.B{fill:#f3efe0}.V{fill:#9ec1de}.D{fill:#e0d0e8}.petal{fill:#c0392b}.orbit{fill:#222}.curve{fill:none;stroke:#1b5e20;stroke-width:0.6}</style>\n");
    out.push_str("  <g id=\"annuli\">\n");
    band(&mut out, &f, "D", "D", 0.0, e(1) - 2.0);
    for k in 1..=s.kshow {
        let (r, r1) = (e(k), e(k + 1));
        band(&mut out, &f, &format!("Ak-{k}"), "A", r - 2.0, r + 2.0);
        band(&mut out, &f, &format!("Bk-{k}"), "B", r + 2.0, r1 - 2.0);
        band(&mut out, &f, &format!("Vk-{k}"), "V", r + 0.4f64.log2(), r + 0.6f64.log2());
    }
    out.push_str("  </g>\n  <g id=\"petals\">\n");
    for k in 1..=s.kshow {
        let n = 1u64 << t.nk_shift(k);
        if n > MAX_DRAWN_PETALS {
            continue;
        }
        for j in 1..=n {
            let p = petal_spec(s.model, k, &BigInt::from(j));
            let _ = writeln!(
                out,
                r#"    <circle id="petal-{k}-{j}" class="petal" cx="{:.4}" cy="{:.4}" r="1.5"/>"#,
                f.x(p.center.rho_f64()),
                Frame::y(p.center.theta.to_f64())
            );
        }
    }
    out.push_str("  </g>\n  <g id=\"orbits\">\n");
    for (i, z) in s.orbit.iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"    <circle id="orbit-{i}" class="orbit" cx="{:.4}" cy="{:.4}" r="2"/>"#,
            f.x(z.rho_f64()),
            Frame::y(z.theta.to_f64())
        );
    }
    out.push_str("  </g>\n  <g id=\"curves\">\n");
    for c in &s.curves {
        for (side, radii) in [("inner", &c.inner_radii), ("outer", &c.outer_radii)] {
            let pts: Vec<String> = c
                .theta_grid
                .iter()
                .zip(radii.iter())
                .map(|(th, r)| format!("{:.4},{:.4}", f.x(r.to_f64()), Frame::y(th.to_f64())))
                .collect();
            let _ = writeln!(
                out,
                r#"    <polyline id="curve-{}-{}-{side}" class="curve" points="{}"/>"#,
                c.k,
                c.m,
                pts.join(" ")
            );
        }
    }
    out.push_str("  </g>\n</svg>\n");
    out
}
