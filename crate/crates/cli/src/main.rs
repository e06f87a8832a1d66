mod config;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dimone::curves::{self, DistortionModel};
use dimone::dimension;
use dimone::dynamics::{self, InverseBranchSpec};
use dimone::geometry::classify;
use dimone::modelmap::ModelMap;
use dimone::numerics::{Angle, Flt, LogPolar, Rho};
use dimone::report::{Certificate, CertificateReport};
use dimone::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use config::Config;

#[derive(Parser)]
#[command(name = "dimone", version, about = "Exact-exponent model of a dimension-one Julia set construction")]
struct Cli {
    #[command(flatten)]
    opts: ConfigArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Overrides for the configuration file.
#[derive(Args, Default)]
struct ConfigArgs {
    /// `key=value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "N", global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    kmax: Option<u32>,
    #[arg(long = "P_sig", alias = "p-sig", global = true)]
    p_sig: Option<u32>,
    #[arg(long = "P_ang", alias = "p-ang", global = true)]
    p_ang: Option<u64>,
    #[arg(long, global = true)]
    guard: Option<u64>,
    #[arg(long = "Cprime", alias = "cprime", global = true)]
    cprime: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long = "Lpp", alias = "lpp", global = true)]
    lpp: Option<String>,
    #[arg(long = "Pp", alias = "pp", global = true)]
    pp: Option<String>,
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for JSON, CSV and SVG files.
    #[arg(long = "output-dir", alias = "output_dir", global = true)]
    output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Identity,
    Synthetic,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parameter table `M_j`, `log₂ c_j`, `log₂ r_j`.
    Params,
    /// Every certificate; exits 1 if any fails.
    Verify {
        /// Inclusions are checked for `k = 1..=inclusion_k`.
        #[arg(long, default_value_t = 6)]
        inclusion_k: u32,
        #[arg(long, default_value_t = 4096)]
        samples: u32,
        #[arg(long, default_value_t = 64)]
        dilatation_grid: u32,
    },
    /// `h_N`, its derivative and the region tag at one point.
    Eval {
        /// `log₂|z|`.
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// `arg z` in turns.
        #[arg(long, default_value = "0")]
        theta: String,
    },
    /// Forward orbit with region tags.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        #[arg(long, default_value = "0")]
        theta: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
    /// Point realizing an itinerary such as `"P(1,3); V(2)#0; V(3)#5"`.
    Backward {
        #[arg(long)]
        itinerary: String,
        /// Anchor `log₂|w|`; defaults to the centre of the next `V` annulus.
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        #[arg(long, default_value = "0.3")]
        theta: String,
    },
    /// Covering-sum dimension reports at exponent `t`.
    Dims {
        #[arg(long, default_value_t = 0.1)]
        t: f64,
    },
    /// Boundaries of `Γ_{k,depth}`.
    Trace {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 256)]
        grid: u32,
        #[arg(long, value_enum, default_value_t = Model::Identity)]
        model: Model,
    },
    /// Log-polar SVG of annuli, petals, an optional orbit and curves.
    Render {
        #[arg(long, default_value_t = 2)]
        kshow: u32,
        #[arg(long, allow_hyphen_values = true)]
        orbit_rho: Option<String>,
        #[arg(long, default_value = "0")]
        orbit_theta: String,
        #[arg(long, default_value_t = 8)]
        orbit_steps: usize,
        /// Trace depth of `Γ_{1,m}` to overlay; 0 for none.
        #[arg(long, default_value_t = 0)]
        curve_depth: u32,
    },
    /// Parameters, certificates and dimension reports in one file.
    Report {
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        #[arg(long, default_value_t = 4)]
        inclusion_k: u32,
    },
}

#[derive(Serialize)]
struct Envelope<'a> {
    config: &'a Config,
    certificates: &'a [Certificate],
    summaries: Value,
}

struct Output {
    json: String,
    files: Vec<(String, Vec<u8>)>,
    pass: bool,
}

fn build_config(a: &ConfigArgs) -> Result<Config> {
    let mut c = match &a.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ints = [("N", a.n.map(|v| v as u64)), ("kmax", a.kmax.map(|v| v as u64)), ("P_sig", a.p_sig.map(|v| v as u64))];
    for (k, v) in ints {
        if let Some(v) = v {
            c.set(k, &v.to_string())?;
        }
    }
    for (k, v) in [("P_ang", a.p_ang), ("guard", a.guard), ("seed", a.seed)] {
        if let Some(v) = v {
            c.set(k, &v.to_string())?;
        }
    }
    let reals = [
        ("Cprime", &a.cprime),
        ("p", &a.p),
        ("Lpp", &a.lpp),
        ("Pp", &a.pp),
        ("lambda", &a.lambda),
        ("delta", &a.delta),
        ("tol", &a.tol),
    ];
    for (k, v) in reals {
        if let Some(v) = v {
            c.set(k, v)?;
        }
    }
    if let Some(d) = &a.output_dir {
        c.output_dir = Some(d.display().to_string());
    }
    c.validate()?;
    Ok(c)
}

fn parse_point(m: &ModelMap, rho: &str, theta: &str) -> Result<LogPolar> {
    let prec = m.ctx.wp();
    let bad = |s: &str| Error::Config(format!("cannot parse number {s:?}"));
    let r = Flt::parse_decimal(rho, prec).ok_or_else(|| bad(rho))?;
    let t = Flt::parse_decimal(theta, prec).ok_or_else(|| bad(theta))?;
    Ok(LogPolar::new(Rho::from_flt(&r), Angle::from_flt(&t, m.ctx.p_ang)))
}

fn envelope(c: &Config, certs: &CertificateReport, summaries: Value) -> String {
    let e = Envelope { config: c, certificates: &certs.0, summaries };
    serde_json::to_string_pretty(&e).expect("report serializes") + "\n"
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("csv header");
    for r in rows {
        w.write_record(&r).expect("csv row");
    }
    w.into_inner().expect("csv flush")
}

fn verify_certs(c: &Config, m: &ModelMap, inclusion_k: u32, samples: u32, grid: u32) -> Result<(CertificateReport, Value)> {
    let t = &m.table;
    let mut certs = t.verify_inequalities();
    let kin = inclusion_k.min(t.k_limit().saturating_sub(1));
    for k in 1..=kin {
        certs.extend(dynamics::verify_inclusions(m, k, samples)?);
    }
    certs.extend(dynamics::check_singular_values(m)?);
    // The bump strip first appears at scale N.
    let kprime = c.n;
    let mut dil = Vec::new();
    for k in kprime..=(kprime + 8).min(t.jmax()) {
        let d = m.dilatation_sup(k, grid)?;
        certs.push(Certificate::new("dilatation_sup", k as i64, format!("{:.6}", d.log2_sup), "0", d.log2_sup < 0.0));
        dil.push(d);
    }
    let inner_cap = (1.0 + std::f64::consts::FRAC_PI_4.exp()).log2();
    let mut mism = Vec::new();
    for j in c.n..=(c.n + 4).min(t.jmax() - 1) {
        let s = m.seam_mismatch(j, 256)?;
        certs.push(Certificate::new(
            "seam_mismatch_inner",
            j as i64,
            format!("{:.9}", s.inner_max_log2_ratio),
            format!("{inner_cap:.9}"),
            s.inner_max_log2_ratio <= inner_cap + 1e-9,
        ));
        certs.push(Certificate::new(
            "seam_mismatch_outer",
            j as i64,
            format!("{:.9}", s.outer_max_log2_ratio),
            "0.15",
            s.outer_max_log2_ratio <= 0.15,
        ));
        mism.push(s);
    }
    let failed: Vec<String> = certs.failures().map(|f| format!("{}[{}]", f.name, f.index)).collect();
    let summary = json!({
        "certificate_count": certs.len(),
        "failed": failed,
        "inclusion_k": kin,
        "samples_per_circle": samples,
        "k_prime": kprime,
        "dilatation": dil,
        "seam_mismatch": mism,
    });
    Ok((certs, summary))
}

fn dims_summary(c: &Config, tdim: f64) -> Result<(CertificateReport, Value)> {
    let t = c.table()?;
    let k = c.constants();
    let origin = dimension::origin_dim_bound(&t, tdim);
    let hole = dimension::holesum_eval(&t, tdim, 3);
    let layers = dimension::layer_checks(&t, tdim, c.lpp);
    let z2 = dimension::z2_tail(&t, 1, tdim, 1, c.pp);
    let min_n = dimension::min_n_for_dimension(tdim, &k);
    let summary = json!({
        "t": tdim,
        "origin": origin,
        "holesum": hole,
        "z2_tail": z2,
        "layer_fix_n": dimension::layer_fix_n(tdim, c.lpp),
        "min_N_for_dimension": min_n,
    });
    Ok((layers, summary))
}

fn run(cli: Cli) -> Result<Output> {
    let c = build_config(&cli.opts)?;
    let mut files = Vec::new();
    let (json, pass) = match cli.cmd {
        Cmd::Params => {
            let t = c.table()?;
            let rows = t.rows(t.jmax());
            let s = json!({ "rows": rows, "k0": t.k0(), "alpha_beta_min_N": dimone::params::ParamTable::alpha_beta_min_n(c.cprime) });
            files.push((
                "params.csv".into(),
                csv_bytes(&["j", "M", "log2_c", "log2_r"], rows.iter().map(|r| vec![r.j.to_string(), r.m.clone(), r.log2_c.clone(), r.log2_r.clone()])),
            ));
            (envelope(&c, &CertificateReport::default(), s), true)
        }
        Cmd::Verify { inclusion_k, samples, dilatation_grid } => {
            let m = c.model()?;
            let (certs, s) = verify_certs(&c, &m, inclusion_k, samples, dilatation_grid)?;
            (envelope(&c, &certs, s), certs.all_pass())
        }
        Cmd::Eval { rho, theta } => {
            let m = c.model()?;
            let z = parse_point(&m, &rho, &theta)?;
            let (fz, piece) = m.eval_model(&z)?;
            let d = m.deriv_model(&z).map(|d| d.to_string()).unwrap_or_else(|e| format!("unavailable: {e}"));
            let region = classify(&m, &z, 0.0)?;
            let s = json!({ "z": z.to_string(), "piece": piece.to_string(), "value": fz.to_string(), "derivative": d, "region": region });
            (envelope(&c, &CertificateReport::default(), s), true)
        }
        Cmd::Orbit { rho, theta, steps, margin } => {
            let m = c.model()?;
            let z = parse_point(&m, &rho, &theta)?;
            let rec = dynamics::iterate_orbit(&m, &z, steps, margin);
            let rows = rec.points.iter().zip(&rec.regions).enumerate().map(|(i, (p, r))| {
                let k = rec.orbit_seq.get(i).copied().flatten().map_or(String::new(), |k| k.to_string());
                let (rho, th) = if p.is_zero() { ("-inf".to_string(), "0".to_string()) } else { (p.rho.to_decimal(40), p.theta.to_string()) };
                vec![i.to_string(), rho, th, r.to_string(), k]
            });
            files.push(("orbit.csv".into(), csv_bytes(&["step", "rho", "theta", "region", "k"], rows)));
            (envelope(&c, &CertificateReport::default(), serde_json::to_value(&rec).unwrap()), true)
        }
        Cmd::Backward { itinerary, rho, theta } => {
            let m = c.model()?;
            let steps: Vec<InverseBranchSpec> =
                itinerary.split(';').filter(|s| !s.trim().is_empty()).map(|s| s.parse()).collect::<Result<_>>()?;
            let anchor = match rho {
                Some(r) => parse_point(&m, &r, &theta)?,
                None => {
                    let next = match steps.last() {
                        Some(InverseBranchSpec::VkRoot { k, .. } | InverseBranchSpec::PetalInverse { k, .. }) => k + 1,
                        _ => 1,
                    };
                    let r = Rho::from_int(m.table.big_r(next) - 1);
                    LogPolar::new(r, parse_point(&m, "0", &theta)?.theta)
                }
            };
            let b = dynamics::backward_construct(&m, &steps, &anchor)?;
            (envelope(&c, &CertificateReport::default(), serde_json::to_value(&b).unwrap()), true)
        }
        Cmd::Dims { t } => {
            let (certs, s) = dims_summary(&c, t)?;
            (envelope(&c, &certs, s), true)
        }
        Cmd::Trace { k, depth, grid, model } => {
            let m = c.model()?;
            let phi = match model {
                Model::Identity => DistortionModel::Identity,
                Model::Synthetic => DistortionModel::synthetic(c.cprime, c.p, c.seed),
            };
            let tr = curves::trace_gamma(&m, &phi, k, depth, grid)?;
            let w = curves::width_check(&m.table, &tr);
            let mut certs = CertificateReport::default();
            certs.push(Certificate::new("width", depth as i64, format!("{:.6}", w.log2_measured), format!("{:.6}", w.log2_bound), w.pass));
            certs.push(Certificate::new("ordered", depth as i64, tr.ordered(), true, tr.ordered()));
            let s = json!({
                "model": phi,
                "radial_oscillation": tr.radial_oscillation(),
                "oscillation_budget": curves::oscillation_budget(&m.table, &phi, k, depth),
                "within_v": tr.within_v(&m.table),
                "width": w,
                "trace": tr,
            });
            files.push((format!("trace-{k}-{depth}.csv"), csv_bytes(&["theta", "inner_rho", "outer_rho"], tr.rows().into_iter().map(|r| r.to_vec()))));
            (envelope(&c, &certs, s), certs.all_pass())
        }
        Cmd::Render { kshow, orbit_rho, orbit_theta, orbit_steps, curve_depth } => {
            let m = c.model()?;
            if kshow + 1 > m.table.k_limit() {
                return Err(Error::Config(format!("kshow {kshow} is beyond the table")));
            }
            let orbit = match orbit_rho {
                Some(r) => dynamics::iterate_orbit(&m, &parse_point(&m, &r, &orbit_theta)?, orbit_steps, 0.0).points,
                None => Vec::new(),
            };
            let curves = if curve_depth > 0 { vec![curves::trace_gamma(&m, &DistortionModel::Identity, 1, curve_depth, 256)?] } else { Vec::new() };
            let svg = svg::render(&svg::Scene { model: &m, kshow, orbit, curves });
            files.push(("render.svg".into(), svg.into_bytes()));
            let s = json!({ "kshow": kshow, "file": "render.svg" });
            (envelope(&c, &CertificateReport::default(), s), true)
        }
        Cmd::Report { t, inclusion_k } => {
            let m = c.model()?;
            let (mut certs, vs) = verify_certs(&c, &m, inclusion_k, 4096, 64)?;
            let (dc, ds) = dims_summary(&c, t)?;
            certs.extend(dc);
            let rows = m.table.rows(m.table.jmax());
            let s = json!({ "params": rows, "verify": vs, "dims": ds });
            (envelope(&c, &certs, s), certs.all_pass())
        }
    };
    Ok(Output { json, files, pass })
}

fn write_out(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), bytes)
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Contract(_) => 2,
        Error::Budget { .. } | Error::Resource(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.cmd {
        Cmd::Params => "params",
        Cmd::Verify { .. } => "verify",
        Cmd::Eval { .. } => "eval",
        Cmd::Orbit { .. } => "orbit",
        Cmd::Backward { .. } => "backward",
        Cmd::Dims { .. } => "dims",
        Cmd::Trace { .. } => "trace",
        Cmd::Render { .. } => "render",
        Cmd::Report { .. } => "report",
    };
    let dir = cli.opts.output_dir.clone();
    match run(cli) {
        Ok(out) => {
            match &dir {
                Some(d) => {
                    let mut all = vec![(format!("{name}.json"), out.json.clone().into_bytes())];
                    all.extend(out.files);
                    for (f, b) in &all {
                        if let Err(e) = write_out(d, f, b) {
                            eprintln!("error: {}: {e}", d.join(f).display());
                            return ExitCode::from(4);
                        }
                    }
                }
                None if name == "render" => {
                    print!("{}", String::from_utf8_lossy(&out.files[0].1));
                    return ExitCode::SUCCESS;
                }
                None => {}
            }
            print!("{}", out.json);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: certificate failures");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let kind = match exit_for(&e) {
                2 => "usage error",
                3 => "resource error",
                _ => "error",
            };
            eprintln!("{kind}: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
