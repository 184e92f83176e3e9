//! Reproduction suites over the canned configs in `configs/`.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use semiclassical::linalg::{self, CMat};
use semiclassical::quantize::{fbi_transform, grid_points, weyl_quantize_poly, wick_quantize_expr, Basis, FbiGrid};
use semiclassical::spectral::{SigmaEngine, SigmaMethod};
use semiclassical::{SymbolExpr, C64};

use crate::config::ExperimentConfig;
use crate::run::execute;
use crate::{CliError, Suite};

const CONFIGS: &[(&str, &str)] = &[
    ("rotated_spectrum", include_str!("../configs/rotated_spectrum.json")),
    ("rotated", include_str!("../configs/rotated.json")),
    ("rotated_growth", include_str!("../configs/rotated_growth.json")),
    ("subelliptic_k2", include_str!("../configs/subelliptic_k2.json")),
    ("subelliptic_k4", include_str!("../configs/subelliptic_k4.json")),
    ("counterexample_scaling", include_str!("../configs/counterexample_scaling.json")),
    ("counterexample_classify", include_str!("../configs/counterexample_classify.json")),
    ("remark_classify", include_str!("../configs/remark_classify.json")),
    ("rotated_quasimode", include_str!("../configs/rotated_quasimode.json")),
    ("model_quasimode", include_str!("../configs/model_quasimode.json")),
    ("rotated_fbi", include_str!("../configs/rotated_fbi.json")),
    ("davies_dissipative", include_str!("../configs/davies_dissipative.json")),
    ("davies_weight", include_str!("../configs/davies_weight.json")),
    ("escape_model", include_str!("../configs/escape_model.json")),
];

#[derive(Debug, Serialize)]
struct Row {
    name: String,
    measured: String,
    expected: String,
    pass: bool,
}

struct Suiterun {
    out: PathBuf,
    rows: Vec<Row>,
}

impl Suiterun {
    fn row(&mut self, name: &str, measured: String, expected: &str, pass: bool) {
        self.rows.push(Row { name: name.into(), measured, expected: expected.into(), pass });
    }

    /// A row for a case that could not be computed.
    fn broken(&mut self, name: &str, e: &CliError, expected: &str) {
        self.row(name, format!("error: {e}"), expected, false);
    }

    fn canned(&self, name: &str, run_dir: &str) -> ExperimentConfig {
        let text = CONFIGS.iter().find(|(n, _)| *n == name).expect("canned config exists").1;
        let mut c = ExperimentConfig::from_json(text).expect("canned config parses");
        c.output = self.out.join(run_dir).to_string_lossy().into_owned();
        c
    }
}

fn f(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for p in path {
        cur = &cur[*p];
    }
    cur.as_f64().unwrap_or(f64::NAN)
}

pub fn run_suite(suite: Suite, out: Option<PathBuf>) -> i32 {
    let name = match suite {
        Suite::PaperExamples => "paper-examples",
        Suite::Invariants => "invariants",
        Suite::ScalingLaws => "scaling-laws",
    };
    let mut s = Suiterun { out: out.unwrap_or_else(|| Path::new("repro").join(name)), rows: Vec::new() };
    match suite {
        Suite::PaperExamples => paper_examples(&mut s),
        Suite::Invariants => invariants(&mut s),
        Suite::ScalingLaws => scaling_laws(&mut s),
    }
    let width = s.rows.iter().map(|r| r.name.len()).max().unwrap_or(4);
    println!("{:<width$}  {:<4}  measured | expected", "case", "");
    for r in &s.rows {
        println!("{:<width$}  {:<4}  {} | {}", r.name, if r.pass { "PASS" } else { "FAIL" }, r.measured, r.expected);
    }
    let failed = s.rows.iter().filter(|r| !r.pass).count();
    println!("{} of {} rows pass", s.rows.len() - failed, s.rows.len());
    if let Err(e) = std::fs::create_dir_all(&s.out)
        .map_err(CliError::from)
        .and_then(|_| Ok(semiclassical::io::write_json(&s.out.join("summary.json"), &s.rows)?))
    {
        eprintln!("semiclab repro: {e}");
    }
    if failed == 0 {
        0
    } else {
        1
    }
}

fn paper_examples(s: &mut Suiterun) {
    let c = s.canned("rotated_spectrum", "rotated_spectrum");
    let expected = "10 lowest = (2k+1)h + 1/4 within 1e-6";
    match execute("spectrum", &c) {
        Ok(v) => {
            let h = c.h[0];
            let mut acc: Vec<(f64, f64)> = v["accepted"]
                .as_array()
                .map(|a| a.iter().map(|p| (p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN))).collect())
                .unwrap_or_default();
            acc.sort_by(|a, b| a.0.total_cmp(&b.0));
            let err = if acc.len() < 10 {
                f64::INFINITY
            } else {
                (0..10)
                    .map(|k| (acc[k].0 - ((2 * k + 1) as f64 * h + 0.25)).hypot(acc[k].1))
                    .fold(0.0, f64::max)
            };
            s.row("rotated oscillator spectrum", format!("max error {err:.2e}"), expected, err <= 1e-6);
        }
        Err(e) => s.broken("rotated oscillator spectrum", &e, expected),
    }

    let expected = "min |λ| ≥ 0.2 for h ≤ 0.05";
    let mut worst = f64::INFINITY;
    let mut failure = None;
    for h in [0.05, 0.035, 0.025] {
        let mut c = s.canned("rotated_spectrum", &format!("rotated_spectrum_h{h}"));
        c.h = vec![h];
        match execute("spectrum", &c) {
            Ok(v) => {
                for p in v["accepted"].as_array().into_iter().flatten() {
                    worst = worst.min(p[0].as_f64().unwrap_or(0.0).hypot(p[1].as_f64().unwrap_or(0.0)));
                }
            }
            Err(e) => failure = Some(e),
        }
    }
    match failure {
        Some(e) => s.broken("spectrum away from the vertex", &e, expected),
        None => s.row("spectrum away from the vertex", format!("{worst:.4}"), expected, worst >= 0.2),
    }

    let c = s.canned("rotated_growth", "rotated_growth");
    match execute("scaling", &c) {
        Ok(v) => {
            let rate = f(&v, &["rate"]);
            let r2 = f(&v, &["r2"]);
            s.row(
                "resolvent growth at 2+i: fit",
                format!("rate {rate:.3}, R² {r2:.4}"),
                "rate > 0, R² ≥ 0.9",
                rate > 0.0 && r2 >= 0.9,
            );
            let samples = v["samples"].as_array().cloned().unwrap_or_default();
            let ratio = match (samples.first(), samples.last()) {
                (Some(a), Some(b)) => f(a, &["sigma_min"]) / f(b, &["sigma_min"]),
                _ => f64::NAN,
            };
            s.row("resolvent growth at 2+i: ratio", format!("{ratio:.1}"), "σ(0.1)/σ(0.025) ≥ 1000", ratio >= 1e3);
        }
        Err(e) => s.broken("resolvent growth at 2+i", &e, "exponential decay of σ_min"),
    }

    let c = s.canned("remark_classify", "remark_classify");
    let expected = "sign sum 2, winding 2";
    match execute("classify", &c) {
        Ok(v) => {
            let p = &v["probes"][0];
            let (ss, w) = (p["sign_sum"].as_i64().unwrap_or(-99), p["winding"].as_i64().unwrap_or(-99));
            s.row("remark symbol at z = 0.1", format!("sign sum {ss}, winding {w}"), expected, ss == 2 && w == 2);
        }
        Err(e) => s.broken("remark symbol at z = 0.1", &e, expected),
    }

    let c = s.canned("counterexample_classify", "counterexample_classify");
    let expected = "p⁻¹(0) = {(0, ±1)} within 1e-8";
    match execute("classify", &c) {
        Ok(v) => {
            let mut pts: Vec<(f64, f64)> = v["probes"][0]["points"]
                .as_array()
                .map(|a| a.iter().map(|p| (p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN))).collect())
                .unwrap_or_default();
            pts.sort_by(|a, b| a.1.total_cmp(&b.1));
            let err = if pts.len() == 2 {
                pts[0].0.abs().max((pts[0].1 + 1.0).abs()).max(pts[1].0.abs()).max((pts[1].1 - 1.0).abs())
            } else {
                f64::INFINITY
            };
            s.row("rational symbol zero set", format!("{} points, error {err:.1e}", pts.len()), expected, err <= 1e-8);
        }
        Err(e) => s.broken("rational symbol zero set", &e, expected),
    }

    let c = s.canned("davies_dissipative", "davies_dissipative");
    let expected = "max Im λ ≤ 1e-8, σ_min(P − z) ≥ Im z";
    match execute("dissipative", &c) {
        Ok(v) => {
            let im = f(&v, &["max_im_accepted"]);
            let ok = v["resolvent_check"]["all_ok"].as_bool().unwrap_or(false);
            s.row("Davies operator", format!("max Im λ {im:.1e}, bound holds: {ok}"), expected, im <= 1e-8 && ok);
        }
        Err(e) => s.broken("Davies operator", &e, expected),
    }

    let c = s.canned("davies_weight", "davies_weight");
    let expected = "dynamical condition violated";
    match execute("weight", &c) {
        Ok(_) => s.row("Davies escape weight at z0 = 1", "weight constructed".into(), expected, false),
        Err(e) => {
            let hit = matches!(e, CliError::Core(semiclassical::Error::DynamicalCondition(_)));
            s.row("Davies escape weight at z0 = 1", e.to_string(), expected, hit);
        }
    }

    let c = s.canned("escape_model", "escape_model");
    let expected = "γ > 0";
    match execute("weight", &c) {
        Ok(v) => {
            let g = f(&v, &["gamma"]);
            s.row("escape weight for ξ + i(x² − 1)", format!("γ = {g:.4}"), expected, g > 0.0);
        }
        Err(e) => s.broken("escape weight for ξ + i(x² − 1)", &e, expected),
    }
}

fn scaling_laws(s: &mut Suiterun) {
    for (k, tol) in [(2, 0.05), (4, 0.08)] {
        let name = format!("subelliptic_k{k}");
        let c = s.canned(&name, &name);
        let want = k as f64 / (k + 1) as f64;
        let expected = format!("exponent {want:.4} ± {tol}, R² ≥ 0.98");
        let label = format!("ξ + i x^{k} exponent");
        match execute("scaling", &c) {
            Ok(v) => {
                let (e, r2) = (f(&v, &["exponent"]), f(&v, &["r2"]));
                s.row(&label, format!("{e:.4}, R² {r2:.4}"), &expected, (e - want).abs() <= tol && r2 >= 0.98);
            }
            Err(e) => s.broken(&label, &e, &expected),
        }
    }

    let c = s.canned("counterexample_scaling", "counterexample_scaling");
    let expected = "2/3 ± 0.1";
    match execute("scaling", &c) {
        Ok(v) => {
            let e = f(&v, &["exponent"]);
            s.row("rational symbol exponent", format!("{e:.4}"), expected, (e - 2.0 / 3.0).abs() <= 0.1);
        }
        Err(e) => s.broken("rational symbol exponent", &e, expected),
    }

    for (order, expected) in [(0usize, "slope in [0.9, 1.5]"), (2, "slope ≥ 2.7")] {
        let mut c = s.canned("rotated_quasimode", &format!("rotated_quasimode_order{order}"));
        if let Some(q) = c.quasimode.as_mut() {
            q.order = order;
        }
        let label = format!("quasimode order {order} residual");
        match execute("quasimode", &c) {
            Ok(v) => {
                let e = f(&v, &["fit", "exponent"]);
                let pass = if order == 0 { (0.9..=1.5).contains(&e) } else { e >= 2.7 };
                s.row(&label, format!("slope {e:.3}"), expected, pass);
            }
            Err(e) => s.broken(&label, &e, expected),
        }
    }

    let c = s.canned("model_quasimode", "model_quasimode");
    let expected = "rate > 0, R² ≥ 0.9";
    match execute("quasimode", &c) {
        Ok(v) => {
            let (rate, r2) = (f(&v, &["fit", "rate"]), f(&v, &["fit", "r2"]));
            s.row("ξ − ix quasimode residual", format!("rate {rate:.3}, R² {r2:.4}"), expected, rate > 0.0 && r2 >= 0.9);
        }
        Err(e) => s.broken("ξ − ix quasimode residual", &e, expected),
    }
}

/// Artifact checksums listed in a run's manifest.
fn checksums(dir: &str) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(Path::new(dir).join("manifest.json"))?;
    let m: Value = serde_json::from_str(&text)?;
    Ok(m["artifacts"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|a| (a["path"].as_str().unwrap_or("").to_string(), a["sha256"].as_str().unwrap_or("").to_string()))
        .collect())
}

fn invariants(s: &mut Suiterun) {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let text = format!(
            "({:?})*x1^2 + ({:?})*xi1^2 + ({:?})*x1*xi1 + ({:?})*x1^3*xi1 + ({:?})*xi1",
            c[0], c[1], c[2], c[3], c[4]
        );
        let h = rng.gen_range(0.02..0.2);
        match weyl_quantize_poly(&SymbolExpr::parse(&text, 1).expect("generated symbol"), Basis::Hermite { m: 60, n: 1 }, h) {
            Ok(op) => worst = worst.max(linalg::hermitian_defect(&op.matrix)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    s.row("Weyl of real symbols is Hermitian", format!("max defect {worst:.1e}"), "≤ 1e-12", worst <= 1e-12);

    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let text = format!("({:?} + ({:?})*x1 + ({:?})*xi1 + ({:?})*x1*xi1)^2", c[0], c[1], c[2], c[3]);
        let h = rng.gen_range(0.02..0.2);
        let low = wick_quantize_expr(&SymbolExpr::parse(&text, 1).expect("generated symbol"), Basis::Hermite { m: 40, n: 1 }, h)
            .and_then(|w| {
                let herm = linalg::scale(&(&w.matrix + &linalg::adjoint(&w.matrix)), C64::new(0.5, 0.0));
                let ev = linalg::hermitian_eigenvalues(&herm)?;
                let norm = ev.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
                Ok(ev.iter().copied().fold(f64::INFINITY, f64::min) / norm)
            })
            .unwrap_or(f64::NEG_INFINITY);
        worst = worst.min(low);
    }
    s.row("Wick of |q|² is positive", format!("min eig/norm {worst:.1e}"), "≥ -1e-10", worst >= -1e-10);

    let (h, l, m) = (0.05, 4.0, 256);
    let basis = Basis::FourierGrid { half_width: l, points: m, n: 1 };
    let xs = grid_points(l, m);
    let dx = 2.0 * l / m as f64;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (a, b) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let u: Vec<C64> = xs
            .iter()
            .map(|&x| C64::from_polar((-(x - a).powi(2) / (2.0 * h)).exp(), b * x / h))
            .collect();
        let norm2 = u.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
        worst = match fbi_transform(&u, basis, h, FbiGrid::default()) {
            Ok(fld) => worst.max((fld.mass() / norm2 - 1.0).abs()),
            Err(_) => f64::INFINITY,
        };
    }
    s.row("FBI isometry", format!("max defect {worst:.1e}"), "≤ 1e-3", worst <= 1e-3);

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(5..30);
        let a = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let z = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let pair = SigmaEngine::new(&a, SigmaMethod::Schur).and_then(|e| {
            let fast = e.sigma_min(z)?.value;
            Ok((fast, SigmaEngine::new(&a, SigmaMethod::Svd)?.sigma_min(z)?.value, e.floor()))
        });
        // the σ floor is the resolution limit for tiny σ
        worst = match pair {
            Ok((x, y, floor)) => worst.max((x - y).abs() / (y + floor)),
            Err(_) => f64::INFINITY,
        };
    }
    s.row("Schur fast path agrees with SVD", format!("max relative gap {worst:.1e}"), "≤ 1e-8", worst <= 1e-8);

    // pseudospectrum grid: thread count, re-run and manifest round trip
    let mut c = s.canned("rotated", "psgrid_threads1");
    c.quantization.basis = semiclassical::spectral::BasisRule::Hermite { m: 60, n: 1 };
    if let Some(g) = c.grid.as_mut() {
        g.shape = [41, 33];
    }
    let expected = "identical artifact checksums";
    let outcome = (|| -> Result<(bool, bool, bool), CliError> {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
        let two = rayon::ThreadPoolBuilder::new().num_threads(2).build().expect("thread pool");
        one.install(|| execute("psgrid", &c))?;
        let mut c2 = c.clone();
        c2.output = s.out.join("psgrid_threads2").to_string_lossy().into_owned();
        two.install(|| execute("psgrid", &c2))?;
        let mut c3 = c.clone();
        c3.output = s.out.join("psgrid_rerun").to_string_lossy().into_owned();
        execute("psgrid", &c3)?;
        // the resolved config written by the first run, pointed at a fresh directory
        let mut back = ExperimentConfig::load(&Path::new(&c.output).join("config.json"))?;
        back.output = s.out.join("psgrid_roundtrip").to_string_lossy().into_owned();
        execute("psgrid", &back)?;
        let strip = |v: Vec<(String, String)>| v.into_iter().filter(|(p, _)| p != "config.json").collect::<Vec<_>>();
        let base = strip(checksums(&c.output)?);
        Ok((
            base == strip(checksums(&c2.output)?),
            base == strip(checksums(&c3.output)?),
            base == strip(checksums(&back.output)?),
        ))
    })();
    match outcome {
        Ok((threads, rerun, round)) => {
            s.row("psgrid across 1 and 2 threads", format!("{threads}"), expected, threads);
            s.row("psgrid re-run", format!("{rerun}"), expected, rerun);
            s.row("psgrid from the resolved config", format!("{round}"), expected, round);
        }
        Err(e) => s.broken("psgrid determinism", &e, expected),
    }
}
