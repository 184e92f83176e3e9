use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn semiclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiclab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("semiclab-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn canned(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config_in.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// `(path, sha256)` of every artifact but the echoed config.
fn checksums(dir: &Path) -> Vec<(String, String)> {
    let m = read_json(&dir.join("manifest.json"));
    m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["path"].as_str().unwrap().to_string(), a["sha256"].as_str().unwrap().to_string()))
        .filter(|(p, _)| p != "config.json")
        .collect()
}

const SMALL_GRID: &str = r#"{
  "symbol": "xi1^2 + 1i*xi1 + x1^2",
  "quantization": { "basis": { "kind": "hermite", "m": 60, "n": 1 } },
  "h": [0.1],
  "grid": {
    "rect": { "re_min": -1.0, "re_max": 4.0, "im_min": -1.0, "im_max": 3.0 },
    "shape": [21, 17],
    "levels": [1e-6, 1e-3]
  }
}"#;

fn out(dir: &Path, sub: &str) -> String {
    dir.join(sub).to_string_lossy().into_owned()
}

#[test]
fn psgrid_writes_artifacts_and_manifest() {
    let d = scratch("psgrid");
    let cfg = write_config(&d, SMALL_GRID);
    let o = semiclab(&["psgrid", "--config", &cfg, "--out", &out(&d, "a")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = d.join("a");
    for f in ["grid.csv", "grid_heatmap.pgm", "grid_heatmap.json", "contours.json", "psgrid.json", "config.json"] {
        assert!(a.join(f).exists(), "{f} missing");
    }
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config"]["quantization"]["basis"]["m"], 60);
    // checksums match the files on disk
    for art in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(a.join(art["path"].as_str().unwrap())).unwrap();
        assert_eq!(art["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    let csv = fs::read_to_string(a.join("grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 21 * 17);
    assert!(csv.starts_with("re,im,sigma_min,floored"));
    let pgm = fs::read_to_string(a.join("grid_heatmap.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n21 17\n255\n"));
}

#[test]
fn psgrid_is_reproducible_across_runs_and_threads() {
    let d = scratch("repro");
    let cfg = write_config(&d, SMALL_GRID);
    let one = semiclab(&["--threads", "1", "psgrid", "--config", &cfg, "--out", &out(&d, "t1")]);
    let two = semiclab(&["--threads", "2", "psgrid", "--config", &cfg, "--out", &out(&d, "t2")]);
    assert!(one.status.success() && two.status.success());
    assert_eq!(checksums(&d.join("t1")), checksums(&d.join("t2")));
    // the echoed config re-runs to the same artifacts
    let back = d.join("t1").join("config.json").to_string_lossy().into_owned();
    let again = semiclab(&["psgrid", "--config", &back, "--out", &out(&d, "back")]);
    assert!(again.status.success());
    assert_eq!(checksums(&d.join("t1")), checksums(&d.join("back")));
}

#[test]
fn config_errors_exit_with_two() {
    let d = scratch("badcfg");
    let cfg = write_config(&d, r#"{ "symbol": "xi1", "h": [0.1], "colour": "blue" }"#);
    let o = semiclab(&["spectrum", "--config", &cfg, "--out", &out(&d, "a")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));

    assert_eq!(semiclab(&["spectrum"]).status.code(), Some(2));

    let o = semiclab(&["spectrum", "--symbol", "xi1 +* x1", "--h", "0.1", "--out", &out(&d, "b")]);
    assert_eq!(o.status.code(), Some(2));
    let m = read_json(&d.join("b").join("manifest.json"));
    assert_eq!(m["status"], "config_error");
}

#[test]
fn numerical_failure_exits_with_three_and_cleans_up() {
    let d = scratch("davies");
    let dir = out(&d, "w");
    let o = semiclab(&["weight", "--config", &canned("davies_weight.json"), "--out", &dir]);
    assert_eq!(o.status.code(), Some(3));
    let m = read_json(&d.join("w").join("manifest.json"));
    assert_eq!(m["status"], "numerical_failure");
    assert!(m["diagnostics"].as_str().unwrap().contains("dynamical condition violated"));
    assert!(m["artifacts"].as_array().unwrap().is_empty());
    let left: Vec<_> = fs::read_dir(d.join("w")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("manifest.json")]);
}

#[test]
fn classify_from_flags() {
    let d = scratch("classify");
    let o = semiclab(&[
        "classify", "--symbol", "xi1^2+xi1*1i+x1^2", "--box", "-3", "3", "-3", "3", "--res", "200", "--out", &out(&d, "a"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("a").join("atlas.csv")).unwrap();
    assert!(csv.starts_with("x,xi,re_p,im_p,bracket"));
    let s = read_json(&d.join("a").join("classify.json"));
    assert_eq!(csv.lines().count() as u64, 1 + s["samples"].as_u64().unwrap());
    assert!(s["lambda_minus"].as_u64().unwrap() > 0 && s["lambda_plus"].as_u64().unwrap() > 0);
}

#[test]
fn classify_probes_report_sign_sums() {
    let d = scratch("remark");
    let o = semiclab(&["classify", "--config", &canned("remark_classify.json"), "--out", &out(&d, "a")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("a").join("classify.json"));
    assert_eq!(s["probes"][0]["sign_sum"], 2);
    assert_eq!(s["probes"][0]["winding"], 2);
}

#[test]
fn degenerate_probe_reports_null_counts() {
    let d = scratch("zero");
    let o = semiclab(&["classify", "--config", &canned("counterexample_classify.json"), "--out", &out(&d, "a")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("a").join("classify.json"));
    let probe = &s["probes"][0];
    assert!(probe["sign_sum"].is_null());
    assert_eq!(probe["points"].as_array().unwrap().len(), 2);
    assert!(probe["notes"][0].as_str().unwrap().contains("bracket vanishes"));
}

#[test]
fn scaling_subelliptic_k2() {
    let d = scratch("k2");
    let o = semiclab(&["scaling", "--config", &canned("subelliptic_k2.json"), "--out", &out(&d, "a")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("a").join("scaling.json"));
    let e = s["exponent"].as_f64().unwrap();
    assert!((e - 2.0 / 3.0).abs() < 0.05, "{e}");
    assert!(d.join("a").join("sweep.json").exists());
}

#[test]
fn quantize_writes_a_readable_container() {
    let d = scratch("quantize");
    let o = semiclab(&["quantize", "--symbol", "xi1^2 + x1^2", "--h", "0.1", "--out", &out(&d, "a")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let op = semiclassical::io::read_operator(&d.join("a").join("operator.bin")).unwrap();
    assert_eq!(op.size(), 100);
    assert!((op.matrix[(3, 3)].re - 0.7).abs() < 1e-12);
}

#[test]
fn spectrum_and_dissipative_runs() {
    let d = scratch("spec");
    let o = semiclab(&["spectrum", "--symbol", "xi1^2 + 1i*xi1 + x1^2", "--h", "0.1", "--out", &out(&d, "a")]);
    assert!(o.status.success());
    let s = read_json(&d.join("a").join("spectrum.json"));
    let first = &s["accepted"][0];
    assert!((first[0].as_f64().unwrap() - 0.35).abs() < 1e-8);

    let o = semiclab(&["dissipative", "--config", &canned("davies_dissipative.json"), "--out", &out(&d, "b")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("b").join("dissipative.json"));
    assert_eq!(s["certification"]["w_psd"], true);
    assert_eq!(s["resolvent_check"]["all_ok"], true);
    assert!(s["max_im_accepted"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn quasimode_fbi_and_conjugate_runs() {
    let d = scratch("qm");
    let o = semiclab(&["quasimode", "--config", &canned("rotated_quasimode.json"), "--out", &out(&d, "q")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("q").join("quasimode.json"));
    let e = s["fit"]["exponent"].as_f64().unwrap();
    assert!((0.9..=1.5).contains(&e), "{e}");
    assert!(d.join("q").join("quasimode.csv").exists());

    let o = semiclab(&["fbi", "--config", &canned("rotated_fbi.json"), "--out", &out(&d, "f")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("f").join("fbi.json"));
    let outside = s["localization"]["outside"].as_array().unwrap();
    assert!(outside.last().unwrap().as_f64().unwrap() < 0.01, "{outside:?}");
    assert!(d.join("f").join("fbi_heatmap.pgm").exists());

    let o = semiclab(&["conjugate", "--config", &canned("escape_model.json"), "--out", &out(&d, "c")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.join("c").join("conjugate.json"));
    assert_eq!(s["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn repro_invariants_pass() {
    let d = scratch("inv");
    let o = semiclab(&["repro", "invariants", "--out", &out(&d, "r")]);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{table}");
    assert!(!table.contains("FAIL"), "{table}");
    assert!(table.contains("psgrid across 1 and 2 threads"));
    assert!(d.join("r").join("summary.json").exists());
}

#[test]
fn repro_paper_examples_table() {
    let d = scratch("examples");
    let o = semiclab(&["repro", "paper-examples", "--out", &out(&d, "r")]);
    let table = String::from_utf8_lossy(&o.stdout);
    let row = |name: &str| table.lines().find(|l| l.starts_with(name)).unwrap_or("").to_string();
    assert!(row("rotated oscillator spectrum").contains("PASS"), "{table}");
    assert!(row("remark symbol at z = 0.1").contains("PASS"), "{table}");
    assert!(row("Davies escape weight at z0 = 1").contains("PASS"), "{table}");
    // the 1000× resolvent ratio is out of reach for this operator (ratio ≈ 668)
    let fails: Vec<&str> = table.lines().filter(|l| l.contains(" FAIL ")).collect();
    assert_eq!(fails.len(), 1, "{table}");
    assert!(fails[0].starts_with("resolvent growth at 2+i: ratio"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repro_scaling_laws_pass() {
    let d = scratch("laws");
    let o = semiclab(&["repro", "scaling-laws", "--out", &out(&d, "r")]);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{table}");
    assert!(table.contains("ξ + i x^2 exponent") && table.contains("ξ + i x^4 exponent"));
}
