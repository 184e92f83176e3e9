//! Subcommand pipelines. Each writes its artifacts through [`Artifacts`] and
//! returns a JSON summary (also written to `<command>.json`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use semiclassical::classical::{
    sample_symbol_range, sign_sum, sigma_infinity, solve_level_set, winding_number, PhaseBox,
};
use semiclassical::io;
use semiclassical::quantize::{fbi_transform, grid_points, weyl_quantize_with_limit, Basis, FbiGrid, OperatorMatrix};
use semiclassical::quasimode::{build_quasimode, localization_report, quasimode_grid, residual_sweep};
use semiclassical::spectral::{
    contour_extract, eigendecompose_with, pseudospectrum_grid_with, resolvent_sweep, EigenOptions, Rect,
};
use semiclassical::weights::{
    boundary_exclusion_experiment, dissipative_build, dissipative_resolvent_check, escape_weight, EpsilonRule,
    ExclusionSettings,
};
use semiclassical::{linalg, SymbolExpr};

use crate::config::{complex, intervals, ExperimentConfig};
use crate::CliError;

/// Files written by one run, in order.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub status: &'a str,
    pub exit_code: i32,
    pub diagnostics: Option<String>,
    pub config: &'a ExperimentConfig,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn sha256_hex(path: &Path) -> std::io::Result<(u64, String)> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok((bytes.len() as u64, digest.iter().map(|b| format!("{b:02x}")).collect()))
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Artifacts, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    /// Path for a new artifact, recorded for the manifest.
    pub fn file(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let p = self.file(name);
        Ok(io::write_json(&p, value)?)
    }

    pub fn entries(&self) -> Result<Vec<ArtifactEntry>, CliError> {
        self.files
            .iter()
            .map(|p| {
                let (bytes, sha256) = sha256_hex(p)?;
                let name = p.strip_prefix(&self.dir).unwrap_or(p).to_string_lossy().into_owned();
                Ok(ArtifactEntry { path: name, bytes, sha256 })
            })
            .collect()
    }

    /// Removes everything written so far.
    pub fn discard(&mut self) {
        for p in self.files.drain(..) {
            let _ = fs::remove_file(&p);
        }
    }

    pub fn write_manifest(
        &self,
        command: &str,
        config: &ExperimentConfig,
        outcome: &Result<Value, CliError>,
    ) -> Result<(), CliError> {
        let (status, exit_code, diagnostics) = match outcome {
            Ok(_) => ("ok", 0, None),
            Err(e) => (e.status(), e.exit_code(), Some(e.to_string())),
        };
        let manifest = Manifest {
            tool: "semiclab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            status,
            exit_code,
            diagnostics,
            config,
            artifacts: if outcome.is_ok() { self.entries()? } else { Vec::new() },
        };
        Ok(io::write_json(&self.dir.join("manifest.json"), &manifest)?)
    }
}

/// Runs `command` with `config`, writing artifacts and `manifest.json` into the
/// output directory. On failure the partial artifacts are removed and the
/// manifest records the diagnostics.
pub fn execute(command: &str, config: &ExperimentConfig) -> Result<Value, CliError> {
    let mut art = Artifacts::new(Path::new(&config.output))?;
    let outcome = art.json("config.json", config).and_then(|_| dispatch(command, config, &mut art));
    let outcome = match outcome {
        Ok(summary) => art.json(&format!("{command}.json"), &summary).map(|_| summary),
        Err(e) => Err(e),
    };
    if outcome.is_err() {
        art.discard();
    }
    art.write_manifest(command, config, &outcome)?;
    outcome
}

fn dispatch(command: &str, c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    match command {
        "classify" => classify(c, art),
        "quantize" => quantize(c, art),
        "spectrum" => spectrum(c, art),
        "psgrid" => psgrid(c, art),
        "quasimode" => quasimode(c, art),
        "scaling" => scaling(c, art),
        "weight" => weight(c, art),
        "conjugate" => conjugate(c, art),
        "dissipative" => dissipative(c, art),
        "fbi" => fbi(c, art),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}

fn parse(text: &str, dim: usize) -> Result<SymbolExpr, CliError> {
    SymbolExpr::parse(text, dim).map_err(|e| CliError::Config(format!("symbol \"{text}\": {e}")))
}

fn symbol(c: &ExperimentConfig) -> Result<SymbolExpr, CliError> {
    parse(c.symbol_text()?, c.dim)
}

fn phase_box(v: &[[f64; 2]]) -> Result<PhaseBox, CliError> {
    PhaseBox::new(intervals(v)).map_err(|e| CliError::Config(e.to_string()))
}

fn build_operator(c: &ExperimentConfig, h: f64) -> Result<OperatorMatrix, CliError> {
    let p = symbol(c)?;
    let limit = c.quantization.xi_limit.as_deref().map(|s| parse(s, c.dim)).transpose()?;
    Ok(weyl_quantize_with_limit(&p, limit.as_ref(), c.quantization.basis.basis(h), h)?)
}

fn eigen_options(c: &ExperimentConfig) -> EigenOptions {
    EigenOptions { size_cap: c.quantization.size_cap, ..EigenOptions::default() }
}

fn pair(z: semiclassical::C64) -> [f64; 2] {
    [z.re, z.im]
}

fn degenerate_as_none<T>(r: semiclassical::Result<T>, notes: &mut Vec<String>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(semiclassical::Error::Degenerate(m)) => {
            notes.push(m);
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn classify(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let p = symbol(c)?;
    let a = c.section(&c.atlas, "atlas")?;
    let bounds = phase_box(&a.bounds)?;
    let mut atlas = sample_symbol_range(&p, &bounds, a.resolution)?;
    let cone = a.cone.as_ref().map(|k| atlas.cone_test(complex(k.z0), k.theta0, k.eps0));
    io::write_atlas_csv(&art.file("atlas.csv"), &atlas)?;
    let sigma = if a.sigma_radii.is_empty() { None } else { Some(sigma_infinity(&p, &a.sigma_radii, 1e-3)?) };
    let mut probes = Vec::new();
    for &z in &a.probes {
        let zc = complex(z);
        let ls = solve_level_set(&p, zc, &bounds, a.seeds_per_axis)?;
        // a vanishing bracket or a root on the contour leaves that count undefined
        let mut notes = Vec::new();
        let signs = if c.dim == 1 { degenerate_as_none(sign_sum(&p, zc, &bounds), &mut notes)? } else { None };
        let winding = if c.dim == 1 {
            degenerate_as_none(winding_number(&p, zc, a.winding_radius).map(|w| w.index), &mut notes)?
        } else {
            None
        };
        probes.push(json!({
            "z": z,
            "points": ls.points(),
            "signs": ls.roots.iter().map(|r| r.sign).collect::<Vec<_>>(),
            "sign_sum": signs,
            "winding": winding,
            "notes": notes,
        }));
    }
    Ok(json!({
        "symbol": p.to_string(),
        "samples": atlas.samples.len(),
        "skipped": atlas.skipped,
        "lambda_plus": atlas.lambda_plus.len(),
        "lambda_minus": atlas.lambda_minus.len(),
        "bracket_tolerance": atlas.tolerance,
        "cone": cone,
        "sigma_infinity": sigma,
        "probes": probes,
    }))
}

fn quantize(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let h = c.first_h()?;
    let op = build_operator(c, h)?;
    io::write_operator(&art.file("operator.bin"), &op)?;
    Ok(json!({
        "h": h,
        "basis": op.basis,
        "size": op.size(),
        "provenance": op.provenance,
        "warnings": op.warnings,
        "norm_estimate": semiclassical::spectral::norm2_estimate(&op.matrix),
        "hermitian_defect": linalg::hermitian_defect(&op.matrix),
    }))
}

fn spectrum(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let h = c.first_h()?;
    let op = build_operator(c, h)?;
    let s = eigendecompose_with(&op, eigen_options(c))?;
    io::write_spectrum_csv(&art.file("spectrum.csv"), &s)?;
    let accepted: Vec<[f64; 2]> = s.accepted_values().into_iter().map(pair).collect();
    Ok(json!({
        "h": h,
        "basis": op.basis,
        "size": op.size(),
        "norm": s.norm,
        "tau_eig": s.tau_eig,
        "accepted_count": accepted.len(),
        "accepted": accepted,
        "warnings": op.warnings,
    }))
}

fn psgrid(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let h = c.first_h()?;
    let g = c.section(&c.grid, "grid")?;
    let op = build_operator(c, h)?;
    let rect: Rect = g.rect;
    let grid = pseudospectrum_grid_with(&op, rect, (g.shape[0], g.shape[1]), g.method)?;
    io::write_grid_csv(&art.file("grid.csv"), &grid)?;
    let pgm = art.file("grid_heatmap.pgm");
    art.file("grid_heatmap.json");
    let side = io::write_grid_pgm(&pgm, &grid)?;
    let contours = contour_extract(&grid, &g.levels);
    if !g.levels.is_empty() {
        art.json("contours.json", &contours)?;
    }
    let spec = eigendecompose_with(&op, eigen_options(c))?;
    let (mut lo, mut lo_at) = (f64::INFINITY, [0.0, 0.0]);
    for j in 0..grid.shape.1 {
        for i in 0..grid.shape.0 {
            if grid.value(i, j) < lo {
                lo = grid.value(i, j);
                lo_at = pair(grid.node(i, j));
            }
        }
    }
    Ok(json!({
        "h": h,
        "size": op.size(),
        "shape": g.shape,
        "method": grid.method,
        "floor": grid.floor,
        "floored": grid.floored.iter().filter(|f| **f).count(),
        "fallbacks": grid.fallbacks,
        "sigma_min": lo,
        "sigma_min_at": lo_at,
        "heatmap": side,
        "contours": contours.len(),
        "accepted_eigenvalues": spec.accepted_values().into_iter().map(pair).collect::<Vec<_>>(),
    }))
}

fn quasimode(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let p = symbol(c)?;
    let q = c.section(&c.quasimode, "quasimode")?;
    if c.h.is_empty() {
        return Err(CliError::Config("no h given".into()));
    }
    let sw = residual_sweep(&p, &q.point, q.order, q.cutoff, q.path, &c.h, q.model)?;
    let h = c.h.iter().copied().fold(f64::INFINITY, f64::min);
    let basis = quasimode_grid(&sw.quasimode, h);
    if let Basis::FourierGrid { half_width, points, n: 1 } = basis {
        let u = sw.quasimode.sample(basis, h)?;
        io::write_vector_csv(&art.file("quasimode.csv"), &grid_points(half_width, points), &u)?;
    }
    Ok(json!({
        "z": pair(sw.quasimode.z),
        "order": q.order,
        "hessian_gamma": sw.quasimode.gamma_a,
        "phase_positive": sw.quasimode.phase_positive,
        "samples": sw.samples,
        "fit": sw.fit,
    }))
}

fn scaling(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let p = symbol(c)?;
    let s = c.section(&c.scaling, "scaling")?;
    let limit = c.quantization.xi_limit.as_deref().map(|t| parse(t, c.dim)).transpose()?;
    let sw = resolvent_sweep(&p, limit.as_ref(), complex(s.z), c.quantization.basis, &c.h, s.restrict, s.method)?;
    let fit = sw.fit(s.model)?;
    art.json("sweep.json", &sw)?;
    Ok(json!({
        "z": s.z,
        "model": s.model,
        "exponent": fit.exponent,
        "rate": fit.rate,
        "r2": fit.r2,
        "samples": sw.samples,
        "fit": fit,
    }))
}

fn weight(c: &ExperimentConfig, _art: &mut Artifacts) -> Result<Value, CliError> {
    let p = symbol(c)?;
    let w = c.section(&c.weight, "weight")?;
    let g = escape_weight(&p, complex(w.z0), &phase_box(&w.bounds)?, w.t0)?;
    Ok(json!({
        "z0": w.z0,
        "gamma": g.gamma,
        "vacuous": g.vacuous,
        "samples": g.samples,
        "verify_samples": g.verify_samples,
        "max_energy_drift": g.max_energy_drift,
        "bumps": g.bumps,
    }))
}

fn conjugate(c: &ExperimentConfig, _art: &mut Artifacts) -> Result<Value, CliError> {
    let p = symbol(c)?;
    let w = c.section(&c.weight, "weight")?;
    if c.h.is_empty() {
        return Err(CliError::Config("no h given".into()));
    }
    let z0 = complex(w.z0);
    let g = escape_weight(&p, z0, &phase_box(&w.bounds)?, w.t0)?;
    let runs: Vec<(f64, Basis)> = c.h.iter().map(|&h| (h, c.quantization.basis.basis(h))).collect();
    let settings = ExclusionSettings {
        rule: EpsilonRule { c2: w.c2, cond_cap: w.cond_cap },
        m_factor: w.m_factor,
        circle_radius: w.circle_radius,
        circle_points: w.circle_points,
        c_fit: w.c_fit,
    };
    let report = boundary_exclusion_experiment(&p, z0, &g, &runs, &settings)?;
    Ok(serde_json::to_value(&report)?)
}

fn dissipative(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let h = c.first_h()?;
    let d = c.section(&c.dissipative, "dissipative")?;
    let q = parse(&d.q, c.dim)?;
    let a = parse(&d.a, c.dim)?;
    let op = dissipative_build(&q, &a, c.quantization.basis.basis(h), h, &phase_box(&d.window)?)?;
    let spec = eigendecompose_with(&op.p, eigen_options(c))?;
    io::write_spectrum_csv(&art.file("spectrum.csv"), &spec)?;
    let zs: Vec<_> = d.zs.iter().map(|&z| complex(z)).collect();
    let check = if zs.is_empty() {
        None
    } else {
        Some(dissipative_resolvent_check(&op, &zs, semiclassical::spectral::SigmaMethod::Svd)?)
    };
    let acc = spec.accepted_values();
    let max_im = acc.iter().map(|l| l.im).fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({
        "h": h,
        "size": op.p.size(),
        "certification": op.certification(),
        "dissipativity_probe": op.dissipativity_probe(d.probes, c.seed),
        "accepted_count": acc.len(),
        "max_im_accepted": if acc.is_empty() { None } else { Some(max_im) },
        "resolvent_check": check,
    }))
}

fn fbi(c: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let p = symbol(c)?;
    let q = c.section(&c.quasimode, "quasimode")?;
    let stride = c.fbi.as_ref().map_or(1, |f| f.x_stride);
    let h = c.first_h()?;
    let qm = build_quasimode(&p, &q.point, q.order, q.cutoff)?;
    let basis = quasimode_grid(&qm, h);
    let u = qm.sample(basis, h)?;
    let field = fbi_transform(&u, basis, h, FbiGrid { x_stride: stride })?;
    io::write_fbi_csv(&art.file("fbi.csv"), &field)?;
    let pgm = art.file("fbi_heatmap.pgm");
    art.file("fbi_heatmap.json");
    let side = io::write_fbi_pgm(&pgm, &field)?;
    let loc = localization_report(&qm, h)?;
    Ok(json!({
        "h": h,
        "basis": basis,
        "peak": field.argmax(),
        "heatmap": side,
        "localization": loc,
    }))
}
