//! Artifact formats: CSV tables, JSON documents, PGM heatmaps and the binary
//! operator container.
//!
//! The container is the 8-byte magic `SCLMAT01`, a little-endian `u64` header
//! length, a JSON header (`rows`, `cols`, `h`, `basis`, `provenance`, `warnings`)
//! and then `rows·cols` complex entries in row-major order, each as two
//! little-endian `f64` (re, im).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::classical::RangeAtlas;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::quantize::{Basis, FbiField, OperatorMatrix, Provenance};
use crate::spectral::{ResolventGrid, SpectrumReport};

const MAGIC: &[u8; 8] = b"SCLMAT01";

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Shortest round-trip decimal form, so equal values give equal bytes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Sample table of a range atlas: `x, xi, re_p, im_p, bracket` (per-axis columns when n = 2).
pub fn write_atlas_csv(path: &Path, atlas: &RangeAtlas) -> Result<()> {
    let n = atlas.bounds.dim();
    let mut w = csv_writer(path)?;
    let mut head: Vec<String> = Vec::new();
    if n == 1 {
        head.extend(["x".into(), "xi".into()]);
    } else {
        head.extend((1..=n).map(|j| format!("x{j}")));
        head.extend((1..=n).map(|j| format!("xi{j}")));
    }
    head.extend(["re_p".into(), "im_p".into(), "bracket".into()]);
    w.write_record(&head)?;
    for s in &atlas.samples {
        let mut row: Vec<String> = s.point.iter().map(|v| num(*v)).collect();
        row.extend([num(s.value.re), num(s.value.im), num(s.bracket)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `re, im, sigma_min, floored`, row-major in `(Im, Re)`.
pub fn write_grid_csv(path: &Path, grid: &ResolventGrid) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["re", "im", "sigma_min", "floored"])?;
    let (nr, ni) = grid.shape;
    for j in 0..ni {
        for i in 0..nr {
            let z = grid.node(i, j);
            let k = j * nr + i;
            w.write_record([num(z.re), num(z.im), num(grid.values[k]), (grid.floored[k] as u8).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Value-to-gray mapping written next to a PGM.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub width: usize,
    pub height: usize,
    pub quantity: String,
    /// `gray = round(255·(v − lo)/(hi − lo))`, clamped.
    pub lo: f64,
    pub hi: f64,
    pub max_gray: u32,
    /// Top row first; what the first row and column correspond to.
    pub orientation: String,
}

/// Plain (P2) PGM of `field[row][col]` plus a JSON sidecar at `path` with extension `.json`.
pub fn write_pgm(path: &Path, field: &[Vec<f64>], quantity: &str, orientation: &str) -> Result<PgmSidecar> {
    let height = field.len();
    let width = field.first().map_or(0, |r| r.len());
    if height == 0 || width == 0 || field.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidInput("heatmap needs a nonempty rectangular field".into()));
    }
    let finite = field.iter().flatten().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "P2\n{width} {height}\n255")?;
    for row in field {
        let line: Vec<String> = row
            .iter()
            .map(|v| {
                let g = if v.is_finite() { (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) } else { 0.0 };
                (g as u32).to_string()
            })
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    let side = PgmSidecar {
        width,
        height,
        quantity: quantity.into(),
        lo,
        hi,
        max_gray: 255,
        orientation: orientation.into(),
    };
    write_json(&path.with_extension("json"), &side)?;
    Ok(side)
}

/// Heatmap of `log10 σ_min`, top row at `Im z = im_max`, columns by increasing `Re z`.
pub fn write_grid_pgm(path: &Path, grid: &ResolventGrid) -> Result<PgmSidecar> {
    let (nr, ni) = grid.shape;
    let field: Vec<Vec<f64>> = (0..ni)
        .rev()
        .map(|j| (0..nr).map(|i| grid.value(i, j).max(f64::MIN_POSITIVE).log10()).collect())
        .collect();
    write_pgm(path, &field, "log10 sigma_min", "rows from im_max down to im_min, columns from re_min to re_max")
}

/// `x, xi, re, im, abs`.
pub fn write_fbi_csv(path: &Path, f: &FbiField) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "xi", "re", "im", "abs"])?;
    for (i, x) in f.xs.iter().enumerate() {
        for (k, xi) in f.xis.iter().enumerate() {
            let v = f.value(i, k);
            w.write_record([num(*x), num(*xi), num(v.re), num(v.im), num(v.norm())])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Heatmap of `|Tu|`, top row at the largest ξ.
pub fn write_fbi_pgm(path: &Path, f: &FbiField) -> Result<PgmSidecar> {
    let field: Vec<Vec<f64>> = (0..f.xis.len())
        .rev()
        .map(|k| (0..f.xs.len()).map(|i| f.value(i, k).norm()).collect())
        .collect();
    write_pgm(path, &field, "|Tu|", "rows from xi_max down to xi_min, columns from x_min to x_max")
}

/// `re, im, residual, tail_mass, accepted`.
pub fn write_spectrum_csv(path: &Path, s: &SpectrumReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["re", "im", "residual", "tail_mass", "accepted"])?;
    for k in 0..s.eigenvalues.len() {
        let l = s.eigenvalues[k];
        w.write_record([
            num(l.re),
            num(l.im),
            num(s.residuals[k]),
            num(s.tail_mass[k]),
            (s.accepted[k] as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `x, re, im` for a sampled function.
pub fn write_vector_csv(path: &Path, xs: &[f64], u: &[C64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "re", "im"])?;
    for (x, v) in xs.iter().zip(u) {
        w.write_record([num(*x), num(v.re), num(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    rows: usize,
    cols: usize,
    h: f64,
    basis: Basis,
    provenance: Provenance,
    warnings: Vec<String>,
}

pub fn write_operator(path: &Path, op: &OperatorMatrix) -> Result<()> {
    let header = Header {
        rows: op.matrix.nrows(),
        cols: op.matrix.ncols(),
        h: op.h,
        basis: op.basis,
        provenance: op.provenance.clone(),
        warnings: op.warnings.clone(),
    };
    let text = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(text.len() as u64).to_le_bytes())?;
    w.write_all(&text)?;
    for i in 0..header.rows {
        for j in 0..header.cols {
            let v = op.matrix[(i, j)];
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator(path: &Path) -> Result<OperatorMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidInput(format!("{} is not an operator container", path.display())));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 1 << 24 {
        return Err(Error::InvalidInput("operator header is implausibly long".into()));
    }
    let mut text = vec![0u8; len];
    r.read_exact(&mut text)?;
    let header: Header = serde_json::from_slice(&text)?;
    let mut body = vec![0u8; header.rows * header.cols * 16];
    r.read_exact(&mut body)?;
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let matrix = CMat::from_fn(header.rows, header.cols, |i, j| {
        let k = 2 * (i * header.cols + j);
        C64::new(f(k), f(k + 1))
    });
    Ok(OperatorMatrix {
        matrix,
        h: header.h,
        basis: header.basis,
        provenance: header.provenance,
        warnings: header.warnings,
    })
}
