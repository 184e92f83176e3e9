//! Quantization of symbols into dense matrices.

mod apply;
mod fbi;
mod grid;
mod hermite;
mod moyal;
mod wick;

pub use apply::apply_weyl_poly_grid;
pub use fbi::{fbi_calibration, fbi_transform, FbiField, FbiGrid};
pub use grid::{
    dual_points, grid_points, schrodinger_matrix, weyl_quantize_grid, weyl_quantize_grid_table, XiLimit,
};
pub use hermite::{hermite_functions, ladder_matrices, weyl_quantize_poly};
pub use moyal::moyal_product;
pub use wick::{gaussian_smooth_poly, wick_quantize, wick_quantize_expr, WICK_QUADRATIC_SHIFT};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::symbol::SymbolExpr;

/// Discretization basis of an [`OperatorMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// h-scaled Hermite functions `ψ_0..ψ_{m−1}` per axis.
    Hermite { m: usize, n: usize },
    /// Periodic grid `x_j = −L + 2Lj/M`, `j = 0..M−1`, per axis.
    FourierGrid { half_width: f64, points: usize, n: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Hermite { n, .. } | Basis::FourierGrid { n, .. } => n,
        }
    }

    pub fn per_axis(&self) -> usize {
        match *self {
            Basis::Hermite { m, .. } => m,
            Basis::FourierGrid { points, .. } => points,
        }
    }

    /// Matrix size `m^n`.
    pub fn size(&self) -> usize {
        self.per_axis().pow(self.dim() as u32)
    }

    /// Values on the spatial points `xs` of the function with coefficients `c` (n = 1).
    ///
    /// Hermite coefficients are summed against `ψ_k`; grid vectors are
    /// interpolated trigonometrically.
    pub fn evaluate(&self, c: &[C64], h: f64, xs: &[f64]) -> Vec<C64> {
        assert_eq!(self.dim(), 1, "evaluation implemented for one dimension");
        match *self {
            Basis::Hermite { m, .. } => {
                let psi = hermite_functions(m, h, xs);
                (0..xs.len()).map(|i| (0..m).map(|k| c[k] * psi[k][i]).sum()).collect()
            }
            Basis::FourierGrid { half_width, points, .. } => {
                let l = half_width;
                let m = points as i64;
                xs.iter()
                    .map(|&x| {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in -m / 2..m / 2 {
                            let mut coef = C64::new(0.0, 0.0);
                            for (j, cj) in c.iter().enumerate() {
                                let xj = -l + 2.0 * l * j as f64 / points as f64;
                                let ph = -std::f64::consts::PI * k as f64 * (xj + l) / l;
                                coef += cj * C64::from_polar(1.0, ph);
                            }
                            let w = if k == -m / 2 { 0.5 } else { 1.0 };
                            let ph = std::f64::consts::PI * k as f64 * (x + l) / l;
                            acc += coef * C64::from_polar(w, ph);
                            if k == -m / 2 {
                                acc += coef * C64::from_polar(w, -ph);
                            }
                        }
                        acc / points as f64
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub path: String,
    pub symbol: String,
}

/// Dense discretization of `p^w(x, hD)`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: CMat,
    pub h: f64,
    pub basis: Basis,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn with_matrix(&self, matrix: CMat, path: &str) -> OperatorMatrix {
        OperatorMatrix {
            matrix,
            h: self.h,
            basis: self.basis,
            provenance: Provenance { path: path.into(), symbol: self.provenance.symbol.clone() },
            warnings: Vec::new(),
        }
    }
}

/// A function on phase space that can be quantized.
pub trait PhaseSymbol: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, w: &[f64]) -> C64;
    /// Polynomial dependence on ξ (the grid Weyl formula is then exact).
    fn polynomial_in_xi(&self) -> bool {
        false
    }
    fn depends_on_xi(&self) -> bool {
        true
    }
    fn label(&self) -> String;
}

impl PhaseSymbol for SymbolExpr {
    fn dim(&self) -> usize {
        SymbolExpr::dim(self)
    }

    fn eval(&self, w: &[f64]) -> C64 {
        SymbolExpr::eval(self, w)
    }

    fn polynomial_in_xi(&self) -> bool {
        self.is_polynomial_in_xi()
    }

    fn depends_on_xi(&self) -> bool {
        SymbolExpr::depends_on_xi(self)
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

/// A symbol given by a closure, for functions outside the expression grammar
/// (smooth cutoffs, tabulated weights).
pub struct FnSymbol<F: Fn(&[f64]) -> C64 + Sync> {
    pub dim: usize,
    pub f: F,
    pub x_only: bool,
    pub label: String,
}

impl<F: Fn(&[f64]) -> C64 + Sync> PhaseSymbol for FnSymbol<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: &[f64]) -> C64 {
        (self.f)(w)
    }

    fn polynomial_in_xi(&self) -> bool {
        self.x_only
    }

    fn depends_on_xi(&self) -> bool {
        !self.x_only
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Real-valuedness of a symbol judged on sample points.
pub fn is_real_on(p: &dyn PhaseSymbol, points: &[Vec<f64>]) -> bool {
    points.iter().all(|w| {
        let v = p.eval(w);
        v.im.abs() <= 1e-14 * v.re.abs().max(1.0)
    })
}

/// Weyl quantization by the path matching the basis: ladder operators on Hermite
/// bases (polynomial symbols), the grid kernel otherwise (with a numerical ξ-limit
/// when the symbol is not polynomial in ξ).
pub fn weyl_quantize(p: &SymbolExpr, basis: Basis, h: f64) -> crate::Result<OperatorMatrix> {
    weyl_quantize_with_limit(p, None, basis, h)
}

/// As [`weyl_quantize`], with an explicit ξ-limit `p∞(x)` for grids (written as a
/// symbol; its ξ arguments are set to zero).
pub fn weyl_quantize_with_limit(
    p: &SymbolExpr,
    xi_limit: Option<&SymbolExpr>,
    basis: Basis,
    h: f64,
) -> crate::Result<OperatorMatrix> {
    match basis {
        Basis::Hermite { .. } => weyl_quantize_poly(p, basis, h),
        Basis::FourierGrid { .. } => {
            let limit = match xi_limit {
                Some(q) => XiLimit::Given(q),
                None if p.is_polynomial_in_xi() => XiLimit::Absent,
                None => XiLimit::Numeric,
            };
            weyl_quantize_grid(p, basis, h, limit)
        }
    }
}

/// Galerkin matrix `⟨ψ_k, g^w ψ_l⟩` on `Hermite{m, 1}`, with `g^w` quantized on a
/// fine grid covering the basis. Used for symbols outside the polynomial class.
pub fn project_to_hermite(g: &dyn PhaseSymbol, m: usize, h: f64) -> crate::Result<CMat> {
    if g.dim() != 1 {
        return Err(crate::Error::InvalidInput("Hermite projection is one-dimensional".into()));
    }
    let turning = (h * (2 * m + 1) as f64).sqrt();
    let l = 1.2 * turning + 8.0 * h.sqrt();
    let xi_req = 1.2 * turning + 8.0 * h.sqrt();
    let need = ((4 * m) as f64).max(3.0 * l * xi_req / (std::f64::consts::PI * h));
    let points = (need.ceil() as usize).next_power_of_two();
    let grid = Basis::FourierGrid { half_width: l, points, n: 1 };
    let limit = if g.polynomial_in_xi() { XiLimit::Absent } else { XiLimit::Numeric };
    let a = weyl_quantize_grid(g, grid, h, limit)?.matrix;
    let xs = grid_points(l, points);
    let psi = hermite_functions(m, h, xs.as_slice());
    let dx = 2.0 * l / points as f64;
    let basis = CMat::from_fn(points, m, |j, k| C64::new(psi[k][j], 0.0));
    let bt = basis.transpose().to_owned();
    let out = &bt * &(&a * &basis);
    Ok(crate::linalg::scale(&out, C64::new(dx, 0.0)))
}
