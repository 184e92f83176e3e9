use semiclassical::linalg::{self, CMat};
use semiclassical::quantize::*;
use semiclassical::symbol::Poly;
use semiclassical::{SymbolExpr, C64};

fn sym(s: &str) -> SymbolExpr {
    SymbolExpr::parse(s, 1).unwrap()
}

fn block_gap(a: &CMat, b: &CMat, k: usize) -> f64 {
    let mut g: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            g = g.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    g
}

#[test]
fn position_and_momentum_satisfy_the_commutator() {
    let h = 0.2;
    let b = Basis::Hermite { m: 30, n: 1 };
    let x = weyl_quantize(&sym("x1"), b, h).unwrap().matrix;
    let p = weyl_quantize(&sym("xi1"), b, h).unwrap().matrix;
    let c = &x * &p - &p * &x;
    // [X, hD] = ih away from the truncation corner
    for i in 0..29 {
        assert!((c[(i, i)] - C64::new(0.0, h)).norm() < 1e-12);
    }
}

#[test]
fn weyl_of_products_is_the_moyal_product() {
    let h = 0.1;
    let b = Basis::Hermite { m: 40, n: 1 };
    let a = sym("x1^2 + 1i*xi1");
    let c = sym("x1*xi1 + 2*xi1^2");
    let ab = moyal_product(&a.to_poly().unwrap(), &c.to_poly().unwrap(), h);
    let lhs = weyl_quantize(&a, b, h).unwrap().matrix * weyl_quantize(&c, b, h).unwrap().matrix;
    let rhs = weyl_quantize(&poly_expr(&ab), b, h).unwrap().matrix;
    assert!(block_gap(&lhs, &rhs, 30) < 1e-11);
}

fn poly_expr(p: &Poly<C64>) -> SymbolExpr {
    let mut text = String::from("0");
    for (e, c) in p.terms() {
        text += &format!(" + ({:?} + ({:?})*1i)*x1^{}*xi1^{}", c.re, c.im, e[0], e[1]);
    }
    sym(&text)
}

#[test]
fn xxi_quantizes_to_the_symmetrized_product() {
    let h = 0.1;
    let b = Basis::Hermite { m: 30, n: 1 };
    let x = weyl_quantize(&sym("x1"), b, h).unwrap().matrix;
    let p = weyl_quantize(&sym("xi1"), b, h).unwrap().matrix;
    let xp = weyl_quantize(&sym("x1*xi1"), b, h).unwrap().matrix;
    let sym_prod = linalg::scale(&(&x * &p + &p * &x), C64::new(0.5, 0.0));
    assert!(block_gap(&xp, &sym_prod, 29) < 1e-12);
}

#[test]
fn grid_and_hermite_agree_on_low_modes() {
    let h = 0.1;
    let s = sym("xi1^2 + 1i*xi1 + x1^2");
    let g = weyl_quantize(&s, Basis::FourierGrid { half_width: 5.0, points: 128, n: 1 }, h).unwrap();
    let e = semiclassical::spectral::eigendecompose(&g).unwrap();
    let first = e.accepted_values()[0];
    assert!((first - C64::new(0.35, 0.0)).norm() < 1e-8, "{first}");
}

#[test]
fn wick_quadratic_shift() {
    let h = 0.1;
    let b = Basis::Hermite { m: 20, n: 1 };
    let w = wick_quantize_expr(&sym("x1^2"), b, h).unwrap().matrix;
    let v = weyl_quantize(&sym("x1^2"), b, h).unwrap().matrix;
    let d = w - v;
    for i in 0..20 {
        for j in 0..20 {
            let want = if i == j { WICK_QUADRATIC_SHIFT } else { 0.0 };
            assert!((d[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn gaussian_smoothing_of_monomials() {
    // E[(x + Y)^4] with Var Y = 1/2: x⁴ + 3x² + 3/4
    let p = sym("x1^4").to_poly().unwrap();
    let s = gaussian_smooth_poly(&p);
    assert!((s.coeff(&[4, 0]) - C64::new(1.0, 0.0)).norm() < 1e-14);
    assert!((s.coeff(&[2, 0]) - C64::new(3.0, 0.0)).norm() < 1e-14);
    assert!((s.coeff(&[0, 0]) - C64::new(0.75, 0.0)).norm() < 1e-14);
    assert!(s.coeff(&[1, 0]).norm() == 0.0);
}

#[test]
fn grid_wick_matches_hermite_wick_on_a_smooth_symbol() {
    let h = 0.1;
    let a = sym("x1^2 + xi1^2");
    let g = wick_quantize_expr(&a, Basis::FourierGrid { half_width: 6.0, points: 128, n: 1 }, h).unwrap();
    let e = semiclassical::spectral::eigendecompose(&g).unwrap();
    // h(2k+1) + 1
    let first = e.accepted_values()[0];
    assert!((first - C64::new(h + 1.0, 0.0)).norm() < 1e-6, "{first}");
}

#[test]
fn hermite_functions_are_orthonormal() {
    let h = 0.2;
    let n = 4000;
    let l = 8.0;
    let dx = 2.0 * l / n as f64;
    let xs: Vec<f64> = (0..n).map(|k| -l + k as f64 * dx).collect();
    let psi = hermite_functions(6, h, &xs);
    for a in 0..6 {
        for b in 0..6 {
            let ip: f64 = psi[a].iter().zip(&psi[b]).map(|(u, v)| u * v).sum::<f64>() * dx;
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-10, "{a} {b} {ip}");
        }
    }
}

#[test]
fn two_dimensional_kron_structure() {
    let h = 0.1;
    let op = weyl_quantize(&SymbolExpr::parse("x1^2 + xi1^2 + x2^2 + xi2^2", 2).unwrap(), Basis::Hermite { m: 8, n: 2 }, h)
        .unwrap();
    assert_eq!(op.size(), 64);
    let mut ev = linalg::hermitian_eigenvalues(&op.matrix).unwrap();
    ev.sort_by(f64::total_cmp);
    assert!((ev[0] - 2.0 * h).abs() < 1e-12);
    assert!((ev[1] - 4.0 * h).abs() < 1e-12 && (ev[2] - 4.0 * h).abs() < 1e-12);
}

#[test]
fn dimension_and_domain_errors() {
    let b = Basis::Hermite { m: 10, n: 1 };
    assert!(weyl_quantize(&sym("x1"), b, -1.0).is_err());
    assert!(weyl_quantize(&SymbolExpr::parse("x1 + x2", 2).unwrap(), b, 0.1).is_err());
    assert!(weyl_quantize_poly(&sym("exp(x1)"), b, 0.1).is_err());
    assert!(wick_quantize_expr(&sym("1/(1+x1^2)"), b, 0.1).is_err());
}
