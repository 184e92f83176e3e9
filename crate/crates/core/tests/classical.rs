use semiclassical::classical::*;
use semiclassical::{SymbolExpr, C64};

fn sym(s: &str) -> SymbolExpr {
    SymbolExpr::parse(s, 1).unwrap()
}

const ROTATED: &str = "xi1^2 + 1i*xi1 + x1^2";
const RATIONAL_REMARK: &str = "(xi1 + 1i*x1)^2 / (1 + x1^2 + xi1^2)";
const COUNTEREXAMPLE: &str =
    "(xi1^2 - 1 + 1i*xi1*x1^2/(1+x1^2)) / (1 + xi1^2 + 1i*xi1*x1^2/(1+x1^2))";

#[test]
fn rotated_oscillator_range_lies_in_parabola() {
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let atlas = sample_symbol_range(&sym(ROTATED), &b, 200).unwrap();
    assert_eq!(atlas.samples.len(), 200 * 200);
    for s in &atlas.samples {
        assert!(s.value.re >= s.value.im.powi(2) - 1e-12);
        assert!((s.bracket + 2.0 * s.point[0]).abs() < 1e-12);
    }
    for &i in &atlas.lambda_minus {
        assert!(atlas.samples[i].point[0] > 0.0);
        let z = atlas.samples[i].value;
        assert!(z.re > z.im * z.im);
    }
    assert!(atlas.lambda_plus.iter().all(|i| !atlas.lambda_minus.contains(i)));
}

#[test]
fn real_symbol_has_empty_lambda() {
    let b = PhaseBox::cube(1, -2.0, 2.0).unwrap();
    let atlas = sample_symbol_range(&sym("x1"), &b, 30).unwrap();
    assert!(atlas.lambda_plus.is_empty() && atlas.lambda_minus.is_empty());
}

#[test]
fn rational_remark_bracket_positive_off_origin() {
    let b = PhaseBox::cube(1, -2.0, 2.0).unwrap();
    let atlas = sample_symbol_range(&sym(RATIONAL_REMARK), &b, 41).unwrap();
    for s in &atlas.samples {
        let r = s.point[0].hypot(s.point[1]);
        if r > 1e-9 {
            assert!(s.bracket > 0.0, "{:?}", s.point);
        }
    }
    assert_eq!(atlas.lambda_plus.len(), atlas.samples.len() - 1);
}

#[test]
fn cone_verdict_monotone() {
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let mut atlas = sample_symbol_range(&sym(ROTATED), &b, 60).unwrap();
    // the vertex of the parabola has an empty cone pointing left
    assert!(atlas.cone_test(C64::new(0.0, 0.0), std::f64::consts::PI, 0.5).empty);
    assert!(atlas.cone_test(C64::new(0.0, 0.0), std::f64::consts::PI, 0.2).empty);
    assert!(!atlas.cone_test(C64::new(2.0, 0.0), 0.0, 0.5).empty);
}

#[test]
fn sigma_infinity_candidates() {
    let s = sigma_infinity(&sym(RATIONAL_REMARK), &[10.0, 100.0, 1000.0], 1e-3).unwrap();
    assert!(s.contains(C64::new(1.0, 0.0), 1e-5));
    assert!(s.contains(C64::new(-1.0, 0.0), 1e-5));
    assert!(s.unbounded_directions.is_empty());
    let s = sigma_infinity(&sym("x1"), &[10.0, 100.0, 1000.0], 1e-3).unwrap();
    assert!(s.candidates.is_empty());
    let s = sigma_infinity(&sym(COUNTEREXAMPLE), &[10.0, 100.0, 1000.0], 1e-3).unwrap();
    assert!(s.contains(C64::new(1.0, 0.0), 1e-4));
}

#[test]
fn winding_examples() {
    let w = winding_number(&sym(RATIONAL_REMARK), C64::new(0.1, 0.0), 10.0).unwrap();
    assert_eq!(w.index, 2);
    assert!(w.max_step < std::f64::consts::FRAC_PI_2);
    let w = winding_number(&sym(ROTATED), C64::new(-1.0, 0.0), 50.0).unwrap();
    assert_eq!(w.index, 0);
    let w2 = winding_number(&sym(ROTATED), C64::new(-1.0, 0.0), 100.0).unwrap();
    assert_eq!(w.index, w2.index);
    assert!(winding_number(&sym("xi1 + 1i*x1"), C64::new(1.0, 0.0), 1.0).is_err());
}

#[test]
fn level_set_examples() {
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let ls = solve_level_set(&sym(COUNTEREXAMPLE), C64::new(0.0, 0.0), &b, 21).unwrap();
    let mut pts = ls.points();
    pts.sort_by(|a, b| a[1].partial_cmp(&b[1]).unwrap());
    assert_eq!(pts.len(), 2, "{pts:?}");
    assert!((pts[0][0]).abs() < 1e-8 && (pts[0][1] + 1.0).abs() < 1e-8);
    assert!((pts[1][0]).abs() < 1e-8 && (pts[1][1] - 1.0).abs() < 1e-8);

    let ls = solve_level_set(&sym(ROTATED), C64::new(2.0, 1.0), &b, 21).unwrap();
    let pts = ls.points();
    assert_eq!(pts.len(), 2);
    assert!((pts[0][0] + 1.0).abs() < 1e-10 && (pts[0][1] - 1.0).abs() < 1e-10);
    assert!((pts[1][0] - 1.0).abs() < 1e-10 && (pts[1][1] - 1.0).abs() < 1e-10);
    let signs: Vec<i8> = ls.roots.iter().map(|r| r.sign).collect();
    assert_eq!(signs, vec![1, -1]);

    let ls = solve_level_set(&sym(ROTATED), C64::new(-1.0, 0.0), &b, 21).unwrap();
    assert!(ls.roots.is_empty());
}

#[test]
fn level_set_invariant_under_scaling() {
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let p = sym(ROTATED);
    let a = solve_level_set(&p, C64::new(2.0, 1.0), &b, 21).unwrap();
    let q = p.scale(C64::new(2.0, 0.0));
    let c = solve_level_set(&q, C64::new(4.0, 2.0), &b, 21).unwrap();
    assert_eq!(a.roots.len(), c.roots.len());
    for (r, s) in a.roots.iter().zip(&c.roots) {
        assert!((r.point[0] - s.point[0]).abs() < 1e-10 && (r.point[1] - s.point[1]).abs() < 1e-10);
    }
}

#[test]
fn sign_sums() {
    let b = PhaseBox::cube(1, -4.0, 4.0).unwrap();
    assert_eq!(sign_sum(&sym("xi1^2 + x1^2 - 1i*x1"), C64::new(1.25, -0.5), &b).unwrap(), 0);
    assert_eq!(sign_sum(&sym(ROTATED), C64::new(2.0, 1.0), &b).unwrap(), 0);
    assert_eq!(sign_sum(&sym(RATIONAL_REMARK), C64::new(0.1, 0.0), &b).unwrap(), 2);
}

#[test]
fn two_dimensional_level_set_samples() {
    let p = SymbolExpr::parse("xi1^2 + xi2^2 + x1^2 - 1i*x2^2", 2).unwrap();
    let b = PhaseBox::cube(2, -2.0, 2.0).unwrap();
    let ls = solve_level_set(&p, C64::new(1.0, 0.0), &b, 5).unwrap();
    assert!(!ls.roots.is_empty());
    for r in &ls.roots {
        assert!((p.eval(&r.point) - C64::new(1.0, 0.0)).norm() <= 1e-10);
    }
}
