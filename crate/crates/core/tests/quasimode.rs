use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiclassical::quasimode::*;
use semiclassical::spectral::FitModel;
use semiclassical::symbol::real_bracket;
use semiclassical::{Error, SymbolExpr, C64};

fn sym(s: &str) -> SymbolExpr {
    SymbolExpr::parse(s, 1).unwrap()
}

const ROTATED: &str = "xi1^2 + 1i*xi1 + x1^2";
const MODEL: &str = "xi1 - 1i*x1";
const HS: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

#[test]
fn hessian_closed_forms() {
    let a = hessian_construct(&sym(ROTATED), &[1.0, 1.0]).unwrap();
    assert!((a.matrix[0][0] - C64::new(-0.8, 0.4)).norm() < 1e-14);
    assert!((a.min_im_eig - 0.4).abs() < 1e-14);
    let a = hessian_construct(&sym(MODEL), &[0.0, 0.0]).unwrap();
    assert!((a.matrix[0][0] - C64::new(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn im_hessian_matches_bracket_identity() {
    let p = sym(ROTATED);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let w = [rng.gen_range(0.1..2.0), rng.gen_range(-2.0..2.0)];
        let a = hessian_construct(&p, &w).unwrap();
        let pxi = C64::new(2.0 * w[1], 1.0);
        let expect = -real_bracket(&p, &w).unwrap() / pxi.norm_sqr();
        assert!((a.matrix[0][0].im - expect).abs() < 1e-12);
    }
}

#[test]
fn positive_bracket_is_rejected() {
    let err = build_quasimode(&sym(ROTATED), &[-1.0, 1.0], 0, 0.5).unwrap_err();
    assert!(matches!(err, Error::Hypothesis(_)));
    // the adjoint symbol at the same point admits a quasimode
    let adj = sym(ROTATED).conj();
    assert!(build_quasimode(&adj, &[-1.0, 1.0], 0, 0.5).is_ok());
}

#[test]
fn two_dimensional_hessian_is_positive() {
    let p = SymbolExpr::parse("xi1^2 + xi2^2 + 1i*xi1 + x1^2 + x1*x2 + 1i*x2^2", 2).unwrap();
    let w = [1.0, 0.3, 1.0, -0.4];
    assert!(real_bracket(&p, &w).unwrap() < 0.0);
    let a = hessian_construct(&p, &w).unwrap();
    assert!(a.min_im_eig > 0.0);
    assert!(a.constraint_residual < 1e-10);
    assert!((a.matrix[0][1] - a.matrix[1][0]).norm() == 0.0);
    let qm = build_quasimode(&p, &w, 0, 0.5).unwrap();
    assert_eq!(qm.dim, 2);
}

#[test]
fn model_quasimode_is_gaussian() {
    let qm = build_quasimode(&sym(MODEL), &[0.0, 0.0], 0, 0.5).unwrap();
    assert!((qm.phase[2] - C64::new(0.0, 0.5)).norm() < 1e-15);
    let u = qm.value(&[0.3], 0.1);
    assert!((u - C64::new((-0.09f64 / 0.2).exp(), 0.0)).norm() < 1e-14);
}

#[test]
fn eikonal_defect_scales_with_phase_degree() {
    for order in 0..=2 {
        let qm = build_quasimode(&sym(ROTATED), &[1.0, 1.0], order, 0.5).unwrap();
        let (r1, r2) = (0.02, 0.01);
        let slope = (qm.eikonal_defect(r1) / qm.eikonal_defect(r2)).ln() / 2f64.ln();
        assert!((slope - qm.phase_degree() as f64).abs() < 0.2, "order {order}: slope {slope}");
    }
}

#[test]
fn phase_imaginary_part_dominates_quadratic() {
    for order in 0..=1 {
        let qm = build_quasimode(&sym(ROTATED), &[1.0, 1.0], order, 0.5).unwrap();
        assert!(qm.phase_positive, "order {order}");
    }
    // the degree-six Taylor phase loses the bound near the edge of a radius-1 support
    let qm = build_quasimode(&sym(ROTATED), &[1.0, 1.0], 2, 0.5).unwrap();
    assert!(!qm.phase_positive);
    assert!(qm.positive_radius >= 0.5, "{}", qm.positive_radius);
    let qm = build_quasimode(&sym(ROTATED), &[1.0, 1.0], 2, 0.25).unwrap();
    assert!(qm.phase_positive);
}

#[test]
fn rotated_oscillator_residual_slopes() {
    let p = sym(ROTATED);
    let mut slopes = Vec::new();
    for order in 0..=2 {
        let sw = residual_sweep(&p, &[1.0, 1.0], order, 0.5, ResidualPath::Auto, &HS, FitModel::Power).unwrap();
        slopes.push(sw.fit.exponent.unwrap());
    }
    assert!((0.9..=1.5).contains(&slopes[0]), "{slopes:?}");
    assert!(slopes[2] >= 2.7, "{slopes:?}");
    assert!(slopes[0] <= slopes[1] && slopes[1] <= slopes[2], "{slopes:?}");
}

#[test]
fn model_residual_decays_exponentially() {
    let hs = [0.1, 0.07, 0.05, 0.035, 0.025];
    let sw = residual_sweep(&sym(MODEL), &[0.0, 0.0], 0, 0.5, ResidualPath::Auto, &hs, FitModel::Exponential).unwrap();
    assert!(sw.fit.rate.unwrap() > 0.0 && sw.fit.r2 >= 0.9, "{:?}", sw.fit);
}

#[test]
fn half_width_grid_holds_the_norm() {
    let qm = build_quasimode(&sym(ROTATED), &[1.0, 1.0], 0, 0.5).unwrap();
    let h = 0.05;
    let b = quasimode_grid(&qm, h);
    let u = qm.sample(b, h).unwrap();
    let semiclassical::quantize::Basis::FourierGrid { half_width, points, .. } = b else { unreachable!() };
    let xs = semiclassical::quantize::grid_points(half_width, points);
    let full: f64 = u.iter().map(|v| v.norm_sqr()).sum();
    let half: f64 = u.iter().zip(&xs).filter(|(_, x)| x.abs() <= half_width / 2.0 + 1.0).map(|(v, _)| v.norm_sqr()).sum();
    assert!((full - half).abs() <= 1e-6 * full);
}

#[test]
fn localization_improves_as_h_shrinks() {
    let qm = build_quasimode(&sym(ROTATED), &[1.0, 1.0], 0, 0.5).unwrap();
    let mut prev = f64::INFINITY;
    for h in [0.1, 0.05, 0.02, 0.01] {
        let rep = localization_report(&qm, h).unwrap();
        assert!(rep.outside[1] < prev, "{h}: {:?}", rep.outside);
        prev = rep.outside[1];
    }
    assert!(prev < 0.01);
    let model = build_quasimode(&sym(MODEL), &[0.0, 0.0], 0, 0.5).unwrap();
    let rep = localization_report(&model, 0.01).unwrap();
    assert!(rep.outside[1] < 0.01);
    assert!(rep.peak.0.abs() < 0.02 && rep.peak.1.abs() < 0.05, "{:?}", rep.peak);
}
