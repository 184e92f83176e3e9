use semiclassical::linalg::{self, CMat};
use semiclassical::quantize::{weyl_quantize, Basis, OperatorMatrix, Provenance};
use semiclassical::spectral::*;
use semiclassical::{SymbolExpr, C64};

fn sym(s: &str) -> SymbolExpr {
    SymbolExpr::parse(s, 1).unwrap()
}

fn raw(matrix: CMat) -> OperatorMatrix {
    OperatorMatrix {
        matrix,
        h: 1.0,
        basis: Basis::Hermite { m: 1, n: 1 },
        provenance: Provenance { path: "test".into(), symbol: String::new() },
        warnings: Vec::new(),
    }
}

#[test]
fn harmonic_oscillator_levels_on_both_bases() {
    let h = 0.1;
    let herm = weyl_quantize(&sym("xi1^2 + x1^2"), Basis::Hermite { m: 40, n: 1 }, h).unwrap();
    let grid = weyl_quantize(&sym("xi1^2 + x1^2"), Basis::FourierGrid { half_width: 6.0, points: 128, n: 1 }, h).unwrap();
    for op in [herm, grid] {
        let s = eigendecompose(&op).unwrap();
        let acc = s.accepted_values();
        assert!(acc.len() >= 10, "{}", acc.len());
        for (k, l) in acc.iter().take(10).enumerate() {
            assert!((l - C64::new((2 * k + 1) as f64 * h, 0.0)).norm() < 1e-9, "{k}: {l}");
        }
    }
}

#[test]
fn rotated_oscillator_is_a_shifted_oscillator() {
    // ξ² + iξ + x² = (ξ + i/2)² + x² + 1/4
    let h = 0.1;
    let op = weyl_quantize(&sym("xi1^2 + 1i*xi1 + x1^2"), Basis::Hermite { m: 80, n: 1 }, h).unwrap();
    let s = eigendecompose(&op).unwrap();
    let acc = s.accepted_values();
    for (k, l) in acc.iter().take(5).enumerate() {
        assert!((l - C64::new((2 * k + 1) as f64 * h + 0.25, 0.0)).norm() < 1e-8, "{k}: {l}");
    }
    // spurious modes are rejected rather than reported
    assert!(acc.len() < op.size());
    assert!(s.distance(C64::new(0.35, 0.0)) < 1e-8);
}

#[test]
fn normal_matrix_sigma_is_distance_to_spectrum() {
    let eig = [C64::new(0.0, 0.0), C64::new(1.0, 1.0), C64::new(-2.0, 0.5), C64::new(3.0, -1.0)];
    let mut d = CMat::zeros(4, 4);
    for (i, l) in eig.iter().enumerate() {
        d[(i, i)] = *l;
    }
    // conjugate by a unitary to make it less trivial
    let q = linalg::expm(&CMat::from_fn(4, 4, |i, j| {
        let a = C64::new((i + 2 * j) as f64 * 0.1, (i * j) as f64 * 0.05);
        let b = C64::new((j + 2 * i) as f64 * 0.1, (i * j) as f64 * 0.05);
        (a - b.conj()) * 0.5
    }));
    let p = &q * &d * linalg::adjoint(&q);
    for method in [SigmaMethod::Svd, SigmaMethod::Schur] {
        let e = SigmaEngine::new(&p, method).unwrap();
        for z in [C64::new(0.5, 0.5), C64::new(-1.0, 2.0), C64::new(2.9, -1.1)] {
            let want = eig.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min);
            let got = e.sigma_min(z).unwrap();
            assert!((got.value - want).abs() < 1e-10, "{method:?} {z}: {} vs {want}", got.value);
            assert!(!got.fallback);
        }
    }
}

#[test]
fn jordan_block_resolvent_grows_like_a_power() {
    // σ_min(J_n − z) ≈ |z|^n for the nilpotent block at small |z|
    let n = 6;
    let j = CMat::from_fn(n, n, |a, b| if b == a + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let e = SigmaEngine::new(&j, SigmaMethod::Schur).unwrap();
    let r = 0.3;
    let s = e.sigma_min(C64::new(r, 0.0)).unwrap().value;
    let svd = linalg::sigma_min_svd(&j, C64::new(r, 0.0)).unwrap();
    assert!((s - svd).abs() / svd < 1e-8);
    assert!(s < 2.0 * r.powi(n as i32) && s > 0.2 * r.powi(n as i32), "{s}");
}

#[test]
fn sigma_floor_is_flagged_at_an_eigenvalue() {
    let op = weyl_quantize(&sym("xi1^2 + x1^2"), Basis::Hermite { m: 20, n: 1 }, 0.1).unwrap();
    for method in [SigmaMethod::Svd, SigmaMethod::Schur] {
        let v = resolvent_norm(&op, C64::new(0.1, 0.0), method).unwrap();
        assert!(v.floored, "{method:?}");
        assert!(v.value > 0.0);
    }
}

#[test]
fn schur_grid_matches_svd_grid() {
    let op = weyl_quantize(&sym("xi1^2 + 1i*xi1 + x1^2"), Basis::Hermite { m: 40, n: 1 }, 0.1).unwrap();
    let rect = Rect { re_min: -1.0, re_max: 4.0, im_min: -1.0, im_max: 3.0 };
    let fast = pseudospectrum_grid_with(&op, rect, (11, 9), SigmaMethod::Schur).unwrap();
    let slow = pseudospectrum_grid_with(&op, rect, (11, 9), SigmaMethod::Svd).unwrap();
    assert_eq!(fast.fallbacks, 0);
    // σ is only defined to about eps·‖P‖ = floor / 1e3
    for (a, b) in fast.values.iter().zip(&slow.values) {
        assert!((a - b).abs() <= 1e-8 * b + 1e-2 * fast.floor, "{a} vs {b}");
    }
    assert!(pseudospectrum_grid(&op, Rect { re_min: 1.0, re_max: 1.0, im_min: 0.0, im_max: 1.0 }, (3, 3)).is_err());
}

#[test]
fn power_and_exponential_fits_recover_parameters() {
    let hs = [0.1f64, 0.05, 0.025, 0.0125, 0.00625];
    let pow: Vec<(f64, f64)> = hs.iter().map(|&h| (h, 3.0 * h.powf(2.0 / 3.0))).collect();
    let f = scaling_fit(&pow, FitModel::Power).unwrap();
    assert!((f.exponent.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    assert!((f.predict(0.05).unwrap() - 3.0 * 0.05f64.powf(2.0 / 3.0)).abs() < 1e-12);
    assert!(f.predict(0.2).is_err());

    let exp: Vec<(f64, f64)> = hs.iter().map(|&h| (h, 2.0 * (-0.7 / h).exp())).collect();
    let f = scaling_fit(&exp, FitModel::Exponential).unwrap();
    assert!((f.rate.unwrap() - 0.7).abs() < 1e-10);

    let f = scaling_fit_flagged(&pow, &[false, false, false, false, true], FitModel::Power).unwrap();
    assert_eq!(f.samples.len(), 4);
    assert_eq!(f.excluded.len(), 1);
    assert!(scaling_fit(&pow[..3], FitModel::Power).is_err());
    // four samples spanning less than a factor 4
    let narrow: Vec<(f64, f64)> = [0.1, 0.09, 0.08, 0.07].iter().map(|&h| (h, h)).collect();
    assert!(scaling_fit(&narrow, FitModel::Power).is_err());
}

#[test]
fn circle_contour_from_a_radial_field() {
    let rect = Rect { re_min: -2.0, re_max: 2.0, im_min: -2.0, im_max: 2.0 };
    let g = ResolventGrid::from_field(rect, (81, 81), |z| z.norm());
    let lines = contour_extract(&g, &[1.0]);
    assert_eq!(lines.len(), 1);
    let l = &lines[0];
    assert!(l.closed);
    for &(x, y) in &l.points {
        assert!(((x * x + y * y).sqrt() - 1.0).abs() < 5e-3);
    }
    assert!(point_in_polygon((0.0, 0.0), &l.points));
    assert!(!point_in_polygon((1.5, 0.0), &l.points));
    // levels outside the field's range give nothing
    assert!(contour_extract(&g, &[10.0]).is_empty());
}

#[test]
fn subelliptic_sweep_exponent() {
    let rule = BasisRule::Grid { half_width: 2.0, points: 512, n: 1 };
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let s = resolvent_sweep(&sym("xi1 + 1i*x1^2"), None, C64::new(0.0, 0.0), rule, &hs, Some(1.0), SigmaMethod::Svd).unwrap();
    let e = s.fit(FitModel::Power).unwrap().exponent.unwrap();
    assert!((e - 2.0 / 3.0).abs() < 0.05, "{e}");
}

#[test]
fn grid_auto_rule_doubles_with_h() {
    let r = BasisRule::GridAuto { half_width: 3.0, xi_max: 10.0, n: 1, min_points: 64 };
    let a = r.basis(0.1).per_axis();
    let b = r.basis(0.05).per_axis();
    assert!(a.is_power_of_two() && b == 2 * a);
    assert_eq!(r.basis(10.0).per_axis(), 64);
}

#[test]
fn tail_mass_sees_top_modes() {
    let b = Basis::Hermite { m: 20, n: 1 };
    let mut v = vec![C64::new(0.0, 0.0); 20];
    v[0] = C64::new(1.0, 0.0);
    assert_eq!(tail_mass(&b, &v), 0.0);
    v[19] = C64::new(1.0, 0.0);
    assert!((tail_mass(&b, &v) - 0.5).abs() < 1e-12);
}

#[test]
fn eigen_size_cap_is_enforced() {
    let op = raw(linalg::identity(30));
    let opts = EigenOptions { size_cap: 10, ..Default::default() };
    assert!(eigendecompose_with(&op, opts).is_err());
}
