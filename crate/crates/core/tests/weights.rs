use semiclassical::classical::PhaseBox;
use semiclassical::linalg::{self, CMat};
use semiclassical::quantize::{
    grid_points, weyl_quantize, weyl_quantize_poly, Basis, FnSymbol, WICK_QUADRATIC_SHIFT,
};
use semiclassical::quasimode::smooth_cutoff;
use semiclassical::spectral::{eigendecompose, SigmaMethod};
use semiclassical::weights::*;
use semiclassical::{Error, SymbolExpr, C64};

fn sym(s: &str, n: usize) -> SymbolExpr {
    SymbolExpr::parse(s, n).unwrap()
}

const ROTATED: &str = "xi1^2 + 1i*xi1 + x1^2";
const MODEL: &str = "xi1 + 1i*(x1^2 - 1)";
const DAVIES: &str = "xi1^2 + xi2^2 + x1^2 - 1i*x2^2";

#[test]
fn escape_weight_model_symbol() {
    let p = sym(MODEL, 1);
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let w = escape_weight(&p, C64::new(0.0, 0.0), &b, 5.0).unwrap();
    assert_eq!(w.samples, 2);
    assert!(!w.vacuous);
    let g = w.gamma.unwrap();
    assert!(g > 0.0, "gamma = {g}");
    // level points (±1, 0): H_Re p = ∂x, local sizes T = 1/2 and r = 1/4
    for bump in &w.bumps {
        assert!((bump.length - 0.5).abs() < 1e-12);
        assert!((bump.radius - 0.25).abs() < 1e-9);
        assert!(bump.exit_time > 0.0 && bump.exit_time < 0.1);
    }
    assert!(w.max_energy_drift <= 1e-8);

    let mut opts = EscapeOptions::new(1, 5.0);
    opts.seeds_per_axis *= 2;
    let w2 = escape_weight_with(&p, C64::new(0.0, 0.0), &b, opts).unwrap();
    let g2 = w2.gamma.unwrap();
    assert!((g2 - g).abs() <= 0.1 * g, "{g} vs {g2}");
}

#[test]
fn escape_weight_is_real_and_compact() {
    let p = sym(MODEL, 1);
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let w = escape_weight(&p, C64::new(0.0, 0.0), &b, 5.0).unwrap();
    for bump in &w.bumps {
        assert!(bump.radius.is_finite() && bump.length.is_finite());
    }
    assert_eq!(w.value(&[2.5, 0.0]), 0.0);
    assert_eq!(w.value(&[0.0, 1.0]), 0.0);
    // gradient against differences away from the centers
    let x = [1.1, 0.05];
    let g = w.gradient(&x);
    for k in 0..2 {
        let mut a = x;
        let mut c = x;
        a[k] += 1e-6;
        c[k] -= 1e-6;
        assert!(((w.value(&a) - w.value(&c)) / 2e-6 - g[k]).abs() < 1e-6);
    }
}

#[test]
fn davies_real_axis_violates_dynamical_condition() {
    let p = sym(DAVIES, 2);
    let b = PhaseBox::cube(2, -2.0, 2.0).unwrap();
    let err = escape_weight(&p, C64::new(1.0, 0.0), &b, 5.0).unwrap_err();
    assert!(matches!(err, Error::DynamicalCondition(_)), "{err}");
    assert!(err.to_string().contains("dynamical condition violated"));
}

#[test]
fn davies_left_half_plane_is_vacuous() {
    let p = sym(DAVIES, 2);
    let b = PhaseBox::cube(2, -2.0, 2.0).unwrap();
    let w = escape_weight(&p, C64::new(-1.0, 0.0), &b, 5.0).unwrap();
    assert!(w.vacuous);
    assert!(w.gamma.is_none());
    assert!(w.bumps.is_empty());
}

#[test]
fn rotated_oscillator_vertex_is_a_fixed_point() {
    // p(0, 0) = 0 and H_Re p vanishes there: the flow never leaves the characteristic set
    let p = sym(ROTATED, 1);
    let b = PhaseBox::cube(1, -2.0, 2.0).unwrap();
    let err = escape_weight(&p, C64::new(0.0, 0.0), &b, 5.0).unwrap_err();
    assert!(matches!(err, Error::DynamicalCondition(_)));
}

/// `G = −x χ(x)/(2h)` with `χ = 1` on `|x| ≤ 2`, 0 beyond 5.
fn linear_weight(h: f64) -> FnSymbol<impl Fn(&[f64]) -> C64 + Sync> {
    FnSymbol {
        dim: 1,
        f: move |w: &[f64]| {
            let chi = smooth_cutoff(1.0 + (w[0].abs() - 2.0) / 3.0, 1.0);
            C64::new(-w[0] * chi / (2.0 * h), 0.0)
        },
        x_only: true,
        label: "-x chi(x)/2h".into(),
    }
}

#[test]
fn conjugation_identity_interior_block() {
    let h = 0.1;
    let m = 160;
    let basis = Basis::Hermite { m, n: 1 };
    let p = weyl_quantize_poly(&sym(ROTATED, 1), basis, h).unwrap();
    let g = quantize_weight(&linear_weight(h), basis, h).unwrap();
    let c = conjugate_operator(&p, &g, h, &[]).unwrap();
    let k = 12;
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let want = if i == j { C64::new(h * (2 * i + 1) as f64 + 0.25, 0.0) } else { C64::new(0.0, 0.0) };
            defect = defect.max((c.op.matrix[(i, j)] - want).norm());
            scale = scale.max(want.norm());
        }
    }
    assert!(defect / scale <= 1e-6, "relative defect {:e}", defect / scale);
    assert!(c.report.cond < COND_CAP);
    assert!(c.report.displacement <= c.report.displacement_tol, "{:?}", c.report);
}

#[test]
fn zero_epsilon_is_identity() {
    let h = 0.1;
    let basis = Basis::Hermite { m: 40, n: 1 };
    let p = weyl_quantize_poly(&sym(ROTATED, 1), basis, h).unwrap();
    let g = quantize_weight(&linear_weight(h), basis, h).unwrap();
    let c = conjugate_operator(&p, &g, 0.0, &[C64::new(2.0, 1.0)]).unwrap();
    for i in 0..40 {
        for j in 0..40 {
            assert_eq!(c.op.matrix[(i, j)], p.matrix[(i, j)]);
        }
    }
    assert!((c.report.cond - 1.0).abs() < 1e-12);
}

#[test]
fn overly_strong_weight_is_rejected() {
    let h = 0.1;
    let basis = Basis::Hermite { m: 60, n: 1 };
    let p = weyl_quantize_poly(&sym(ROTATED, 1), basis, h).unwrap();
    let g = quantize_weight(&linear_weight(h), basis, h).unwrap();
    let err = conjugate_operator(&p, &g, 20.0 * h, &[]).unwrap_err();
    assert!(matches!(err, Error::WeightTooStrong(_)));
}

#[test]
fn boundary_exclusion_model_symbol() {
    let p = sym(MODEL, 1);
    let z0 = C64::new(0.0, 0.0);
    let b = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let w = escape_weight(&p, z0, &b, 5.0).unwrap();
    let runs: Vec<(f64, Basis)> = [0.05, 0.025]
        .iter()
        .map(|&h| (h, Basis::FourierGrid { half_width: 4.0, points: (12.8 / h) as usize, n: 1 }))
        .collect();
    let report = boundary_exclusion_experiment(&p, z0, &w, &runs, &ExclusionSettings::default()).unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        assert!(row.epsilon > 0.0 && row.cond <= 1e8 * 1.0001);
        assert!(row.sigma_min > 0.0);
    }
}

fn davies(h: f64, m: usize, l: f64) -> DissipativeOperator {
    let basis = Basis::FourierGrid { half_width: l, points: m, n: 2 };
    let window = PhaseBox::cube(2, -l, l).unwrap();
    dissipative_build(&sym("xi1^2 + xi2^2 + x1^2", 2), &sym("x2^2", 2), basis, h, &window).unwrap()
}

#[test]
fn davies_operator_against_tensor_oracle() {
    let (h, m, l) = (0.1, 24, 4.0);
    let op = davies(h, m, l);
    let cert = op.certification();
    assert!(cert.w_psd && cert.hermitian_defect <= 1e-12);
    assert!(op.dissipativity_probe(100, 11) <= 1e-12);
    let spec = eigendecompose(&op.p).unwrap();
    let acc = spec.accepted_values();
    assert!(!acc.is_empty());
    assert!(acc.iter().all(|l| l.im <= 1e-8));
    // coarse grid: the lowest eigenvalue sits within 2e−3 of the continuum value
    let low = C64::new(h, 0.0) + C64::from_polar(h, -std::f64::consts::FRAC_PI_4) - C64::new(0.0, 0.5);
    assert!(spec.distance(low) < 2e-3, "{}", spec.distance(low));
    // 1-D factors on the same grid
    let b1 = Basis::FourierGrid { half_width: l, points: m, n: 1 };
    let a = weyl_quantize(&sym("xi1^2 + x1^2", 1), b1, h).unwrap();
    let kin = weyl_quantize(&sym("xi1^2", 1), b1, h).unwrap();
    let xs = grid_points(l, m);
    let damp = CMat::from_fn(m, m, |i, j| {
        if i == j {
            C64::new(0.0, -(xs[i] * xs[i] + WICK_QUADRATIC_SHIFT))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let alpha = linalg::eigenvalues(&a.matrix).unwrap();
    let beta = linalg::eigenvalues(&(&kin.matrix + &damp)).unwrap();
    for lam in &acc {
        let d = alpha
            .iter()
            .flat_map(|x| beta.iter().map(move |y| (x + y - lam).norm()))
            .fold(f64::INFINITY, f64::min);
        assert!(d <= 1e-5, "{lam} off the tensor oracle by {d:e}");
    }
}

#[test]
fn complex_harmonic_factor_phase() {
    // (hD)² − i(x² + 1/2) has eigenvalues e^{−iπ/4}(2k+1)h − i/2
    let (h, m, l) = (0.1, 128, 5.0);
    let b1 = Basis::FourierGrid { half_width: l, points: m, n: 1 };
    let kin = weyl_quantize(&sym("xi1^2", 1), b1, h).unwrap();
    let xs = grid_points(l, m);
    let damp = CMat::from_fn(m, m, |i, j| {
        if i == j {
            C64::new(0.0, -(xs[i] * xs[i] + WICK_QUADRATIC_SHIFT))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let op = kin.with_matrix(&kin.matrix + &damp, "test");
    let spec = eigendecompose(&op).unwrap();
    for k in 0..4 {
        let want = C64::from_polar(h * (2 * k + 1) as f64, -std::f64::consts::FRAC_PI_4) - C64::new(0.0, 0.5);
        assert!(spec.distance(want) < 1e-6, "{k}: {}", spec.distance(want));
    }
}

#[test]
fn davies_resolvent_bound() {
    let op = davies(0.1, 24, 4.0);
    let zs: Vec<C64> = (0..20)
        .map(|k| C64::new(-1.0 + 0.2 * k as f64, 0.1 + 1.9 * k as f64 / 19.0))
        .collect();
    let chk = dissipative_resolvent_check(&op, &zs, SigmaMethod::Svd).unwrap();
    assert!(chk.all_ok, "{:?}", chk.points.iter().map(|p| p.margin).collect::<Vec<_>>());
    let chk = dissipative_resolvent_check(&op, &[C64::new(1.0, 0.5)], SigmaMethod::Svd).unwrap();
    assert!(chk.points[0].sigma_min >= 0.5 - 1e-8);
    let far = C64::new(0.0, 2.0 * op.norm);
    let chk = dissipative_resolvent_check(&op, &[far], SigmaMethod::Svd).unwrap();
    assert!(chk.points[0].sigma_min >= op.norm * (1.0 - 1e-6));
    assert!(dissipative_resolvent_check(&op, &[C64::new(1.0, 0.0)], SigmaMethod::Svd).is_err());
}

#[test]
fn trivial_dissipative_cases() {
    let h = 0.1;
    let basis = Basis::Hermite { m: 40, n: 1 };
    let window = PhaseBox::cube(1, -3.0, 3.0).unwrap();
    let q = sym("xi1^2 + x1^2", 1);
    let herm = dissipative_build(&q, &sym("0", 1), basis, h, &window).unwrap();
    let spec = eigendecompose(&herm.p).unwrap();
    assert!(spec.eigenvalues.iter().all(|l| l.im.abs() < 1e-10));
    let chk = dissipative_resolvent_check(&herm, &[C64::new(0.3, 1.0)], SigmaMethod::Svd).unwrap();
    assert!(chk.points[0].sigma_min >= 1.0 - 1e-12);

    let shifted = dissipative_build(&q, &sym("1", 1), basis, h, &window).unwrap();
    let spec = eigendecompose(&shifted.p).unwrap();
    for k in 0..10 {
        let want = C64::new(h * (2 * k + 1) as f64, -1.0);
        assert!((spec.eigenvalues[k] - want).norm() < 1e-10);
    }
    assert!(dissipative_build(&q, &sym("x1", 1), basis, h, &window).is_err());
    assert!(dissipative_build(&sym("xi1^2 + 1i*x1", 1), &sym("1", 1), basis, h, &window).is_err());
}

#[test]
fn proximity_exact_eigenvector() {
    let h = 0.05;
    let basis = Basis::Hermite { m: 40, n: 1 };
    let p = weyl_quantize_poly(&sym("xi1^2 + x1^2", 1), basis, h).unwrap();
    let mut u = vec![C64::new(0.0, 0.0); 40];
    u[0] = C64::new(1.0, 0.0);
    let r = quasimode_spectrum_proximity(&p, &u, C64::new(h, 0.0)).unwrap();
    assert!(r.residual < 1e-12 && r.distance < 1e-10);
    let noise = linalg::seeded_vector(40, 5);
    let r = quasimode_spectrum_proximity(&p, &noise, C64::new(h, 0.0)).unwrap();
    assert!(r.residual > 0.1);
}

/// `a = 1 − φ(x)φ(ξ)`, vanishing on `|x|, |ξ| ≤ 1`.
fn vanishing_damping() -> FnSymbol<impl Fn(&[f64]) -> C64 + Sync> {
    FnSymbol {
        dim: 1,
        f: |w: &[f64]| C64::new(1.0 - smooth_cutoff(w[0].abs(), 1.0) * smooth_cutoff(w[1].abs(), 1.0), 0.0),
        x_only: false,
        label: "1 - phi(x) phi(xi)".into(),
    }
}

#[test]
fn proximity_vanishing_damping() {
    let limit = FnSymbol { dim: 1, f: |_: &[f64]| C64::new(1.0, 0.0), x_only: true, label: "1".into() };
    let a = vanishing_damping();
    for (h, m) in [(0.05, 320), (0.025, 640)] {
        let l = 5.0;
        let basis = Basis::FourierGrid { half_width: l, points: m, n: 1 };
        let window = PhaseBox::cube(1, -l, l).unwrap();
        let op = dissipative_build_with(&sym("xi1^2 + x1^2", 1), &a, Some(&limit), basis, h, &window).unwrap();
        let xs = grid_points(l, m);
        let u: Vec<C64> = xs.iter().map(|x| C64::new((-x * x / (2.0 * h)).exp(), 0.0)).collect();
        let wu = linalg::matvec(&op.w.matrix, &u);
        let shift = linalg::vdot(&u, &wu) / linalg::vdot(&u, &u).re;
        let lambda = C64::new(h, 0.0) - C64::new(0.0, 1.0) * shift;
        let r = quasimode_spectrum_proximity(&op.p, &u, lambda).unwrap();
        assert!(r.distance <= 10.0 * r.residual / h, "{r:?}");
    }
}
