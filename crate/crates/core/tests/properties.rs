//! Randomized invariants: linearity, exact closed forms, fit recovery.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use jang_core::barrier;
use jang_core::geometry::{sphere_volume, warped_scalar_curvature};
use jang_core::jang::trapping_margin;
use jang_core::mass;
use jang_core::model::{ModelData, ZonalFunction};
use jang_core::numerics::fit;
use jang_core::numerics::quad;
use jang_core::sphere;
use jang_core::Real;

fn zonal_model(n: usize, m0: Real, m1: Real, p0: Real, p1: Real) -> ModelData {
    let pts = 192;
    let th: Vec<Real> = (0..=pts).map(|i| std::f64::consts::PI * i as Real / pts as Real).collect();
    let m: Vec<Real> = th.iter().map(|t| m0 + m1 * t.cos()).collect();
    let p: Vec<Real> = th.iter().map(|t| p0 + p1 * t.cos()).collect();
    ModelData::new(
        n,
        ZonalFunction::sampled(th.clone(), m).unwrap(),
        ZonalFunction::sampled(th, p).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // 𝓜 is linear in the lapse; indices i ≥ 2 vanish by parity.
    #[test]
    fn flux_linearity(
        n in 4usize..=7,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        m1 in -0.5f64..0.5,
        p1 in -0.5f64..0.5,
        r in 30.0f64..120.0,
    ) {
        let model = zonal_model(n, 2.0, m1, 0.5, p1);
        let f0 = mass::mass_flux(&model, 0, r).unwrap();
        let f1 = mass::mass_flux(&model, 1, r).unwrap();
        let mut coeffs = vec![0.0; n + 1];
        coeffs[0] = a;
        coeffs[1] = b;
        coeffs[n] = 1.7; // must drop out exactly
        let combined = mass::mass_flux_combination(&model, &coeffs, r).unwrap();
        let scale = 1.0 + f0.abs().max(f1.abs());
        prop_assert!((combined - (a * f0 + b * f1)).abs() < 1e-9 * scale);
        prop_assert_eq!(mass::mass_flux(&model, 2, r).unwrap(), 0.0);
    }

    // Extrapolation recovers the limit of an exact power-law tail.
    #[test]
    fn richardson_recovers_power_law_limit(
        limit in -5.0f64..5.0,
        amp in -10.0f64..10.0,
        order in 1.0f64..3.0,
    ) {
        let pairs: Vec<(Real, Real)> = [20.0, 40.0, 80.0, 160.0]
            .iter()
            .map(|&r: &Real| (r, limit + amp * r.powf(-order)))
            .collect();
        let (got, residual, _) = mass::richardson_extrapolate(&pairs, order).unwrap();
        prop_assert!((got - limit).abs() < 1e-9 + residual.abs());
        assert_abs_diff_eq!(got, limit, epsilon = 1e-6);
    }

    // Log-log slope fit is exact on pure power laws.
    #[test]
    fn loglog_slope_exact_on_power_laws(
        amp in 0.01f64..100.0,
        expo in -8.0f64..-0.5,
    ) {
        let r: Vec<Real> = (1..=12).map(|i| 3.0f64.powi(i) / 2.0).collect();
        let v: Vec<Real> = r.iter().map(|&x| amp * x.powf(expo)).collect();
        let slope = fit::loglog_slope(&r, &v).unwrap();
        assert_relative_eq!(slope, expo, max_relative = 1e-10);
    }

    // Coordinate spheres of the hyperbolic background are untrapped at
    // every radius and dimension.
    #[test]
    fn hyperbolic_spheres_untrapped(n in 4usize..=7, r in 0.1f64..500.0) {
        let model = ModelData::hyperbolic(n).unwrap();
        let margin = trapping_margin(&model, r, 0.0, 0.0);
        prop_assert!(margin > 0.0);
        // Closed form (n-1)(√(1+r²) - r)/r, written without the large-r
        // cancellation; the margin itself is conditioned like ε r².
        let exact = (n as Real - 1.0) / (r * ((1.0 + r * r).sqrt() + r));
        assert_relative_eq!(margin, exact, max_relative = 1e-13 * (1.0 + r * r));
    }

    // Flat space in polar form has zero scalar curvature.
    #[test]
    fn flat_polar_scalar_curvature_vanishes(n in 4usize..=7, r in 0.5f64..100.0) {
        let rc = warped_scalar_curvature(1.0, 0.0, r * r, 2.0 * r, 2.0, n).unwrap();
        prop_assert!(rc.abs() < 1e-12 * (1.0 + 1.0 / (r * r)));
    }

    // Constant-trace models have the exact tail coefficient
    // -(n-1)(p̄ + (n-2)/2 m̄)/(n-3), and the sphere stage is linear in the data.
    #[test]
    fn alpha_closed_form_and_linearity(
        n in 4usize..=7,
        mb in -2.0f64..4.0,
        pb in -2.0f64..4.0,
    ) {
        let nf = n as Real;
        let model = ModelData::spherical(n, mb, pb).unwrap();
        let alpha = sphere::solve_alpha(&model).unwrap();
        let expected = -(nf - 1.0) * (pb + (nf - 2.0) / 2.0 * mb) / (nf - 3.0);
        assert_abs_diff_eq!(alpha.sphere_mean(n), expected, epsilon = 1e-10);
        // Doubling the data doubles the tail.
        let doubled = ModelData::spherical(n, 2.0 * mb, 2.0 * pb).unwrap();
        let alpha2 = sphere::solve_alpha(&doubled).unwrap();
        assert_abs_diff_eq!(alpha2.sphere_mean(n), 2.0 * expected, epsilon = 1e-10);
    }

    // The exact hyperboloid slope profile solves the unforced slope ODE and
    // the full operator at every radius.
    #[test]
    fn orbit_residual_vanishes(n in 4usize..=7, r in 0.5f64..300.0) {
        let model = ModelData::hyperbolic(n).unwrap();
        let k = r / (1.0 + r * r).sqrt();
        let kp = (1.0 + r * r).powf(-1.5);
        let (value, pi) = barrier::normalized_jang_residual(&model, 0.0, k, kp, r).unwrap();
        prop_assert!(value.abs() < 1e-11);
        assert_abs_diff_eq!(pi, 1.0, epsilon = 1e-12);
    }

    // Gauss quadrature integrates low-degree polynomials exactly.
    #[test]
    fn quadrature_exact_on_polynomials(
        c0 in -3.0f64..3.0,
        c1 in -3.0f64..3.0,
        c3 in -3.0f64..3.0,
        hi in 1.0f64..6.0,
    ) {
        let value = quad::integrate(|x: Real| c0 + c1 * x + c3 * x * x * x, 0.0, hi, 24);
        let exact = c0 * hi + c1 * hi * hi / 2.0 + c3 * hi.powi(4) / 4.0;
        assert_relative_eq!(value, exact, max_relative = 1e-12, epsilon = 1e-12);
    }

    // Round-sphere volumes satisfy the dimension recursion
    // ω_{n} = 2π ω_{n-2} / (n-2).
    #[test]
    fn sphere_volume_recursion(n in 4usize..=9) {
        let lhs = sphere_volume(n).unwrap();
        let rhs = 2.0 * std::f64::consts::PI * sphere_volume(n - 2).unwrap() / (n as Real - 2.0);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }
}
