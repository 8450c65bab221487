use std::f64::consts::PI;

use proptest::prelude::*;
use renvol::foliation::{flow, minkowski_report, nested_monotonicity_check, w_invariance_report};
use renvol::hyp3::{
    ball_closed_form, busemann, equidistant_plane_closed_form, horosphere, tube_closed_form, BoundaryPoint,
    SpacePoint,
};
use renvol::profile::{fuchsian_profile, geometric_grid, hawking_mass, IsoProfile};
use renvol::sphere::{curvature, polyakov_diff, polyakov_diff_relative, ConformalFactor};
use renvol::surfaces::RadialSurface;
use renvol::tube::{
    jacobi_eigenvalues, jacobi_eigenvalues_fd, jacobi_eigenvalues_fd_extrapolated, second_eigenvalue,
    stability_threshold, BoundaryCondition, TubeSpec,
};

fn boundary_point() -> impl Strategy<Value = BoundaryPoint> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(t, p)| BoundaryPoint::from_polar(t, p))
}

/// r(θ) = r0 + a·P2(cos θ) + b·P3(cos θ), small enough to stay h-convex.
fn hconvex_surface() -> impl Strategy<Value = RadialSurface> {
    (0.6..2.0f64, -0.04..0.04f64, -0.03..0.03f64)
        .prop_map(|(r0, a, b)| RadialSurface::from_legendre(&[r0, 0.0, a, b]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_w_volume_is_minus_two_pi_r(r in 1e-3..10.0f64) {
        let b = ball_closed_form(r).unwrap();
        // The three closed forms are O(e^{2r}) and cancel down to O(r).
        prop_assert!((b.w_volume() + 2.0 * PI * r).abs() <= 1e-10 * b.area.max(1.0));
    }

    #[test]
    fn ball_derivatives(r in 0.05..8.0f64) {
        let h = 1e-5 * r;
        let (lo, mid, hi) = (ball_closed_form(r - h).unwrap(), ball_closed_form(r).unwrap(), ball_closed_form(r + h).unwrap());
        let dv = (hi.volume - lo.volume) / (2.0 * h);
        let da = (hi.area - lo.area) / (2.0 * h);
        prop_assert!((dv - mid.area).abs() <= 1e-6 * mid.area);
        prop_assert!((da - 2.0 * mid.mean_curvature * mid.area).abs() <= 1e-6 * da);
    }

    #[test]
    fn equidistant_derivatives(r in 0.05..6.0f64, a0 in 1.0..50.0f64) {
        let h = 1e-5;
        let f = |r| equidistant_plane_closed_form(r, a0).unwrap();
        let (lo, mid, hi) = (f(r - h), f(r), f(r + h));
        prop_assert!(((hi.volume - lo.volume) / (2.0 * h) - mid.area).abs() <= 1e-6 * mid.area);
        let da_dv = (hi.area - lo.area) / (hi.volume - lo.volume);
        prop_assert!((da_dv - 2.0 * r.tanh()).abs() <= 1e-6);
        prop_assert!((mid.mean_curvature - r.tanh()).abs() < 1e-15);
    }

    #[test]
    fn busemann_along_geodesics(b in boundary_point(), t in -15.0..15.0f64) {
        let x = SpacePoint::along(b, t);
        // Coordinates within e^{−|t|} of the sphere pin B_b down only to about e^{|t|}·ε.
        let tol = 1e-10f64.max(8.0 * f64::EPSILON * t.abs().exp());
        prop_assert!((busemann(&x, &b).unwrap() - t).abs() < tol);
        prop_assert!((busemann(&x, &b.antipode()).unwrap() + t).abs() < tol);
    }

    #[test]
    fn busemann_changes_by_at_most_the_distance(b in boundary_point(), c in boundary_point(), s in 0.0..3.0f64, t in 0.0..3.0f64) {
        let x = SpacePoint::along(c, s);
        let y = SpacePoint::along(b.antipode(), t);
        let d = (busemann(&x, &b).unwrap() - busemann(&y, &b).unwrap()).abs();
        prop_assert!(d <= x.distance(&y) + 1e-10);
    }

    #[test]
    fn horospheres_are_level_sets(b in boundary_point(), level in -4.0..4.0f64, u in boundary_point()) {
        let (center, radius) = horosphere(&b, level);
        prop_assert!((center.iter().map(|c| c * c).sum::<f64>().sqrt() + radius - 1.0).abs() < 1e-12);
        let d = u.dir();
        let p = [center[0] + radius * d[0], center[1] + radius * d[1], center[2] + radius * d[2]];
        // Skip points within the at-infinity guard of the tangency point.
        prop_assume!(p.iter().map(|c| c * c).sum::<f64>().sqrt() < 1.0 - 1e-6);
        let x = SpacePoint::new(p).unwrap();
        prop_assert!((busemann(&x, &b).unwrap() - level).abs() < 1e-10);
    }

    #[test]
    fn tube_radius_closed_form(a in 0.01..50.0f64) {
        let t = tube_closed_form(a).unwrap();
        // A tube of radius R has principal curvatures coth R and tanh R.
        prop_assert!((t.shape_diag.0 - 1.0 / t.radius.tanh()).abs() < 1e-9 * t.shape_diag.0);
        prop_assert!((t.shape_diag.1 - t.radius.tanh()).abs() < 1e-12);
        prop_assert!(t.mean_curvature > 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn w_volume_is_flow_invariant(s in hconvex_surface()) {
        let (_, spread) = w_invariance_report(&s, &[0.0, 0.5, 1.5, 3.0, 6.0]).unwrap();
        prop_assert!(spread < 1e-6);
    }

    #[test]
    fn flow_is_a_semigroup(s in hconvex_surface(), a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let once = flow(&s, a + b).unwrap();
        let twice = flow(&s, a).unwrap().flow(b).unwrap();
        prop_assert!((once.totals.area - twice.totals.area).abs() < 1e-9 * once.totals.area);
        prop_assert!((once.enclosed_volume - twice.enclosed_volume).abs() < 1e-8 * once.enclosed_volume);
    }

    #[test]
    fn minkowski_slack_is_nonnegative(s in hconvex_surface()) {
        let m = minkowski_report(&s).unwrap();
        prop_assert!(m.slack_log >= -1e-8 && m.slack_combined >= -1e-8);
    }

    #[test]
    fn nested_spheres_and_leaves(s in hconvex_surface(), d in 0.01..2.0f64) {
        // A surface and its own equidistant leaf.
        let outer = RadialSurface::build(
            &s.radius().iter().map(|r| r + d).collect::<Vec<_>>(), s.band_limit()).unwrap();
        let inner = RadialSurface::sphere(s.min_radius() * 0.9).unwrap();
        let rep = nested_monotonicity_check(&inner, &outer).unwrap();
        prop_assert!(rep.holds && rep.inner < rep.outer);
    }

    #[test]
    fn polyakov_cocycle(seed in 0u64..1000, amp in 0.05..0.3f64) {
        let w1 = ConformalFactor::random(5, amp, seed);
        let w2 = ConformalFactor::random(4, amp, seed + 7777);
        let total = polyakov_diff(&w1.add(&w2));
        let split = polyakov_diff(&w1) + polyakov_diff_relative(&w1, &w2);
        prop_assert!((total - split).abs() < 1e-9, "{total} vs {split}");
    }

    #[test]
    fn gauss_curvature_matches_stencil(seed in 0u64..1000) {
        let w = ConformalFactor::random(6, 0.25, seed);
        let k = curvature(&w);
        let g = w.grid();
        let h = 1e-3;
        for j in [3, g.nlat() / 3, g.nlat() / 2, g.nlat() - 5] {
            for kk in [0, 7, g.nlon() / 2 + 1] {
                let (th, ph) = (g.theta(j), g.phi(kk));
                let f = |t: f64, p: f64| w.eval(t, p);
                let d1 = |x0: f64, f: &dyn Fn(f64) -> f64| (f(x0 - 2.0 * h) - 8.0 * f(x0 - h) + 8.0 * f(x0 + h) - f(x0 + 2.0 * h)) / (12.0 * h);
                let d2 = |x0: f64, f: &dyn Fn(f64) -> f64| (-f(x0 - 2.0 * h) + 16.0 * f(x0 - h) - 30.0 * f(x0) + 16.0 * f(x0 + h) - f(x0 + 2.0 * h)) / (12.0 * h * h);
                let wt = d1(th, &|t| f(t, ph));
                let wtt = d2(th, &|t| f(t, ph));
                let wpp = d2(ph, &|p| f(th, p));
                let lap = wtt + th.cos() / th.sin() * wt + wpp / (th.sin() * th.sin());
                let oracle = (-2.0 * f(th, ph)).exp() * (1.0 - lap);
                let got = k.values[j * g.nlon() + kk];
                prop_assert!((got - oracle).abs() < 1e-6, "({j},{kk}): {got} vs {oracle}");
            }
        }
    }
}

#[test]
fn hawking_mass_on_sub_fuchsian_profiles() {
    let base = fuchsian_profile(-2, &geometric_grid(1e-2, 1e4, 300)).unwrap();
    for c in [0.01, 0.3, 2.0] {
        let t = hawking_mass(&base.shifted(-c).unwrap());
        assert!(t.monotone_ok && t.sign_ok, "c = {c}");
        // m_H = −c·sech²r·√I for I = I_TG − c.
        let a0 = 4.0 * PI;
        for k in (0..t.v.len()).step_by(37) {
            let i = base.areas()[k] - c;
            let cosh2 = base.areas()[k] / (2.0 * a0);
            let expected = -c * i.sqrt() / cosh2;
            assert!((t.m_h[k] - expected).abs() < 1e-8 * expected.abs().max(1.0));
        }
    }
}

#[test]
fn hawking_mass_jumps_up_at_convex_kinks() {
    // A corner where the slope drops from I′₋ to I′₊ = I′₋ − 0.05, as at a
    // concave corner of an isoperimetric profile.
    let v = geometric_grid(1.0, 100.0, 41);
    let base = fuchsian_profile(-2, &v).unwrap();
    let kink = 20;
    let mut i = base.areas().to_vec();
    let bump = -0.05;
    for (k, x) in i.iter_mut().enumerate().skip(kink) {
        *x += bump * (v[k] - v[kink]);
    }
    let mut dp = base.d_plus().to_vec();
    let mut dm = base.d_minus().to_vec();
    for k in kink..v.len() {
        dp[k] += bump;
        if k > kink {
            dm[k] += bump;
        }
    }
    let p = IsoProfile::with_derivatives(v, i, dp, dm, -4, 0.0).unwrap();
    let t = hawking_mass(&p);
    assert!(t.jump_at(kink) > 1e-3, "jump {}", t.jump_at(kink));
    assert!(t.jump_at(kink - 1).abs() < 1e-12 && t.jump_at(kink + 1).abs() < 1e-12);
}

#[test]
fn tube_second_eigenvalue_changes_sign_at_threshold() {
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Periodic] {
        for lambda in [0.7, 2.0, 5.0] {
            let th = stability_threshold(lambda, bc).unwrap();
            let below = TubeSpec::new(th.a_max * (1.0 - 1e-6), lambda, bc).unwrap();
            let above = TubeSpec::new(th.a_max * (1.0 + 1e-6), lambda, bc).unwrap();
            assert!(second_eigenvalue(&below) > 0.0, "{bc} λ={lambda}");
            assert!(second_eigenvalue(&above) < 0.0, "{bc} λ={lambda}");
        }
    }
}

#[test]
fn tube_angular_modes_are_positive_when_stable() {
    for a in [0.1, 0.5, 1.0] {
        let s = TubeSpec::new(a, 3.0 / a, BoundaryCondition::Neumann).unwrap();
        for m in 0..5 {
            for n in 1..5 {
                assert!(s.mode_eigenvalue(m, n) > 0.0);
            }
        }
        assert!(s.mode_eigenvalue(0, 0) < 0.0);
    }
}

#[test]
fn tube_fd_spectra_on_parameter_grid() {
    for a in [0.5, 1.0, 1.7] {
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Periodic] {
            let s = TubeSpec::new(a, PI, bc).unwrap();
            let exact = jacobi_eigenvalues(&s, 12, 12).unwrap();
            let fdx = jacobi_eigenvalues_fd_extrapolated(&s, 1024, 10).unwrap();
            let err = fdx.iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-6, "a={a} {bc}: {err:.3e}");
        }
    }
}

#[test]
fn tube_plain_fd_converges_at_second_order() {
    let s = TubeSpec::new(1.0, PI, BoundaryCondition::Neumann).unwrap();
    let exact = jacobi_eigenvalues(&s, 10, 10).unwrap();
    let err = |n| {
        let fd = jacobi_eigenvalues_fd(&s, n, 10).unwrap();
        fd.iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(1024), err(2048));
    assert!((e1 / e2 - 4.0).abs() < 0.01, "ratio {}", e1 / e2);
    // Leading error c·μ·(mπ/N)²/12 of the (2, 0) mode at N = 2048.
    let predicted = 0.5 * 4.0 * (2.0 * PI / 2048.0f64).powi(2) / 12.0;
    assert!((e2 - predicted).abs() < 1e-3 * predicted, "{e2:.6e} vs {predicted:.6e}");
}
