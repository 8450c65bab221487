use proptest::prelude::*;
use renvol::io;
use renvol::profile::{fuchsian_profile, geometric_grid};
use renvol::sphere::ConformalFactor;
use renvol::surfaces::RadialSurface;
use renvol::tube::{stability_threshold, BoundaryCondition};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn surface_csv_round_trip(r0 in 0.3..3.0f64, a in -0.05..0.05f64, b in -0.05..0.05f64) {
        let s = RadialSurface::from_legendre(&[r0, a, 0.0, b]).unwrap();
        let text = String::from_utf8(io::surface_csv(&s).unwrap()).unwrap();
        let back = io::parse_surface_csv(&text).unwrap();
        prop_assert_eq!(back.band_limit(), s.band_limit());
        prop_assert_eq!(back.radius(), s.radius());
        prop_assert_eq!(back.w_volume(), s.w_volume());
    }

    #[test]
    fn profile_csv_round_trip(genus in 2i64..6, lo in 0.1..10.0f64, n in 8usize..64) {
        let p = fuchsian_profile(2 - 2 * genus, &geometric_grid(lo, lo * 1e3, n)).unwrap();
        let text = String::from_utf8(io::profile_csv(&p).unwrap()).unwrap();
        let back = io::parse_profile_csv(&text).unwrap();
        prop_assert_eq!(back.chi_boundary(), p.chi_boundary());
        prop_assert_eq!(back.volumes(), p.volumes());
        prop_assert_eq!(back.areas(), p.areas());
        prop_assert_eq!(back.d_plus(), p.d_plus());
        prop_assert_eq!(back.d_minus(), p.d_minus());
    }

    #[test]
    fn conformal_json_round_trip(lmax in 0usize..8, amp in 0.0..0.5f64, seed in 0u64..1000) {
        let omega = ConformalFactor::random(lmax, amp, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("omega.json");
        io::write_conformal_json(&path, &omega).unwrap();
        let back = io::read_conformal_json(std::fs::File::open(&path).unwrap()).unwrap();
        prop_assert_eq!(back.coeffs(), omega.coeffs());
    }

    #[test]
    fn threshold_csv_round_trip(lambda in 0.1..20.0f64, periodic in any::<bool>()) {
        let bc = if periodic { BoundaryCondition::Periodic } else { BoundaryCondition::Neumann };
        let th = stability_threshold(lambda, bc).unwrap();
        let text = String::from_utf8(io::threshold_csv(&[th]).unwrap()).unwrap();
        let back = io::parse_threshold_csv(&text).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(back[0].a_max, th.a_max);
        prop_assert_eq!(back[0].r_min, th.r_min);
        prop_assert_eq!(back[0].bc, bc);
    }
}

#[test]
fn two_column_profiles_get_stencil_derivatives() {
    let p = fuchsian_profile(-2, &geometric_grid(1.0, 100.0, 200)).unwrap();
    let mut text = String::from("{\"chi_boundary\": -4, \"core_volume\": 0.0}\nV,I\n");
    for (v, i) in p.volumes().iter().zip(p.areas()) {
        text.push_str(&format!("{v:e},{i:e}\n"));
    }
    let back = io::parse_profile_csv(&text).unwrap();
    let worst = back.d_plus().iter().zip(p.d_plus()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "stencil slope error {worst:.3e}");
}

#[test]
fn malformed_files_are_rejected() {
    assert!(io::parse_surface_csv("theta,radius\n0.1,1.0\n").is_err());
    assert!(io::parse_profile_csv("{\"chi_boundary\": -4}\nV,I\n1,2\n").is_err());
    assert!(io::read_conformal_json("{\"lmax\": 1}".as_bytes()).is_err());
}
