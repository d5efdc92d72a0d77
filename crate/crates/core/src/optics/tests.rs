use proptest::prelude::*;

use super::*;

/// Independent Gouy oracle: the Rayleigh range follows from the
/// self-consistent q-parameter of the round-trip ABCD matrix (flat mirror,
/// propagate L, curved mirror, propagate L), and the one-pass Gouy phase is
/// the Simpson integral of `z_R / (z² + z_R²)` from the waist to the mirror.
fn gouy_oracle(l: f64, roc: f64) -> f64 {
    let prop = |d: f64| [[1.0, d], [0.0, 1.0]];
    let lens = |r: f64| [[1.0, 0.0], [-2.0 / r, 1.0]];
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };
    // Round trip starting at the flat mirror.
    let m = mul(prop(l), mul(lens(roc), prop(l)));
    let (a, b, _c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    // Stable eigenmode: 1/q = (D - A)/(2B) - i·√(1 - ((A+D)/2)²)/B.
    let half_trace = 0.5 * (a + d);
    let imag = (1.0 - half_trace * half_trace).sqrt() / b;
    assert!(((d - a) / (2.0 * b)).abs() < 1e-12, "waist sits on the flat mirror");
    let z_r = 1.0 / imag;
    let n = 20_000;
    let h = l / n as f64;
    let f = |z: f64| z_r / (z * z + z_r * z_r);
    let mut s = f(0.0) + f(l);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / std::f64::consts::PI
}

#[test]
fn gouy_term_matches_propagation_oracle() {
    let oracle = gouy_oracle(3.7, 24.0);
    assert!((oracle - 0.128438).abs() < 1e-6, "oracle {oracle}");
    let g = gouy_term(&CavityGeometry::spherical(24.0, 3.7).unwrap()).unwrap();
    assert!((g - oracle).abs() < 1e-9, "{g} vs {oracle}");
    for &(l, r) in &[(1.0, 24.0), (12.0, 24.0), (20.0, 22.0), (0.3, 5.0)] {
        let g = gouy_fraction(l, r).unwrap();
        assert!((g - gouy_oracle(l, r)).abs() < 1e-8, "L = {l}, R = {r}");
    }
}

#[test]
fn gouy_special_points() {
    assert!(gouy_fraction(1e-12, 24.0).unwrap() < 1e-6);
    assert!((gouy_fraction(12.0, 24.0).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn unstable_geometry_names_bound() {
    let err = CavityGeometry::spherical(24.0, 24.0).unwrap_err();
    assert!(matches!(err, Error::UnstableGeometry { .. }));
    assert!(err.to_string().contains("L ≥ ROC"));
    assert!(CavityGeometry::spherical(24.0, 30.0).is_err());
    assert!(CavityGeometry::new(24.0, 22.0, 22.5, 1.0).is_err());
}

#[test]
fn mode_frequency_design_geometry() {
    let geom = CavityGeometry::spherical(24.0, 3.7).unwrap();
    let r = mode_frequency(&geom, 12).unwrap();
    // Plane-wave sum with the Gouy fraction: λ = 2L / (m + ζ).
    let oracle = 2.0 * 3700.0 / (12.0 + gouy_oracle(3.7, 24.0));
    assert!((r.wavelength_nm - oracle).abs() < 1e-6);
    assert!((r.wavelength_nm - 610.136).abs() < 1e-3);
    assert!((r.wavelength_nm * r.frequency_thz / C_NM_THZ - 1.0).abs() < 1e-6);
}

#[test]
fn mode_frequency_plane_wave() {
    let geom = CavityGeometry::spherical(24.0, 3.7).unwrap();
    let r = mode_frequency_with(&geom, 12, 0, 0, &ModeModel::plane_wave()).unwrap();
    assert!((r.wavelength_nm - 7400.0 / 12.0).abs() < 1e-9);
    assert!((r.wavelength_nm - 616.67).abs() < 0.01);
}

#[test]
fn refractive_index_keeps_medium_wavelength_consistent() {
    let geom = CavityGeometry::new(24.0, 24.0, 3.7, 1.5).unwrap();
    let r = mode_frequency(&geom, 12).unwrap();
    assert!((r.wavelength_nm * r.frequency_thz - C_NM_THZ / 1.5).abs() < 1e-6 * C_NM_THZ);
}

#[test]
fn higher_transverse_orders_are_blue_shifted() {
    let geom = CavityGeometry::spherical(24.0, 3.7).unwrap();
    let model = ModeModel::default();
    let f0 = mode_frequency_with(&geom, 12, 0, 0, &model).unwrap().frequency_thz;
    let f1 = mode_frequency_with(&geom, 12, 1, 0, &model).unwrap().frequency_thz;
    let spacing = f1 - f0;
    let fsr = C_NM_THZ / (2.0 * 3700.0);
    assert!((spacing - fsr * gouy_fraction(3.7, 24.0).unwrap()).abs() < 1e-9);
}

#[test]
fn per_axis_fundamental_averages_axes() {
    let geom = CavityGeometry::new(25.0, 22.0, 3.7, 1.0).unwrap();
    let model = ModeModel { gouy: true, roc_mode: RocMode::PerAxis };
    let r = mode_frequency_with(&geom, 12, 0, 0, &model).unwrap();
    let zeta = 0.5 * (gouy_fraction(3.7, 25.0).unwrap() + gouy_fraction(3.7, 22.0).unwrap());
    assert!((r.wavelength_nm - 7400.0 / (12.0 + zeta)).abs() < 1e-9);
}

/// Brute-force scan of L on a 0.01 nm grid, keeping the smallest
/// |2L - λ(m + ζ(L))|.
fn scan_length(lambda_nm: f64, m: u32, roc: f64, lo: f64, hi: f64) -> f64 {
    let step = 1e-5;
    let mut best = (f64::INFINITY, lo);
    let mut l = lo;
    while l <= hi {
        let res = (2.0 * l - lambda_nm * 1e-3 * (m as f64 + gouy_fraction(l, roc).unwrap())).abs();
        if res < best.0 {
            best = (res, l);
        }
        l += step;
    }
    best.1
}

#[test]
fn resonance_length_matches_grid_scan() {
    let mirror = Mirror::spherical(24.0).unwrap();
    let model = ModeModel::default();
    let l12 = resonance_length(618.5, 12, &mirror, &model).unwrap();
    let s12 = scan_length(618.5, 12, 24.0, 3.6, 3.9);
    assert!((l12 - s12).abs() < 2e-5, "{l12} vs {s12}");
    assert!((l12 - 3.75101).abs() < 1e-5);

    let l14 = resonance_length(533.3, 14, &mirror, &model).unwrap();
    let s14 = scan_length(533.3, 14, 24.0, 3.6, 3.9);
    assert!((l14 - s14).abs() < 2e-5, "{l14} vs {s14}");
    assert!((l14 - 3.76768).abs() < 1e-5);
}

#[test]
fn resonance_length_plane_wave() {
    let mirror = Mirror::spherical(24.0).unwrap();
    let l = resonance_length(618.5, 12, &mirror, &ModeModel::plane_wave()).unwrap();
    assert!((l - 3.711).abs() < 1e-12);
}

#[test]
fn resonance_length_without_root_fails() {
    let mirror = Mirror::spherical(2.0).unwrap();
    let err = resonance_length(618.5, 12, &mirror, &ModeModel::default()).unwrap_err();
    assert!(matches!(err, Error::SearchFailure(_)), "{err}");
}

#[test]
fn double_resonance_finds_design_pair() {
    let mirror = Mirror::spherical(24.0).unwrap();
    let pairs = double_resonance_search(533.3, 618.5, &mirror, (2.0, 6.0), 25.0, &ModeModel::default()).unwrap();
    let hit = pairs.iter().find(|p| p.m_exc == 14 && p.m_det == 12).expect("(14, 12) present");
    assert!((hit.l_um - 3.75).abs() < 0.02);
    assert!(pairs.windows(2).all(|w| w[0].mismatch_nm <= w[1].mismatch_nm));

    let tight = double_resonance_search(533.3, 618.5, &mirror, (2.0, 6.0), 0.1, &ModeModel::default()).unwrap();
    assert!(tight.iter().all(|t| pairs.contains(t)));
}

#[test]
fn double_resonance_identical_wavelengths() {
    let mirror = Mirror::spherical(24.0).unwrap();
    let pairs = double_resonance_search(600.0, 600.0, &mirror, (2.0, 6.0), 1.0, &ModeModel::default()).unwrap();
    assert!(!pairs.is_empty());
    for p in &pairs {
        assert_eq!(p.m_exc, p.m_det);
        assert_eq!(p.mismatch_nm, 0.0);
    }
}

#[test]
fn dispersion_map_rows() {
    let mirror = Mirror::spherical(24.0).unwrap();
    let lengths: Vec<f64> = (0..5).map(|i| 3.7 + 0.3 * i as f64).collect();
    let map = dispersion_map(&mirror, &lengths, (11, 17), 2, &ModeModel::default()).unwrap();
    assert_eq!(map.len(), 5 * 7 * 3);
    assert!(map.iter().all(|p| p.wavelength_nm > 400.0 && p.wavelength_nm < 1000.0));
}

proptest! {
    #[test]
    fn gouy_bounded_and_monotone(roc in 1.0f64..100.0, f1 in 0.001f64..0.998, df in 0.0001f64..0.001) {
        let f2 = (f1 + df).min(0.999);
        let g1 = gouy_fraction(f1 * roc, roc).unwrap();
        let g2 = gouy_fraction(f2 * roc, roc).unwrap();
        prop_assert!((0.0..0.5).contains(&g1));
        prop_assert!(g2 >= g1);
    }

    #[test]
    fn frequency_increases_with_m_and_shorter_length(
        roc in 10.0f64..50.0, frac in 0.05f64..0.9, m in 1u32..40, shrink in 0.001f64..0.2
    ) {
        let l = frac * roc;
        let geom = CavityGeometry::spherical(roc, l).unwrap();
        let f = mode_frequency(&geom, m).unwrap().frequency_thz;
        prop_assert!(mode_frequency(&geom, m + 1).unwrap().frequency_thz > f);
        let shorter = CavityGeometry::spherical(roc, l * (1.0 - shrink)).unwrap();
        prop_assert!(mode_frequency(&shorter, m).unwrap().frequency_thz > f);
    }

    #[test]
    fn resonance_length_inverts_mode_frequency(roc in 10.0f64..50.0, frac in 0.02f64..0.6, m in 1u32..40) {
        let mirror = Mirror::spherical(roc).unwrap();
        let geom = mirror.with_length(frac * roc).unwrap();
        let lam = mode_frequency(&geom, m).unwrap().wavelength_nm;
        let l = resonance_length(lam, m, &mirror, &ModeModel::default()).unwrap();
        prop_assert!((l / geom.l_eff_um - 1.0).abs() < 1e-6, "{} vs {}", l, geom.l_eff_um);
    }
}
