use super::*;
use crate::dataio::{export_report, XyData};

#[test]
fn measured_purcell() {
    assert!((purcell_measured(21.7, 12.2).unwrap() - 1.7787).abs() < 1e-4);
    assert_eq!(purcell_measured(5.0, 5.0).unwrap(), 1.0);
    assert!((purcell_measured(21.7, 13.1).unwrap() - 1.66).abs() < 0.02);
    assert!(purcell_measured(21.7, 30.0).unwrap() < 1.0);
    assert!(purcell_measured(0.0, 1.0).is_err());
}

#[test]
fn theoretical_purcell_linear_in_q() {
    let f = purcell_theoretical(618.5, 1.0, 56400.0, 21.0).unwrap();
    assert!((f - 204.0).abs() < 2.0, "{f}");
    let f2 = purcell_theoretical(618.5, 1.0, 112800.0, 21.0).unwrap();
    assert!((f2 / f - 2.0).abs() < 1e-14);
    let half_v = purcell_theoretical(618.5, 1.0, 56400.0, 10.5).unwrap();
    assert!((half_v / f - 2.0).abs() < 1e-14);
}

#[test]
fn spatial_correction_design_geometry() {
    let g = CavityGeometry::spherical(24.0, 3.75).unwrap();
    let s = spatial_correction(&g, 618.5).unwrap();
    assert!((s - 0.846).abs() < 0.01, "{s}");
    assert!((s - (1.0 - 3.75 / 24.0)).abs() < 1e-12);
    let tiny = CavityGeometry::spherical(24.0, 1e-6).unwrap();
    assert!((spatial_correction(&tiny, 618.5).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn detuned_lorentzian() {
    let (lc, q) = (618.5, 3000.0);
    assert_eq!(detuned_purcell(lc, lc, q, 10.0, 0.5, 1.0), 6.0);
    let l_half = lc * (1.0 + 1.0 / (2.0 * q));
    assert!((detuned_purcell(l_half, lc, q, 10.0, 0.5, 1.0) - 3.5).abs() < 1e-12);
}

#[test]
fn epsilon_products() {
    assert!((epsilon_correction(0.8, 0.56, Some(0.8)).unwrap() - 0.3584).abs() < 1e-12);
    assert_eq!(epsilon_correction(1.0, 1.0, Some(1.0)).unwrap(), 1.0);
    assert!((epsilon_correction(0.8, 0.56, None).unwrap() - 0.448).abs() < 1e-12);
    assert!(epsilon_correction(1.2, 0.5, None).is_err());
}

#[test]
fn regimes() {
    let r = |g, k, g0, gs| CouplingRates::new(g, k, g0, gs).unwrap();
    assert_eq!(regime_classify(&r(1.0, 15.0, 0.0, 210.0)), Regime::BadEmitter);
    assert_eq!(regime_classify(&r(1.0, 15.0, 15.0, 0.0)), Regime::Boundary);
    assert_eq!(regime_classify(&r(1.0, 15.0, 0.01, 0.0)), Regime::BadCavity);
    assert_eq!(regime_classify(&r(50.0, 15.0, 0.01, 10.0)), Regime::Strong);
    assert!(CouplingRates::new(-1.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn bad_emitter_values() {
    let r = CouplingRates::new(1.0, 15.0, 0.01, 210.0).unwrap();
    let f = bad_emitter_purcell(&r).unwrap();
    assert!((f - 4.0 / 15.01 * 15.0 / 210.0).abs() < 1e-15);
    assert!(f < 1.0);
    let r2 = CouplingRates { g: 2.0, ..r };
    assert!((bad_emitter_purcell(&r2).unwrap() / f - 4.0).abs() < 1e-12);
    assert!(bad_emitter_purcell(&CouplingRates { gamma_star: 0.0, ..r }).is_err());
}

#[test]
fn budget_chain_c_and_d() {
    let b = budget_report(&BudgetInputs::transition_c()).unwrap();
    b.check_invariants().unwrap();
    assert!((b.f_cav_ideal - 204.06).abs() < 0.05);
    assert!((b.f_cav_corrected - 172.2).abs() < 0.1);
    assert!((b.f_zpl - 4.963).abs() < 1e-3);
    assert!((b.q_used - 3029.0).abs() < 1.0);
    assert!((b.alignment_projection - b.alignment.sqrt()).abs() < 1e-15);

    let d = budget_report(&BudgetInputs::transition_d()).unwrap();
    assert!((d.f_zpl - 3.6975).abs() < 1e-3);
    assert!((d.f_vib - 12.0).abs() < 2.0, "{}", d.f_vib);
}

#[test]
fn identity_budget() {
    let inp = BudgetInputs {
        tau0_ns: 10.0,
        taup_ns: 10.0,
        quantum_efficiency: 1.0,
        debye_waller: 1.0,
        branching: Some(1.0),
        spatial_factor: Some(1.0),
        ..BudgetInputs::transition_c()
    };
    let b = budget_report(&inp).unwrap();
    assert_eq!((b.f_measured, b.epsilon, b.f_zpl, b.spatial_factor), (1.0, 1.0, 1.0, 1.0));
    assert_eq!(b.f_cav_corrected, b.f_cav_ideal);
}

#[test]
fn budget_errors_name_the_step() {
    let inp = BudgetInputs { taup_ns: -1.0, ..BudgetInputs::transition_c() };
    match budget_report(&inp) {
        Err(Error::Report { step, .. }) => assert_eq!(step, "f_measured"),
        other => panic!("{other:?}"),
    }
    let inp = BudgetInputs { kappa_exp_ghz: 0.0, ..BudgetInputs::transition_c() };
    assert!(matches!(budget_report(&inp), Err(Error::Report { .. })));
}

#[test]
fn budget_report_document() {
    let inp = BudgetInputs::transition_c();
    let text = export_report(&budget_report(&inp).unwrap().to_report(&inp).unwrap()).unwrap();
    assert!(text.contains("\"f_measured\": 1.778688525"), "{text}");
    assert!(text.contains("\"formula_ref\""));
}

#[test]
fn detuning_fit_recovers_linewidth() {
    let (lc, q) = (618.5, 3029.0);
    let x: Vec<f64> = (0..61).map(|i| lc - 0.6 + 0.02 * i as f64).collect();
    let y = x.iter().map(|&l| detuned_purcell(l, lc, q, 1.0, 0.78, 1.0)).collect();
    let f = fit_detuning(&XyData::new(x, y, vec![0.04; 61]).unwrap()).unwrap();
    assert!((f.q - q).abs() < 1e-4, "{}", f.q);
    assert!((f.kappa_ghz - 160.0).abs() < 1.0);
}
