use cavkit::cqed::{
    bad_emitter_purcell, budget_report, detuned_purcell, purcell_theoretical, regime_classify, BudgetInputs,
};
use cavkit::dataio::export_report;
use cavkit::{CavityGeometry, CouplingRates, Error};
use proptest::prelude::*;

fn budget_inputs() -> impl Strategy<Value = BudgetInputs> {
    (
        (5.0..40.0f64, 0.2..1.0f64, 0.05..1.0f64, 0.05..1.0f64, prop::option::of(0.05..1.0f64)),
        (500.0..800.0f64, 1.0..2.5f64, 5.0..60.0f64, 0.02..0.9f64),
        (100.0..2e4f64, 1u32..40, 10.0..500.0f64, prop::option::of(1.0..100.0f64), 0.0..2.0f64),
    )
        .prop_map(|((tau0, ratio, qe, dw, br), (lam, n, roc, frac), (finesse, m, kappa, vol, f_fp))| {
            BudgetInputs {
                tau0_ns: tau0,
                taup_ns: tau0 * ratio,
                quantum_efficiency: qe,
                debye_waller: dw,
                branching: br,
                wavelength_nm: lam,
                refractive_index: n,
                geometry: CavityGeometry::spherical(roc, roc * frac).unwrap(),
                finesse,
                m_det: m,
                kappa_exp_ghz: kappa,
                mode_volume_lambda3: vol,
                spatial_factor: None,
                f_fp,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn budget_identities_hold(inp in budget_inputs()) {
        let b = budget_report(&inp).unwrap();
        prop_assert!(b.check_invariants().is_ok());
        prop_assert!((b.f_cav_corrected - b.f_cav_ideal * b.spatial_factor).abs() <= 1e-12 * b.f_cav_corrected);
        prop_assert!((b.f_zpl - b.f_measured / b.epsilon).abs() <= 1e-12 * b.f_zpl);
        prop_assert!((b.alignment - b.f_zpl / b.f_vib).abs() <= 1e-12 * b.alignment);
        for v in [b.f_cav_ideal, b.spatial_factor, b.f_cav_corrected, b.q_ideal, b.q_used, b.f_vib, b.f_measured, b.epsilon, b.f_zpl, b.alignment] {
            prop_assert!(v > 0.0 && v.is_finite());
        }
        prop_assert!(b.spatial_factor <= 1.0 && b.epsilon <= 1.0);
    }

    #[test]
    fn purcell_scales_with_q_over_v(q in 1.0..1e6f64, v in 0.1..1e3f64, k in 0.01..100.0f64, n in 1.0..3.0f64) {
        let base = purcell_theoretical(618.5, n, q, v).unwrap();
        prop_assert!((purcell_theoretical(618.5, n, k * q, v).unwrap() / base / k - 1.0).abs() < 1e-12);
        prop_assert!((purcell_theoretical(618.5, n, q, k * v).unwrap() * k / base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detuning_curve_is_symmetric_and_peaked(q in 100.0..1e5f64, lc in 500.0..700.0f64, x in 0.0..20.0f64, f in 1.0..300.0f64, a in 0.0..1.0f64) {
        // λ giving reduced detuning ±x.
        let lam = |x: f64| lc * (1.0 + x / (2.0 * q));
        let plus = detuned_purcell(lam(x), lc, q, f, a, 0.1);
        let minus = detuned_purcell(lam(-x), lc, q, f, a, 0.1);
        prop_assert!((plus - minus).abs() <= 1e-9 * plus);
        prop_assert!(detuned_purcell(lc, lc, q, f, a, 0.1) >= plus);
    }

    #[test]
    fn regime_ignores_overall_scale(g in 0.0..100.0f64, kappa in 0.0..100.0f64, g0 in 0.0..100.0f64, gs in 0.0..100.0f64, k in 1e-3..1e3f64) {
        let r = CouplingRates::new(g, kappa, g0, gs).unwrap();
        prop_assert_eq!(regime_classify(&r), regime_classify(&r.scaled(k)));
    }

    #[test]
    fn bad_emitter_purcell_below_one_under_strong_dephasing(g in 0.01..10.0f64, kappa in 0.01..500.0f64, g0 in 0.0..10.0f64, excess in 1.0001..100.0f64) {
        let bound = 4.0 * g * g * kappa / (kappa + g0);
        let r = CouplingRates::new(g, kappa, g0, bound * excess).unwrap();
        prop_assert!(bad_emitter_purcell(&r).unwrap() < 1.0);
    }
}

#[test]
fn budget_document_is_deterministic() {
    let inp = BudgetInputs::transition_c();
    let a = export_report(&budget_report(&inp).unwrap().to_report(&inp).unwrap()).unwrap();
    let b = export_report(&budget_report(&inp).unwrap().to_report(&inp).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("\"f_measured\": 1.778688525"), "{a}");
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    let steps = doc["steps"].as_array().unwrap();
    assert_eq!(steps.last().unwrap()["name"], "summary");
    assert!(steps.iter().all(|s| s.get("name").is_some()));
}

#[test]
fn invalid_budget_names_its_step() {
    let inp = BudgetInputs { debye_waller: 1.5, ..BudgetInputs::transition_c() };
    match budget_report(&inp) {
        Err(Error::Report { step, .. }) => assert_eq!(step, "epsilon"),
        other => panic!("{other:?}"),
    }
    let inp = BudgetInputs { kappa_exp_ghz: -1.0, ..BudgetInputs::transition_c() };
    assert!(matches!(budget_report(&inp), Err(Error::Report { .. })));
}
