use std::hint::black_box;

use cavkit::fitkit::{fit, FitOptions, FitProblem, Weighting};
use cavkit::optics::{double_resonance_search, finesse_from_scan, FinesseOptions};
use cavkit::photophysics::{fit_g2, pulsed_lifetime_fit, G2FitOptions};
use cavkit::synthlab::{generate, generate_scan, linspace, presets, GeneratorSpec, Noise};
use cavkit::{Mirror, ModeModel, ModelId, TraceSet};
use criterion::{criterion_group, criterion_main, Criterion};

fn lorentzian_fit(c: &mut Criterion) {
    let spec = GeneratorSpec::new(
        ModelId::Lorentzian,
        vec![500.0, 618.6, 0.12, 10.0],
        linspace(617.5, 619.5, 401),
        Noise::Poisson,
        1,
    );
    let TraceSet::Spectrum(s) = generate(&spec).unwrap().traces else { panic!("expected a spectrum") };
    let problem =
        FitProblem::with_defaults(ModelId::Lorentzian, s.wavelength_nm, s.counts, Weighting::Poisson).unwrap();
    c.bench_function("lorentzian_fit_401", |b| b.iter(|| fit(black_box(&problem), &FitOptions::default()).unwrap()));
}

fn histogram_fits(c: &mut Criterion) {
    let TraceSet::Histogram(g2) = generate(&presets::g2_spec(1)).unwrap().traces else {
        panic!("expected a histogram")
    };
    c.bench_function("g2_fit_8001_bins", |b| b.iter(|| fit_g2(black_box(&g2), &G2FitOptions::default()).unwrap()));
    let p = presets::LIFETIME[0];
    let TraceSet::Histogram(h) = generate(&p.spec(1)).unwrap().traces else { panic!("expected a histogram") };
    c.bench_function("lifetime_fit", |b| b.iter(|| pulsed_lifetime_fit(black_box(&h), (0.0, p.window_ns)).unwrap()));
}

fn double_resonance(c: &mut Criterion) {
    let mirror = Mirror::spherical(24.0).unwrap();
    c.bench_function("double_resonance_search", |b| {
        b.iter(|| {
            double_resonance_search(533.3, 618.5, black_box(&mirror), (3.6, 3.9), 25.0, &ModeModel::default()).unwrap()
        })
    });
}

fn finesse_scan(c: &mut Criterion) {
    let trace = generate_scan(&presets::scan_spec(1)).unwrap();
    c.bench_function("finesse_from_scan", |b| {
        b.iter(|| finesse_from_scan(black_box(&trace), &FinesseOptions::default()).unwrap())
    });
}

criterion_group!(benches, lorentzian_fit, histogram_fits, double_resonance, finesse_scan);
criterion_main!(benches);
