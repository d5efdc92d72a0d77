use cavkit::fitkit::{bootstrap_uncertainty, fit, init, jacobian, FitOptions, FitProblem, ModelId};
use cavkit::synthlab::linspace;
use cavkit::synthlab::rng::SplitMix64;
use proptest::prelude::*;

/// Generating parameters and a grid on which every model is well conditioned.
fn reference(model: ModelId) -> (Vec<f64>, Vec<f64>) {
    match model {
        ModelId::Lorentzian => (vec![120.0, 1.7, 0.35, 4.0], linspace(0.0, 4.0, 161)),
        ModelId::Gaussian => (vec![80.0, -0.4, 0.6, 2.5], linspace(-3.0, 2.0, 151)),
        ModelId::Linear => (vec![0.0026, 612.4], linspace(4.0, 12.0, 40)),
        ModelId::ExponentialDecay => (vec![900.0, 12.2, 3.0], linspace(0.0, 80.0, 161)),
        ModelId::G2ThreeLevel => (vec![-1.3, 0.8, 0.08, 0.005, 3.0], linspace(-600.0, 600.0, 1201)),
        ModelId::Saturation => (vec![162.0, 2.2], linspace(0.1, 12.0, 30)),
        ModelId::DetunedPurcell => (vec![0.9, 619.0, 3029.0, 0.05], linspace(618.4, 619.6, 121)),
    }
}

fn noiseless_problem(model: ModelId, start: Vec<f64>) -> FitProblem {
    let (p, x) = reference(model);
    let y: Vec<f64> = x.iter().map(|&v| model.eval(&p, v)).collect();
    let n = x.len();
    FitProblem { model, x, y, weights: vec![1.0; n], initial_params: start, bounds: init::default_bounds(model) }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

/// Richardson-extrapolated central difference and its rounding-noise floor.
fn central_difference(model: ModelId, p: &[f64], x: f64, j: usize) -> (f64, f64) {
    let h = 1e-6 * p[j].abs().max(1e-2);
    let d = |h: f64| {
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        hi[j] += h;
        lo[j] -= h;
        (model.eval(&hi, x) - model.eval(&lo, x)) / (2.0 * h)
    };
    let est = (4.0 * d(0.5 * h) - d(h)) / 3.0;
    let noise = 16.0 * f64::EPSILON * model.eval(p, x).abs().max(1.0) / h;
    (est, noise)
}

fn check_jacobian(model: ModelId, p: &[f64], xs: &[f64]) -> Result<(), TestCaseError> {
    let jac = jacobian(model, p, xs);
    for (i, &x) in xs.iter().enumerate() {
        for j in 0..p.len() {
            let (fd, noise) = central_difference(model, p, x, j);
            let a = jac[(i, j)];
            prop_assert!(
                (a - fd).abs() <= 1e-5 * a.abs() + noise,
                "{model} d/d{} at x = {x}: analytic {a}, numeric {fd}",
                model.param_names()[j]
            );
        }
    }
    Ok(())
}

/// Start point displaced by `factor` in each parameter. Location parameters
/// move by a fraction of the line width instead of their absolute value.
fn displaced(model: ModelId, truth: &[f64], factor: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = truth.iter().zip(factor).map(|(v, f)| v * f).collect();
    match model {
        ModelId::Lorentzian | ModelId::Gaussian => p[1] = truth[1] + (factor[1] - 1.0) * truth[2],
        ModelId::G2ThreeLevel => p[4] = truth[4] + (factor[4] - 1.0) / truth[2],
        ModelId::DetunedPurcell => p[1] = truth[1] * (1.0 + (factor[1] - 1.0) / truth[2]),
        _ => {}
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lorentzian_jacobian(a in 1.0..1e4f64, c in -5.0..5.0f64, w in 0.05..3.0f64, o in -10.0..10.0f64, x in prop::collection::vec(-8.0..8.0f64, 8)) {
        check_jacobian(ModelId::Lorentzian, &[a, c, w, o], &x)?;
    }

    #[test]
    fn gaussian_jacobian(a in 1.0..1e4f64, c in -5.0..5.0f64, s in 0.05..3.0f64, o in -10.0..10.0f64, x in prop::collection::vec(-8.0..8.0f64, 8)) {
        check_jacobian(ModelId::Gaussian, &[a, c, s, o], &x)?;
    }

    #[test]
    fn linear_jacobian(m in -5.0..5.0f64, b in -100.0..100.0f64, x in prop::collection::vec(-50.0..50.0f64, 8)) {
        check_jacobian(ModelId::Linear, &[m, b], &x)?;
    }

    #[test]
    fn exponential_jacobian(a in 1.0..1e5f64, tau in 0.5..50.0f64, o in 0.0..100.0f64, x in prop::collection::vec(0.0..100.0f64, 8)) {
        check_jacobian(ModelId::ExponentialDecay, &[a, tau, o], &x)?;
    }

    #[test]
    fn g2_jacobian(
        c in -3.0..-0.1f64,
        beta in 0.5..1.0f64,
        g1 in 0.02..1.0f64,
        ratio in 0.01..0.5f64,
        t0 in -10.0..10.0f64,
        d in prop::collection::vec(0.5..400.0f64, 8),
        sign in prop::collection::vec(any::<bool>(), 8),
    ) {
        // Offsets keep every sample away from the cusp at t₀.
        let x: Vec<f64> = d.iter().zip(&sign).map(|(&v, &s)| if s { t0 + v } else { t0 - v }).collect();
        check_jacobian(ModelId::G2ThreeLevel, &[c, beta, g1, g1 * ratio, t0], &x)?;
    }

    #[test]
    fn saturation_jacobian(i in 1.0..500.0f64, p in 0.05..10.0f64, x in prop::collection::vec(0.0..30.0f64, 8)) {
        check_jacobian(ModelId::Saturation, &[i, p], &x)?;
    }

    #[test]
    fn detuned_purcell_jacobian(a in 0.1..10.0f64, lc in 600.0..640.0f64, q in 100.0..2e4f64, f in 0.0..1.0f64, u in prop::collection::vec(-3.0..3.0f64, 8)) {
        let x: Vec<f64> = u.iter().map(|v| lc * (1.0 + v / (2.0 * q))).collect();
        check_jacobian(ModelId::DetunedPurcell, &[a, lc, q, f], &x)?;
    }
}

#[test]
fn noiseless_recovery_from_perturbed_starts() {
    let mut rng = SplitMix64::new(17);
    for model in ModelId::ALL {
        let (truth, _) = reference(model);
        for trial in 0..20 {
            let factor: Vec<f64> = truth.iter().map(|_| 1.0 + 0.2 * (rng.uniform() - 0.5)).collect();
            let start = displaced(model, &truth, &factor);
            let res = fit(&noiseless_problem(model, start.clone()), &FitOptions::default()).unwrap();
            assert!(res.converged, "{model} trial {trial} from {start:?}");
            for (j, (&got, &want)) in res.params.iter().zip(&truth).enumerate() {
                assert!(
                    rel(got, want) < 1e-8,
                    "{model} {} = {got}, truth {want}, start {start:?}",
                    model.param_names()[j]
                );
            }
            assert!(res.sigma.iter().zip(&truth).all(|(s, t)| *s <= 1e-8 * t.abs()), "{model}: σ = {:?}", res.sigma);
        }
    }
}

#[test]
fn cost_never_increases() {
    for model in ModelId::ALL {
        let (truth, _) = reference(model);
        let factor: Vec<f64> = (0..truth.len()).map(|j| if j % 2 == 0 { 1.1 } else { 0.9 }).collect();
        let start = displaced(model, &truth, &factor);
        let res = fit(&noiseless_problem(model, start), &FitOptions::default()).unwrap();
        assert!(res.cost_history.len() >= 2, "{model}");
        for w in res.cost_history.windows(2) {
            assert!(w[1] <= w[0], "{model}: {} → {}", w[0], w[1]);
        }
    }
}

fn noisy_lorentzian(seed: u64) -> FitProblem {
    let (p, x) = reference(ModelId::Lorentzian);
    let mut rng = SplitMix64::new(seed);
    let y: Vec<f64> = x.iter().map(|&v| rng.poisson(ModelId::Lorentzian.eval(&p, v)) as f64).collect();
    FitProblem::with_defaults(ModelId::Lorentzian, x, y, cavkit::fitkit::Weighting::Poisson).unwrap()
}

#[test]
fn reordering_points_leaves_fit_unchanged() {
    let problem = noisy_lorentzian(3);
    let base = fit(&problem, &FitOptions::default()).unwrap();

    let mut rng = SplitMix64::new(99);
    let n = problem.x.len();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.below(i + 1));
    }
    let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let shuffled =
        FitProblem { x: pick(&problem.x), y: pick(&problem.y), weights: pick(&problem.weights), ..problem.clone() };
    let other = fit(&shuffled, &FitOptions::default()).unwrap();
    for (a, b) in base.params.iter().zip(&other.params) {
        assert!(rel(*b, *a) < 1e-7, "{a} vs {b}");
    }
    assert!(rel(other.chi2, base.chi2) < 1e-9);
}

#[test]
fn lorentzian_centre_and_width_follow_axis_scaling() {
    let problem = noisy_lorentzian(8);
    let base = fit(&problem, &FitOptions::default()).unwrap();
    for (k, shift) in [(2.5, 0.0), (0.01, 600.0), (-3.0, 1.0)] {
        let x: Vec<f64> = problem.x.iter().map(|v| k * v + shift).collect();
        let mut init_p = problem.initial_params.clone();
        init_p[1] = k * init_p[1] + shift;
        init_p[2] *= k.abs();
        let mapped = FitProblem { x, initial_params: init_p, ..problem.clone() };
        let res = fit(&mapped, &FitOptions::default()).unwrap();
        assert!(rel(res.params[0], base.params[0]) < 1e-6);
        assert!((res.params[1] - (k * base.params[1] + shift)).abs() < 1e-6 * k.abs());
        assert!(rel(res.params[2], k.abs() * base.params[2]) < 1e-6);
        assert!(rel(res.sigma[2], k.abs() * base.sigma[2]) < 1e-4);
    }
}

#[test]
fn bootstrap_agrees_with_covariance() {
    let problem = noisy_lorentzian(21);
    let res = fit(&problem, &FitOptions::default()).unwrap();
    let boot = bootstrap_uncertainty(&problem, &res, 400, 5).unwrap();
    for (j, (b, s)) in boot.iter().zip(&res.sigma).take(3).enumerate() {
        assert!((b / s - 1.0).abs() < 0.3, "{}: bootstrap {b} vs covariance {s}", ModelId::Lorentzian.param_names()[j]);
    }
    assert_eq!(boot, bootstrap_uncertainty(&problem, &res, 400, 5).unwrap());
}

#[test]
fn covariance_is_symmetric_and_psd() {
    let problem = noisy_lorentzian(4);
    let res = fit(&problem, &FitOptions::default()).unwrap();
    assert!(res.converged && res.reduced_chi2 >= 0.0);
    let n = res.params.len();
    for a in 0..n {
        assert!(res.covariance[a][a] >= 0.0);
        for b in 0..n {
            assert_eq!(res.covariance[a][b], res.covariance[b][a]);
            let limit = (res.covariance[a][a] * res.covariance[b][b]).sqrt();
            assert!(res.covariance[a][b].abs() <= limit * (1.0 + 1e-12));
        }
    }
}

#[test]
fn identical_problems_give_identical_results() {
    let problem = noisy_lorentzian(11);
    let a = fit(&problem, &FitOptions::default()).unwrap();
    let b = fit(&problem.clone(), &FitOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(problem.data_digest(), problem.clone().data_digest());
}

#[test]
fn degenerate_model_reports_rank() {
    // A flat line at zero carries no information about the centre or width.
    let x = linspace(0.0, 1.0, 20);
    let problem = FitProblem {
        model: ModelId::Lorentzian,
        x,
        y: vec![0.0; 20],
        weights: vec![1.0; 20],
        initial_params: vec![0.0, 0.5, 0.1, 0.0],
        bounds: init::default_bounds(ModelId::Lorentzian),
    };
    let err = fit(&problem, &FitOptions::default()).unwrap_err();
    assert!(matches!(err, cavkit::Error::RankDeficient { .. }), "{err}");
}
