//! Bounded Levenberg-Marquardt least squares with analytic Jacobians.
//!
//! The engine minimises `½ Σ (wᵢ (yᵢ - f(xᵢ; p)))²` for one of the
//! registered [`ModelId`]s. Bounds are honoured by projecting each trial
//! step onto the feasible box and re-damping when the projected step does
//! not reduce the objective.

mod bootstrap;
pub mod init;
mod models;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use bootstrap::bootstrap_uncertainty;
pub use models::{jacobian, ModelId};

/// Closed interval for one parameter. `lo == hi` pins the parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const FREE: Bounds = Bounds { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Bounds { lo, hi }
    }

    pub fn positive() -> Self {
        Bounds { lo: f64::MIN_POSITIVE, hi: f64::INFINITY }
    }

    pub fn fixed(v: f64) -> Self {
        Bounds { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    pub fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }
}

/// Weighting applied when a problem is built from raw data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    /// `1/√max(y, 1)`, for count data.
    Poisson,
}

impl Weighting {
    pub fn weights(self, y: &[f64]) -> Vec<f64> {
        match self {
            Weighting::Uniform => vec![1.0; y.len()],
            Weighting::Poisson => y.iter().map(|&v| 1.0 / v.max(1.0).sqrt()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitProblem {
    pub model: ModelId,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Per-point `1/σ`.
    pub weights: Vec<f64>,
    pub initial_params: Vec<f64>,
    pub bounds: Vec<Bounds>,
}

impl FitProblem {
    /// Builds a problem with the model's default initial guess and bounds.
    pub fn with_defaults(model: ModelId, x: Vec<f64>, y: Vec<f64>, weighting: Weighting) -> Result<Self> {
        let weights = weighting.weights(&y);
        let initial_params = init::initial_guess(model, &x, &y)?;
        let bounds = init::default_bounds(model);
        let initial_params = initial_params.iter().zip(&bounds).map(|(&p, b)| b.clamp(p)).collect();
        Ok(FitProblem { model, x, y, weights, initial_params, bounds })
    }

    pub fn n_free(&self) -> usize {
        self.bounds.iter().filter(|b| !b.is_fixed()).count()
    }

    pub fn validate(&self) -> Result<()> {
        let np = self.model.n_params();
        let n = self.x.len();
        if self.y.len() != n || self.weights.len() != n {
            return Err(Error::invalid(format!(
                "array lengths differ: x = {n}, y = {}, weights = {}",
                self.y.len(),
                self.weights.len()
            )));
        }
        if self.initial_params.len() != np || self.bounds.len() != np {
            return Err(Error::invalid(format!(
                "model {} takes {np} parameters, got {} initial values and {} bounds",
                self.model,
                self.initial_params.len(),
                self.bounds.len()
            )));
        }
        let free = self.n_free();
        if n < free.max(1) {
            return Err(Error::InsufficientData(format!("{n} points for {free} free parameters")));
        }
        for (i, ((&x, &y), &w)) in self.x.iter().zip(&self.y).zip(&self.weights).enumerate() {
            if !x.is_finite() || !y.is_finite() || !w.is_finite() {
                return Err(Error::NonFinite { index: i, context: "input data".into() });
            }
            if w <= 0.0 {
                return Err(Error::invalid(format!("weight at index {i} is not positive")));
            }
        }
        for (j, (&p, b)) in self.initial_params.iter().zip(&self.bounds).enumerate() {
            if b.lo > b.hi || !b.contains(p) {
                return Err(Error::invalid(format!(
                    "initial {} = {p} outside bounds [{}, {}]",
                    self.model.param_names()[j],
                    b.lo,
                    b.hi
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 over the little-endian bytes of `x`, `y` and `weights`.
    pub fn data_digest(&self) -> String {
        let mut h = Sha256::new();
        for arr in [&self.x, &self.y, &self.weights] {
            for v in arr.iter() {
                h.update(v.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn residuals(&self, p: &[f64]) -> Result<DVector<f64>> {
        let mut r = DVector::zeros(self.x.len());
        for i in 0..self.x.len() {
            let v = self.weights[i] * (self.y[i] - self.model.eval(p, self.x[i]));
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, context: format!("residual of {}", self.model) });
            }
            r[i] = v;
        }
        Ok(r)
    }

    fn weighted_jacobian(&self, p: &[f64], free: &[usize]) -> DMatrix<f64> {
        let np = self.model.n_params();
        let mut jac = DMatrix::zeros(self.x.len(), free.len());
        let mut row = vec![0.0; np];
        for (i, &xi) in self.x.iter().enumerate() {
            self.model.gradient(p, xi, &mut row);
            for (k, &j) in free.iter().enumerate() {
                jac[(i, k)] = self.weights[i] * row[j];
            }
        }
        jac
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence when every `|Δpᵢ| ≤ param_tol · (|pᵢ| + param_tol)`.
    pub param_tol: f64,
    /// Convergence when an accepted step lowers the cost by at most
    /// `cost_tol · cost`.
    pub cost_tol: f64,
    pub damping_init: f64,
    /// Scale the covariance by the reduced χ² (unknown absolute errors).
    pub scale_covariance: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iter: 200, param_tol: 1e-10, cost_tol: 1e-14, damping_init: 1e-3, scale_covariance: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelId,
    pub params: Vec<f64>,
    pub sigma: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Objective `½ Σ r²` after each accepted step, starting with the
    /// initial point.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.params[i])
    }

    pub fn sigma_of(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.sigma[i])
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.model.param_names().iter().position(|&n| n == name)
    }
}

fn cost_of(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

/// Runs the bounded Levenberg-Marquardt iteration on `problem`.
pub fn fit(problem: &FitProblem, options: &FitOptions) -> Result<FitResult> {
    problem.validate()?;
    let np = problem.model.n_params();
    let free: Vec<usize> = (0..np).filter(|&j| !problem.bounds[j].is_fixed()).collect();
    let nf = free.len();

    let mut p = problem.initial_params.clone();
    let mut r = problem.residuals(&p)?;
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut damping = options.damping_init;
    let mut scale = vec![0.0f64; nf];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iter && nf > 0 {
        if cost == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let jac = problem.weighted_jacobian(&p, &free);
        let jtj = jac.tr_mul(&jac);
        let grad = jac.tr_mul(&r);
        for k in 0..nf {
            scale[k] = scale[k].max(jtj[(k, k)]);
        }
        let max_scale = scale.iter().cloned().fold(0.0, f64::max);
        if max_scale == 0.0 {
            return Err(rank_error(problem, &free, &jtj));
        }

        // Gradient small relative to the residual: already optimal.
        let gnorm = (0..nf)
            .map(|k| grad[k].abs() / (jtj[(k, k)].max(f64::MIN_POSITIVE) * 2.0 * cost).sqrt())
            .fold(0.0, f64::max);
        if gnorm <= 1e-13 {
            converged = true;
            break;
        }

        let mut accepted = false;
        while damping <= 1e20 {
            let mut a = jtj.clone();
            for k in 0..nf {
                a[(k, k)] += damping * scale[k].max(1e-15 * max_scale);
            }
            let Some(chol) = a.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let delta = chol.solve(&grad);
            let mut trial = p.clone();
            for (k, &j) in free.iter().enumerate() {
                trial[j] = problem.bounds[j].clamp(p[j] + delta[k]);
            }
            let trial_r = match problem.residuals(&trial) {
                Ok(tr) => tr,
                Err(_) => {
                    damping *= 10.0;
                    continue;
                }
            };
            let trial_cost = cost_of(&trial_r);
            if trial_cost <= cost {
                let small = free
                    .iter()
                    .all(|&j| (trial[j] - p[j]).abs() <= options.param_tol * (p[j].abs() + options.param_tol))
                    || cost - trial_cost <= options.cost_tol * cost;
                p = trial;
                r = trial_r;
                cost = trial_cost;
                history.push(cost);
                damping = (damping / 10.0).max(1e-15);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // No downhill step exists at machine precision.
            converged = gnorm <= 1e-6;
            break;
        }
    }
    if nf == 0 {
        converged = true;
    }

    let n = problem.x.len();
    let dof = n.saturating_sub(nf);
    let chi2 = 2.0 * cost;
    let reduced_chi2 = chi2 / dof.max(1) as f64;

    let mut covariance = vec![vec![0.0; np]; np];
    let mut sigma = vec![0.0; np];
    if nf > 0 {
        let jac = problem.weighted_jacobian(&p, &free);
        let jtj = jac.tr_mul(&jac);
        let inv = invert_normal(problem, &free, &jtj)?;
        let s = if options.scale_covariance { reduced_chi2 } else { 1.0 };
        for (a, &ja) in free.iter().enumerate() {
            for (b, &jb) in free.iter().enumerate() {
                covariance[ja][jb] = 0.5 * (inv[(a, b)] + inv[(b, a)]) * s;
            }
            sigma[ja] = covariance[ja][ja].max(0.0).sqrt();
        }
    }

    Ok(FitResult {
        model: problem.model,
        params: p,
        sigma,
        covariance,
        chi2,
        reduced_chi2,
        dof,
        iterations,
        converged,
        cost_history: history,
    })
}

/// Inverts the normal matrix after checking it is well conditioned in the
/// column-scaled (correlation) basis.
fn invert_normal(problem: &FitProblem, free: &[usize], jtj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let nf = free.len();
    let d: Vec<f64> = (0..nf).map(|k| jtj[(k, k)].sqrt()).collect();
    if d.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(rank_error(problem, free, jtj));
    }
    let corr = DMatrix::from_fn(nf, nf, |a, b| jtj[(a, b)] / (d[a] * d[b]));
    let eig = SymmetricEigen::new(corr.clone());
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_ev <= 1e-13 * max_ev {
        return Err(rank_error(problem, free, jtj));
    }
    let inv_corr = corr.cholesky().ok_or_else(|| rank_error(problem, free, jtj))?.inverse();
    Ok(DMatrix::from_fn(nf, nf, |a, b| inv_corr[(a, b)] / (d[a] * d[b])))
}

fn rank_error(problem: &FitProblem, free: &[usize], jtj: &DMatrix<f64>) -> Error {
    let names = problem.model.param_names();
    let nf = free.len();
    if let Some(k) = (0..nf).find(|&k| jtj[(k, k)] == 0.0 || !jtj[(k, k)].is_finite()) {
        return Error::RankDeficient { combination: format!("{} (no sensitivity)", names[free[k]]) };
    }
    let d: Vec<f64> = (0..nf).map(|k| jtj[(k, k)].sqrt()).collect();
    let corr = DMatrix::from_fn(nf, nf, |a, b| jtj[(a, b)] / (d[a] * d[b]));
    let eig = SymmetricEigen::new(corr);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let v = eig.eigenvectors.column(imin);
    let terms: Vec<String> =
        (0..nf).filter(|&k| v[k].abs() > 0.1).map(|k| format!("{:+.3}·{}", v[k], names[free[k]])).collect();
    Error::RankDeficient { combination: terms.join(" ") }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian_problem(params: &[f64]) -> FitProblem {
        let x: Vec<f64> = (0..201).map(|i| i as f64 * 0.05).collect();
        let y = x.iter().map(|&xi| ModelId::Lorentzian.eval(params, xi)).collect();
        FitProblem {
            model: ModelId::Lorentzian,
            weights: vec![1.0; x.len()],
            x,
            y,
            initial_params: params.to_vec(),
            bounds: init::default_bounds(ModelId::Lorentzian),
        }
    }

    #[test]
    fn exact_start_converges_immediately() {
        let truth = [100.0, 5.0, 0.8, 2.0];
        let res = fit(&lorentzian_problem(&truth), &FitOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 2, "iterations = {}", res.iterations);
        assert!(res.chi2 < 1e-20);
        for (a, b) in res.params.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recovers_from_offset_start() {
        let truth = [100.0, 5.0, 0.8, 2.0];
        let mut prob = lorentzian_problem(&truth);
        prob.initial_params = vec![80.0, 5.3, 1.1, 0.0];
        let res = fit(&prob, &FitOptions::default()).unwrap();
        assert!(res.converged);
        for (a, b) in res.params.iter().zip(&truth) {
            assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn fixed_parameter_is_untouched() {
        let truth = [100.0, 5.0, 0.8, 2.0];
        let mut prob = lorentzian_problem(&truth);
        prob.initial_params = vec![90.0, 5.1, 0.9, 2.0];
        prob.bounds[3] = Bounds::fixed(2.0);
        let res = fit(&prob, &FitOptions::default()).unwrap();
        assert_eq!(res.params[3], 2.0);
        assert_eq!(res.sigma[3], 0.0);
        assert_eq!(res.dof, 201 - 3);
    }

    #[test]
    fn bounds_are_respected() {
        let truth = [100.0, 5.0, 0.8, 2.0];
        let mut prob = lorentzian_problem(&truth);
        prob.bounds[2] = Bounds::new(1.0, 3.0);
        prob.initial_params = vec![100.0, 5.0, 2.0, 2.0];
        let res = fit(&prob, &FitOptions::default()).unwrap();
        assert!(res.params[2] >= 1.0 && res.params[2] <= 3.0);
        assert!((res.params[2] - 1.0).abs() < 1e-9, "width pinned at lower bound");
    }

    #[test]
    fn degenerate_model_names_combination() {
        // Offset and a zero-width-sensitive amplitude cannot be separated on
        // data far from the peak: use a constant abscissa instead.
        let x = vec![2.0; 20];
        let y = vec![3.0; 20];
        let prob = FitProblem {
            model: ModelId::Linear,
            weights: vec![1.0; 20],
            x,
            y,
            initial_params: vec![0.5, 0.5],
            bounds: vec![Bounds::FREE; 2],
        };
        match fit(&prob, &FitOptions::default()) {
            Err(Error::RankDeficient { combination }) => {
                assert!(combination.contains("slope") && combination.contains("intercept"), "{combination}");
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_data_reports_index() {
        let mut prob = lorentzian_problem(&[1.0, 5.0, 1.0, 0.0]);
        prob.y[17] = f64::NAN;
        match fit(&prob, &FitOptions::default()) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 17),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_mismatched_lengths_and_bad_start() {
        let mut prob = lorentzian_problem(&[1.0, 5.0, 1.0, 0.0]);
        prob.weights.pop();
        assert!(prob.validate().is_err());
        let mut prob = lorentzian_problem(&[1.0, 5.0, 1.0, 0.0]);
        prob.bounds[2] = Bounds::new(2.0, 3.0);
        assert!(prob.validate().is_err());
    }

    #[test]
    fn poisson_weights_floor_at_one_count() {
        let w = Weighting::Poisson.weights(&[0.0, 1.0, 4.0, 100.0]);
        assert_eq!(w, vec![1.0, 1.0, 0.5, 0.1]);
    }
}
