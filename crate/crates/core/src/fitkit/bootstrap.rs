use rayon::prelude::*;

use super::{fit, FitOptions, FitProblem, FitResult};
use crate::error::{Error, Result};
use crate::signal::mean_std;
use crate::synthlab::rng::{derive_seed, SplitMix64};

/// Residual-resampling bootstrap: each replicate adds standardised
/// residuals, drawn with replacement, to the fitted curve and refits from
/// the converged parameters. Returns the per-parameter standard deviation
/// across replicates.
pub fn bootstrap_uncertainty(
    problem: &FitProblem,
    result: &FitResult,
    n_resamples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !result.converged {
        return Err(Error::invalid("bootstrap requires a converged fit"));
    }
    if n_resamples < 2 {
        return Err(Error::invalid("bootstrap needs at least two resamples"));
    }
    let model = problem.model;
    let fitted: Vec<f64> = problem.x.iter().map(|&x| model.eval(&result.params, x)).collect();
    let std_resid: Vec<f64> =
        problem.y.iter().zip(&fitted).zip(&problem.weights).map(|((y, f), w)| w * (y - f)).collect();
    let n = problem.x.len();
    let options = FitOptions::default();

    let replicates: Vec<Option<Vec<f64>>> = (0..n_resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = SplitMix64::new(derive_seed(seed, k as u64));
            let y: Vec<f64> = (0..n).map(|i| fitted[i] + std_resid[rng.below(n)] / problem.weights[i]).collect();
            let resampled = FitProblem { y, initial_params: result.params.clone(), ..problem.clone() };
            fit(&resampled, &options).ok().filter(|r| r.converged).map(|r| r.params)
        })
        .collect();

    let ok: Vec<Vec<f64>> = replicates.into_iter().flatten().collect();
    if ok.len() * 10 < n_resamples * 9 {
        return Err(Error::FitQuality(format!("only {} of {n_resamples} bootstrap refits converged", ok.len())));
    }
    let np = result.params.len();
    Ok((0..np)
        .map(|j| {
            let col: Vec<f64> = ok.iter().map(|p| p[j]).collect();
            mean_std(&col).1
        })
        .collect())
}
