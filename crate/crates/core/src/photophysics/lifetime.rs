use serde::{Deserialize, Serialize};

use crate::dataio::TimeHistogram;
use crate::error::{Error, Result};
use crate::fitkit::{fit, Bounds, FitOptions, FitProblem, FitResult, ModelId};

const IRLS_PASSES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    pub tau_ns: f64,
    pub sigma_ns: f64,
    /// Fitted counts per bin at the first fitted bin.
    pub amplitude: f64,
    pub first_bin: usize,
    pub n_bins: usize,
    /// Final straight-line fit of `ln(n + ½)` against delay.
    pub fit: FitResult,
}

/// Single-exponential lifetime from a pulsed decay histogram.
///
/// Bins inside `window` are fitted from one bin after the brightest (the
/// pulse edge). The estimator is a straight line through `ln(n + ½)`,
/// iteratively reweighted with model-predicted Poisson variances so that
/// sparse and empty tail bins are kept without biasing the slope.
pub fn pulsed_lifetime_fit(hist: &TimeHistogram, window: (f64, f64)) -> Result<LifetimeFit> {
    hist.validate()?;
    let t = &hist.bin_centers_ns;
    let half = 0.5 * hist.bin_width_ns;
    let (lo, hi) = window;
    if !(lo < hi) || lo < t[0] - half || hi > t[t.len() - 1] + half {
        return Err(Error::invalid(format!(
            "window [{lo}, {hi}] ns must be increasing and inside the histogram support [{}, {}]",
            t[0] - half,
            t[t.len() - 1] + half
        )));
    }
    let a = t.partition_point(|&v| v < lo);
    let b = t.partition_point(|&v| v <= hi);
    if b <= a {
        return Err(Error::InsufficientData("window contains no bins".into()));
    }
    let edge = (a..b).max_by(|&i, &j| hist.counts[i].cmp(&hist.counts[j]).then(j.cmp(&i))).expect("non-empty");
    let first = edge + 1;
    let filled = (first..b).filter(|&i| hist.counts[i] > 0).count();
    if filled < 10 {
        return Err(Error::InsufficientData(format!("{filled} non-empty bins after the pulse edge; need 10")));
    }

    let x: Vec<f64> = t[first..b].to_vec();
    let z: Vec<f64> = hist.counts[first..b].iter().map(|&n| (n as f64 + 0.5).ln()).collect();
    let mut mu: Vec<f64> = hist.counts[first..b].iter().map(|&n| n as f64 + 0.5).collect();
    let opts = FitOptions { scale_covariance: false, ..FitOptions::default() };
    let mut last = None;
    for _ in 0..IRLS_PASSES {
        let problem = FitProblem {
            model: ModelId::Linear,
            x: x.clone(),
            y: z.clone(),
            weights: mu.iter().map(|m| m.sqrt()).collect(),
            initial_params: last.as_ref().map(|r: &FitResult| r.params.clone()).unwrap_or_else(|| {
                let (s, c) = crate::fitkit::init::ordinary_line(&x, &z);
                vec![s, c]
            }),
            bounds: vec![Bounds::FREE; 2],
        };
        let res = fit(&problem, &opts)?;
        mu = x.iter().map(|&v| (res.params[0] * v + res.params[1]).exp().max(0.5)).collect();
        last = Some(res);
    }
    let res = last.expect("at least one pass");
    let slope = res.params[0];
    if !(slope < 0.0) {
        return Err(Error::FitQuality(format!("counts do not decay in the window (slope {slope:.3e} per ns)")));
    }
    Ok(LifetimeFit {
        tau_ns: -1.0 / slope,
        sigma_ns: res.sigma[0] / (slope * slope),
        amplitude: (slope * x[0] + res.params[1]).exp(),
        first_bin: first,
        n_bins: x.len(),
        fit: res,
    })
}

/// Decay rate measured at one excitation power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub power_mw: f64,
    /// 1/ns.
    pub gamma1: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayExtrapolation {
    pub tau_ns: f64,
    pub sigma_tau_ns: f64,
    /// 1/(ns·mW).
    pub slope: f64,
    /// Zero-power decay rate, 1/ns.
    pub intercept: f64,
    /// Covariance of (slope, intercept).
    pub covariance: [[f64; 2]; 2],
    pub fit: FitResult,
}

/// Weighted straight line `γ₁ = m·P + 1/τ`; the lifetime is the inverse of
/// the zero-power intercept.
pub fn decay_rate_extrapolation(points: &[RatePoint]) -> Result<DecayExtrapolation> {
    let mut powers: Vec<f64> = points.iter().map(|p| p.power_mw).collect();
    powers.sort_by(f64::total_cmp);
    powers.dedup();
    if powers.len() < 2 {
        return Err(Error::InsufficientData(format!("{} distinct powers; need at least 2", powers.len())));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p.sigma > 0.0) {
            return Err(Error::Data { row: i, message: format!("rate uncertainty {} must be positive", p.sigma) });
        }
    }
    let x: Vec<f64> = points.iter().map(|p| p.power_mw).collect();
    let y: Vec<f64> = points.iter().map(|p| p.gamma1).collect();
    let (s, c) = crate::fitkit::init::ordinary_line(&x, &y);
    let problem = FitProblem {
        model: ModelId::Linear,
        weights: points.iter().map(|p| 1.0 / p.sigma).collect(),
        x,
        y,
        initial_params: vec![s, c],
        bounds: vec![Bounds::FREE; 2],
    };
    let res = fit(&problem, &FitOptions { scale_covariance: false, ..FitOptions::default() })?;
    let (slope, intercept) = (res.params[0], res.params[1]);
    if !(intercept > 0.0) {
        return Err(Error::NonPhysical(format!("zero-power decay rate {intercept:.4e} per ns is not positive")));
    }
    let cov = &res.covariance;
    Ok(DecayExtrapolation {
        tau_ns: 1.0 / intercept,
        sigma_tau_ns: cov[1][1].max(0.0).sqrt() / (intercept * intercept),
        slope,
        intercept,
        covariance: [[cov[0][0], cov[0][1]], [cov[1][0], cov[1][1]]],
        fit: res,
    })
}
