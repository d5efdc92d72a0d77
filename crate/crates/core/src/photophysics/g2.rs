use serde::{Deserialize, Serialize};

use crate::dataio::TimeHistogram;
use crate::error::{Error, Result};
use crate::fitkit::{fit, init, FitOptions, FitProblem, FitResult, ModelId};

/// Three-level autocorrelation
/// `g²(t) = 1 + c·(β·e^{-γ₁|t-t₀|} + (β-1)·e^{-γ₂|t-t₀|})`.
///
/// Antibunching together with bunching needs `c < 0` and `½ < β < 1`.
/// The parameterisation has the exact symmetry
/// `(c, β, γ₁, γ₂) ≡ (-c, 1-β, γ₂, γ₁)`; [`G2Params::canonical`] picks the
/// member with `γ₁ > γ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Params {
    pub c: f64,
    pub beta: f64,
    /// 1/ns.
    pub gamma1: f64,
    /// 1/ns.
    pub gamma2: f64,
    /// ns.
    pub t0: f64,
}

impl G2Params {
    pub fn new(c: f64, beta: f64, gamma1: f64, gamma2: f64, t0: f64) -> Result<Self> {
        let p = G2Params { c, beta, gamma1, gamma2, t0 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with the given zero-delay value, antibunching rate,
    /// shelving rate and bunching contrast `c`.
    pub fn from_g2_zero(g2_zero: f64, c: f64, gamma1: f64, gamma2: f64, t0: f64) -> Result<Self> {
        if c == 0.0 {
            return Err(Error::invalid("contrast c must be non-zero"));
        }
        G2Params::new(c, 0.5 * ((g2_zero - 1.0) / c + 1.0), gamma1, gamma2, t0)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.c, self.beta, self.gamma1, self.gamma2, self.t0].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("g² parameters must be finite"));
        }
        if !(self.gamma1 > self.gamma2 && self.gamma2 > 0.0) {
            return Err(Error::invalid(format!(
                "g² rates need γ₁ > γ₂ > 0, got γ₁ = {}, γ₂ = {}",
                self.gamma1, self.gamma2
            )));
        }
        Ok(())
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.c, self.beta, self.gamma1, self.gamma2, self.t0]
    }

    pub fn from_slice(p: &[f64]) -> Self {
        G2Params { c: p[0], beta: p[1], gamma1: p[2], gamma2: p[3], t0: p[4] }
    }

    /// `1 + c(2β - 1)`.
    pub fn g2_zero(&self) -> f64 {
        1.0 + self.c * (2.0 * self.beta - 1.0)
    }

    pub fn canonical(&self) -> Self {
        if self.gamma1 >= self.gamma2 {
            *self
        } else {
            G2Params { c: -self.c, beta: 1.0 - self.beta, gamma1: self.gamma2, gamma2: self.gamma1, t0: self.t0 }
        }
    }
}

pub fn g2_model(t_ns: f64, p: &G2Params) -> f64 {
    let d = (t_ns - p.t0).abs();
    1.0 + p.c * (p.beta * (-p.gamma1 * d).exp() + (p.beta - 1.0) * (-p.gamma2 * d).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2FitOptions {
    /// Bins with `|t - t₀| > plateau_factor / γ₂` define the Poissonian
    /// plateau used for normalisation.
    pub plateau_factor: f64,
    /// Minimum number of plateau bins; below this the outer quarter of the
    /// delay range is used instead.
    pub min_plateau_bins: usize,
}

impl Default for G2FitOptions {
    fn default() -> Self {
        G2FitOptions { plateau_factor: 5.0, min_plateau_bins: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Fit {
    pub params: G2Params,
    /// σ of (c, β, γ₁, γ₂, t₀) after canonicalisation.
    pub sigma: [f64; 5],
    pub g2_zero: f64,
    pub g2_zero_sigma: f64,
    /// Mean raw counts per bin on the long-delay plateau.
    pub plateau: f64,
    pub fit: FitResult,
}

/// Normalise a coincidence histogram by its long-delay plateau and fit the
/// three-level model with Poisson weights.
pub fn fit_g2(hist: &TimeHistogram, opts: &G2FitOptions) -> Result<G2Fit> {
    hist.validate()?;
    let t = &hist.bin_centers_ns;
    let raw = hist.counts_f64();
    if t.len() < 10 {
        return Err(Error::InsufficientData(format!("{} bins; need at least 10", t.len())));
    }

    let lo = t[0];
    let hi = t[t.len() - 1];
    let outer = 0.25 * (hi - lo);
    let rough = plateau_mean(t, &raw, |x| x - lo < outer || hi - x < outer)
        .ok_or_else(|| Error::InsufficientData("no delay bins far from zero".into()))?;
    if !(rough > 0.0) {
        return Err(Error::InsufficientData("plateau has no coincidences".into()));
    }
    let y0: Vec<f64> = raw.iter().map(|c| c / rough).collect();
    let guess = G2Params::from_slice(&init::initial_guess(ModelId::G2ThreeLevel, t, &y0)?).canonical();

    let cut = opts.plateau_factor / guess.gamma2;
    let far = |x: f64| (x - guess.t0).abs() > cut;
    let (mut plateau, use_far) = match plateau_mean(t, &raw, far) {
        Some(m) if count_where(t, far) >= opts.min_plateau_bins && m > 0.0 => (m, true),
        _ => (rough, false),
    };
    let in_plateau = |x: f64| if use_far { far(x) } else { x - lo < outer || hi - x < outer };
    let raw_plateau = plateau;

    let y: Vec<f64> = raw.iter().map(|c| c / plateau).collect();
    let mut start = G2Params::from_slice(&init::initial_guess(ModelId::G2ThreeLevel, t, &y)?).canonical();
    let mut res = None;
    // The bunching tail still lifts the plateau bins slightly; divide it out
    // using the previous fit and refit.
    for _ in 0..3 {
        let y: Vec<f64> = raw.iter().map(|c| c / plateau).collect();
        let weights: Vec<f64> = raw.iter().map(|c| plateau / c.max(1.0).sqrt()).collect();
        let problem = FitProblem {
            model: ModelId::G2ThreeLevel,
            x: t.clone(),
            y,
            weights,
            initial_params: start.as_vec(),
            bounds: init::default_bounds(ModelId::G2ThreeLevel),
        };
        let r = fit(&problem, &FitOptions::default())?;
        if !r.converged {
            return Err(Error::FitQuality(format!(
                "g² fit did not converge after {} iterations (reduced χ² {:.3})",
                r.iterations, r.reduced_chi2
            )));
        }
        let p = G2Params::from_slice(&r.params);
        let lift = plateau_mean(t, &t.iter().map(|&x| g2_model(x, &p)).collect::<Vec<_>>(), in_plateau).unwrap_or(1.0);
        plateau = raw_plateau / lift;
        start = p;
        res = Some(r);
    }
    let res = res.expect("at least one pass");
    let raw_params = G2Params::from_slice(&res.params);
    let params = raw_params.canonical();
    let swapped = params != raw_params;
    let s = &res.sigma;
    let sigma = if swapped { [s[0], s[1], s[3], s[2], s[4]] } else { [s[0], s[1], s[2], s[3], s[4]] };

    // g²(t₀) = 1 + c(2β - 1) is invariant under the symmetry, so propagate
    // with the unswapped covariance.
    let grad = [2.0 * raw_params.beta - 1.0, 2.0 * raw_params.c];
    let cov = &res.covariance;
    let var = grad[0] * grad[0] * cov[0][0] + 2.0 * grad[0] * grad[1] * cov[0][1] + grad[1] * grad[1] * cov[1][1];
    Ok(G2Fit { g2_zero: params.g2_zero(), g2_zero_sigma: var.max(0.0).sqrt(), params, sigma, plateau, fit: res })
}

fn plateau_mean(t: &[f64], y: &[f64], keep: impl Fn(f64) -> bool) -> Option<f64> {
    let (sum, n) = t.iter().zip(y).filter(|(x, _)| keep(**x)).fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn count_where(t: &[f64], keep: impl Fn(f64) -> bool) -> usize {
    t.iter().filter(|x| keep(**x)).count()
}
