//! Synthetic datasets with known ground truth, and brute-force oracles.
//!
//! Every generator is a pure function of its spec and seed. Presets carry
//! count levels and noise amplitudes chosen to resemble the published
//! figures; they are estimates, not measured values.

mod oracle;
pub mod presets;
pub mod rng;
mod traces;
mod vibration;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataio::{save_csv, write_report, Spectrum, TimeHistogram, TraceSet, XyData};
use crate::error::{Error, Result};
use crate::fitkit::ModelId;
use rng::SplitMix64;

pub use oracle::{oracle_dispersion, OracleCell};
pub use traces::{generate_drift_map, generate_scan, generate_wled_spectrum, DriftSpec, ScanSpec};
pub use vibration::{jitter_for_target_kappa, vibration_broadening_sim, VibrationSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    None,
    Poisson,
    Gaussian { sigma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub model: ModelId,
    pub true_params: Vec<f64>,
    pub grid: Vec<f64>,
    pub noise: Noise,
    pub seed: u64,
    /// Multiplies the model before noise is drawn, e.g. counts per bin for
    /// a normalised g² curve.
    pub scale: f64,
}

impl GeneratorSpec {
    pub fn new(model: ModelId, true_params: Vec<f64>, grid: Vec<f64>, noise: Noise, seed: u64) -> Self {
        GeneratorSpec { model, true_params, grid, noise, seed, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("generator grid is empty"));
        }
        if self.true_params.len() != self.model.n_params() {
            return Err(Error::invalid(format!(
                "model {} takes {} parameters, got {}",
                self.model,
                self.model.n_params(),
                self.true_params.len()
            )));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::invalid("scale must be positive"));
        }
        if let Noise::Gaussian { sigma } = self.noise {
            if !(sigma > 0.0) {
                return Err(Error::invalid("Gaussian noise needs a positive sigma"));
            }
        }
        Ok(())
    }
}

/// Ground truth written next to every generated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// Absent for datasets not drawn from a registered fit model.
    pub model: Option<ModelId>,
    pub param_names: Vec<String>,
    pub true_params: Vec<f64>,
    pub noise: Noise,
    pub seed: u64,
    pub scale: f64,
    pub preset: Option<String>,
}

impl Truth {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.true_params[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub traces: TraceSet,
    pub truth: Truth,
}

impl Generated {
    /// Writes `<stem>.csv` and `<stem>.truth.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let truth = dir.join(format!("{stem}.truth.json"));
        save_csv(&csv, &self.traces)?;
        write_report(&truth, &self.truth)?;
        Ok((csv, truth))
    }
}

/// Draws a dataset from a registered model.
///
/// Poisson noise on the decay and g² models gives a [`TimeHistogram`], on
/// the peak models a [`Spectrum`]; everything else is returned as
/// [`XyData`] carrying the noise level as `sigma` (one when noiseless).
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    spec.validate()?;
    let mean: Vec<f64> = spec.grid.iter().map(|&x| spec.scale * spec.model.eval(&spec.true_params, x)).collect();
    if let Some(i) = mean.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i, context: format!("{} mean", spec.model) });
    }
    let mut rng = SplitMix64::new(spec.seed);
    let x = spec.grid.clone();
    let traces = match spec.noise {
        Noise::Poisson => {
            if let Some(i) = mean.iter().position(|&v| v < 0.0) {
                return Err(Error::NonPhysical(format!("negative Poisson mean at grid index {i}")));
            }
            let counts: Vec<u64> = mean.iter().map(|&m| rng.poisson(m)).collect();
            match spec.model {
                ModelId::ExponentialDecay | ModelId::G2ThreeLevel => {
                    TraceSet::Histogram(TimeHistogram::new(x, counts)?)
                }
                ModelId::Lorentzian | ModelId::Gaussian => {
                    TraceSet::Spectrum(Spectrum::new(x, counts.into_iter().map(|c| c as f64).collect())?)
                }
                _ => {
                    let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                    let sigma = mean.iter().map(|m| m.max(1.0).sqrt()).collect();
                    TraceSet::Xy(XyData::new(x, y, sigma)?)
                }
            }
        }
        Noise::Gaussian { sigma } => {
            let s = sigma * spec.scale;
            let y = mean.iter().map(|&m| rng.normal(m, s)).collect();
            TraceSet::Xy(XyData::new(x, y, vec![s; spec.grid.len()])?)
        }
        Noise::None => TraceSet::Xy(XyData::new(x, mean, vec![1.0; spec.grid.len()])?),
    };
    Ok(Generated {
        traces,
        truth: Truth {
            model: Some(spec.model),
            param_names: spec.model.param_names().iter().map(|s| s.to_string()).collect(),
            true_params: spec.true_params.clone(),
            noise: spec.noise,
            seed: spec.seed,
            scale: spec.scale,
            preset: None,
        },
    })
}

/// `n` points evenly spaced on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` points geometrically spaced on `[lo, hi]`.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}
