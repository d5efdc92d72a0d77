use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, SplitMix64};
use super::{linspace, Noise};
use crate::dataio::{ScanTrace, SpectralMap, Spectrum, SweepDirection};
use crate::error::{Error, Result};
use crate::optics::{mode_frequency_with, Mirror, ModeModel};

fn draw(rng: &mut SplitMix64, mean: f64, noise: Noise) -> f64 {
    match noise {
        Noise::None => mean,
        Noise::Poisson => rng.poisson(mean) as f64,
        Noise::Gaussian { sigma } => rng.normal(mean, sigma),
    }
}

/// Piezo scan across Airy transmission resonances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    /// Axis distance between adjacent resonances.
    pub fsr_axis: f64,
    pub finesse: f64,
    pub first_peak: f64,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Counts at the top of a resonance, above background.
    pub peak_counts: f64,
    pub background: f64,
    pub ramps: Vec<SweepDirection>,
    pub noise: Noise,
    pub seed: u64,
}

impl ScanSpec {
    /// Airy transmission `1 / (1 + (2F/π)² sin²(π (x - x₀) / FSR))`.
    pub fn transmission(&self, x: f64) -> f64 {
        let k = 2.0 * self.finesse / std::f64::consts::PI;
        let s = (std::f64::consts::PI * (x - self.first_peak) / self.fsr_axis).sin();
        1.0 / (1.0 + k * k * s * s)
    }

    /// Exact full width at half maximum of one Airy resonance.
    pub fn airy_fwhm(&self) -> f64 {
        2.0 * self.fsr_axis / std::f64::consts::PI * (std::f64::consts::PI / (2.0 * self.finesse)).asin()
    }

    /// Finesse as `FSR / FWHM` of the Airy line, which is what a peak-width
    /// measurement recovers.
    pub fn measured_finesse(&self) -> f64 {
        self.fsr_axis / self.airy_fwhm()
    }
}

pub fn generate_scan(spec: &ScanSpec) -> Result<ScanTrace> {
    if !(spec.fsr_axis > 0.0 && spec.finesse > 0.0 && spec.step > 0.0 && spec.stop > spec.start) {
        return Err(Error::invalid("scan spec needs positive FSR, finesse, step and an increasing range"));
    }
    if spec.ramps.is_empty() {
        return Err(Error::invalid("scan spec has no ramps"));
    }
    let n = ((spec.stop - spec.start) / spec.step).round() as usize + 1;
    let up = linspace(spec.start, spec.stop, n);
    let mut axis = Vec::with_capacity(n * spec.ramps.len());
    let mut signal = Vec::with_capacity(n * spec.ramps.len());
    let mut direction = Vec::with_capacity(n * spec.ramps.len());
    for (k, &dir) in spec.ramps.iter().enumerate() {
        let mut rng = SplitMix64::new(derive_seed(spec.seed, k as u64));
        let ramp: Box<dyn Iterator<Item = &f64>> = match dir {
            SweepDirection::Up => Box::new(up.iter()),
            SweepDirection::Down => Box::new(up.iter().rev()),
        };
        for &x in ramp {
            axis.push(x);
            signal.push(draw(&mut rng, spec.background + spec.peak_counts * spec.transmission(x), spec.noise));
            direction.push(dir);
        }
    }
    ScanTrace::new(axis, signal, direction)
}

/// Time series of spectra with one Lorentzian resonance drifting linearly,
/// and a temperature channel drifting with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub n_frames: usize,
    pub frame_period_s: f64,
    pub grid_lo_nm: f64,
    pub grid_hi_nm: f64,
    pub grid_step_nm: f64,
    pub center0_nm: f64,
    /// Resonance shift between the first and last frame.
    pub total_shift_nm: f64,
    pub fwhm_nm: f64,
    pub peak_counts: f64,
    pub background: f64,
    pub temperature0_k: f64,
    pub temperature_span_k: f64,
    pub noise: Noise,
    pub seed: u64,
}

impl DriftSpec {
    /// Temperature span that makes the length drift `total_shift / 2`
    /// correspond to the expansion coefficient `alpha` of a body of length
    /// `reference_length_um`.
    pub fn with_expansion(mut self, alpha_per_k: f64, reference_length_um: f64) -> Self {
        self.temperature_span_k = 0.5 * self.total_shift_nm / (alpha_per_k * reference_length_um * 1e3);
        self
    }

    pub fn center_at(&self, k: usize) -> f64 {
        self.center0_nm + self.total_shift_nm * self.fraction(k)
    }

    pub fn temperature_at(&self, k: usize) -> f64 {
        self.temperature0_k + self.temperature_span_k * self.fraction(k)
    }

    fn fraction(&self, k: usize) -> f64 {
        if self.n_frames > 1 {
            k as f64 / (self.n_frames - 1) as f64
        } else {
            0.0
        }
    }
}

pub fn generate_drift_map(spec: &DriftSpec) -> Result<SpectralMap> {
    if spec.n_frames == 0 || !(spec.grid_step_nm > 0.0) || !(spec.grid_hi_nm > spec.grid_lo_nm) || !(spec.fwhm_nm > 0.0)
    {
        return Err(Error::invalid("drift spec needs frames, an increasing grid and a positive linewidth"));
    }
    let n = ((spec.grid_hi_nm - spec.grid_lo_nm) / spec.grid_step_nm).round() as usize + 1;
    let grid = linspace(spec.grid_lo_nm, spec.grid_hi_nm, n);
    let frames: Vec<Spectrum> = (0..spec.n_frames)
        .into_par_iter()
        .map(|k| {
            let mut rng = SplitMix64::new(derive_seed(spec.seed, k as u64));
            let c = spec.center_at(k);
            let counts = grid
                .iter()
                .map(|&w| {
                    let u = 2.0 * (w - c) / spec.fwhm_nm;
                    draw(&mut rng, spec.background + spec.peak_counts / (1.0 + u * u), spec.noise).max(0.0)
                })
                .collect();
            Spectrum {
                wavelength_nm: grid.clone(),
                counts,
                timestamp_s: Some(k as f64 * spec.frame_period_s),
                temperature_k: Some(spec.temperature_at(k)),
            }
        })
        .collect();
    SpectralMap::new(frames, spec.frame_period_s)
}

/// White-light transmission spectrum of a cavity: one Lorentzian of width
/// `linewidth_nm` at every fundamental resonance inside the grid.
pub fn generate_wled_spectrum(
    mirror: &Mirror,
    l_eff_um: f64,
    grid_nm: &[f64],
    linewidth_nm: f64,
    model: &ModeModel,
) -> Result<Spectrum> {
    let geom = mirror.with_length(l_eff_um)?;
    let (lo, hi) = match (grid_nm.first(), grid_nm.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::invalid("empty wavelength grid")),
    };
    let m_max = (2.0 * geom.refractive_index * l_eff_um * 1e3 / lo).ceil() as u32 + 1;
    let mut lines = Vec::new();
    for m in 1..=m_max {
        let r = mode_frequency_with(&geom, m, 0, 0, model)?;
        if r.wavelength_nm >= lo - 5.0 * linewidth_nm && r.wavelength_nm <= hi + 5.0 * linewidth_nm {
            lines.push(r.wavelength_nm);
        }
    }
    let counts = grid_nm
        .iter()
        .map(|&w| 1.0 + lines.iter().map(|&c| 1000.0 / (1.0 + (2.0 * (w - c) / linewidth_nm).powi(2))).sum::<f64>())
        .collect();
    Spectrum::new(grid_nm.to_vec(), counts)
}
