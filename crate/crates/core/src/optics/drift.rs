use serde::{Deserialize, Serialize};

use crate::dataio::Spectrum;
use crate::error::{Error, Result};
use crate::fitkit::{fit, FitOptions, FitProblem, FitResult, ModelId, Weighting};
use crate::signal::median;
use crate::units::NM_PER_UM;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftOptions {
    /// Free spectral range in wavelength; the tracked peak may not move by
    /// more than half of it between consecutive spectra.
    pub fsr_nm: f64,
    /// Half-width of the Lorentzian fit window around the brightest sample.
    pub window_nm: f64,
    /// Where to look for the peak in the first spectrum; the global maximum
    /// when absent.
    pub initial_center_nm: Option<f64>,
}

impl Default for DriftOptions {
    fn default() -> Self {
        DriftOptions { fsr_nm: 50.0, window_nm: 0.5, initial_center_nm: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub index: usize,
    pub time_s: Option<f64>,
    pub temperature_k: Option<f64>,
    pub center_nm: f64,
    /// Half the resonance shift relative to the first spectrum.
    pub delta_l_nm: f64,
}

/// Track one resonance through time-ordered spectra.
pub fn drift_series(spectra: &[Spectrum], opts: &DriftOptions) -> Result<Vec<DriftPoint>> {
    if spectra.is_empty() {
        return Err(Error::InsufficientData("no spectra to track".into()));
    }
    if !(opts.fsr_nm > 0.0) || !(opts.window_nm > 0.0) {
        return Err(Error::invalid("drift options need positive fsr_nm and window_nm"));
    }
    let max_jump = 0.5 * opts.fsr_nm;
    let mut out = Vec::with_capacity(spectra.len());
    let mut prev = opts.initial_center_nm;
    let mut origin = None;
    for (index, s) in spectra.iter().enumerate() {
        s.validate()?;
        let center = locate_peak(s, prev.map(|c| (c, max_jump)), opts.window_nm)
            .map_err(|reason| Error::TrackingBreak { index, reason })?;
        if let Some(p) = prev.filter(|_| index > 0) {
            if (center - p).abs() > max_jump {
                return Err(Error::TrackingBreak {
                    index,
                    reason: format!("peak moved {:.3} nm, more than half an FSR", center - p),
                });
            }
        }
        let c0 = *origin.get_or_insert(center);
        out.push(DriftPoint {
            index,
            time_s: s.timestamp_s,
            temperature_k: s.temperature_k,
            center_nm: center,
            delta_l_nm: (center - c0) / 2.0,
        });
        prev = Some(center);
    }
    Ok(out)
}

fn locate_peak(s: &Spectrum, around: Option<(f64, f64)>, window_nm: f64) -> Result<f64, String> {
    let range = match around {
        Some((c, half)) => s.window(c - half, c + half),
        None => 0..s.len(),
    };
    if range.is_empty() {
        return Err("no samples near the previous peak".into());
    }
    let k = range.clone().max_by(|&a, &b| s.counts[a].total_cmp(&s.counts[b])).expect("non-empty range");
    let x0 = s.wavelength_nm[k];
    let win = s.window(x0 - window_nm, x0 + window_nm);
    if win.len() < 5 {
        return Err(format!("only {} samples in the fit window", win.len()));
    }
    let x = s.wavelength_nm[win.clone()].to_vec();
    let y = s.counts[win].to_vec();
    let base = median(&s.counts[range]);
    let height = s.counts[k] - base;
    if !(height > 0.0) {
        return Err("no peak above the baseline".into());
    }
    let mut problem =
        FitProblem::with_defaults(ModelId::Lorentzian, x, y, Weighting::Uniform).map_err(|e| e.to_string())?;
    let step = s.wavelength_nm.get(k + 1).or(s.wavelength_nm.get(k.wrapping_sub(1))).map(|v| (v - x0).abs());
    problem.initial_params = vec![height, x0, (window_nm / 4.0).max(step.unwrap_or(0.0)), base];
    let res = fit(&problem, &FitOptions::default()).map_err(|e| e.to_string())?;
    let c = res.params[1];
    if !res.converged || !c.is_finite() || (c - x0).abs() > window_nm {
        return Err("Lorentzian fit did not settle on the peak".into());
    }
    Ok(c)
}

/// Linear thermal-expansion coefficient from length drift versus temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalExpansion {
    /// Per kelvin.
    pub alpha_per_k: f64,
    pub sigma_alpha: f64,
    pub slope_nm_per_k: f64,
    pub intercept_nm: f64,
    pub reference_length_um: f64,
    pub fit: FitResult,
}

/// `α = (dΔL/dT) / L_ref` from a straight-line fit of ΔL against temperature.
pub fn thermal_expansion_fit(points: &[DriftPoint], reference_length_um: f64) -> Result<ThermalExpansion> {
    if !(reference_length_um > 0.0) {
        return Err(Error::invalid(format!("reference length {reference_length_um} µm must be positive")));
    }
    let mut t = Vec::with_capacity(points.len());
    let mut dl = Vec::with_capacity(points.len());
    for p in points {
        let temp = p
            .temperature_k
            .ok_or_else(|| Error::Data { row: p.index, message: "spectrum has no temperature reading".into() })?;
        t.push(temp);
        dl.push(p.delta_l_nm);
    }
    if t.len() < 3 {
        return Err(Error::InsufficientData(format!("{} drift points; need at least 3", t.len())));
    }
    let problem = FitProblem::with_defaults(ModelId::Linear, t, dl, Weighting::Uniform)?;
    let res = fit(&problem, &FitOptions::default())?;
    let l_nm = reference_length_um * NM_PER_UM;
    Ok(ThermalExpansion {
        alpha_per_k: res.params[0] / l_nm,
        sigma_alpha: res.sigma[0] / l_nm,
        slope_nm_per_k: res.params[0],
        intercept_nm: res.params[1],
        reference_length_um,
        fit: res,
    })
}
