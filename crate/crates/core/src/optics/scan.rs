use serde::{Deserialize, Serialize};

use crate::dataio::{ScanTrace, SweepDirection};
use crate::error::{Error, Result};
use crate::fitkit::{fit, FitOptions, FitProblem, ModelId, Weighting};
use crate::signal::{find_peaks, half_max_width, mean_std, median, Peak, PeakOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinesseOptions {
    pub peaks: PeakOptions,
    /// Half-width of each Lorentzian fit window, in units of the peak's
    /// half-maximum width estimate. Also capped at half the distance to the
    /// nearest neighbouring peak.
    pub window_fwhm: f64,
}

impl Default for FinesseOptions {
    fn default() -> Self {
        FinesseOptions { peaks: PeakOptions::default(), window_fwhm: 6.0 }
    }
}

/// One fitted transmission resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPeak {
    pub ramp: usize,
    pub direction: SweepDirection,
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinesseEstimate {
    pub finesse: f64,
    /// Sample standard deviation over adjacent-peak pairs (zero for one pair).
    pub sigma: f64,
    /// `spacing / mean(FWHM)` for every adjacent pair, in ramp order.
    pub per_pair: Vec<f64>,
    pub peaks: Vec<ScanPeak>,
}

/// Finesse as peak spacing over Lorentzian FWHM, from every adjacent pair of
/// resonances in every ramp of a length scan.
pub fn finesse_from_scan(trace: &ScanTrace, opts: &FinesseOptions) -> Result<FinesseEstimate> {
    trace.validate()?;
    let mut peaks = Vec::new();
    let mut per_pair = Vec::new();
    let mut most_found = 0;
    for (k, r) in trace.ramps().into_iter().enumerate() {
        let dir = trace.direction[r.start];
        let x = &trace.axis[r.clone()];
        let y = &trace.signal[r];
        let mut ramp_peaks = fit_ramp(x, y, opts)?;
        most_found = most_found.max(ramp_peaks.len());
        ramp_peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
        for w in ramp_peaks.windows(2) {
            let spacing = (w[1].center - w[0].center).abs();
            per_pair.push(spacing / (0.5 * (w[0].fwhm + w[1].fwhm)));
        }
        peaks.extend(ramp_peaks.into_iter().map(|p| ScanPeak { ramp: k, direction: dir, ..p }));
    }
    if per_pair.is_empty() {
        return Err(Error::InsufficientPeaks { found: most_found, needed: 2 });
    }
    let (finesse, sigma) = mean_std(&per_pair);
    Ok(FinesseEstimate { finesse, sigma, per_pair, peaks })
}

fn fit_ramp(x: &[f64], y: &[f64], opts: &FinesseOptions) -> Result<Vec<ScanPeak>> {
    let baseline = median(y);
    let found = distinct_resonances(x, y, find_peaks(y, &opts.peaks), baseline);
    let mut out = Vec::with_capacity(found.len());
    for (i, &(p, w0)) in found.iter().enumerate() {
        let mut half = opts.window_fwhm * w0;
        let x0 = x[p.index];
        for j in [i.wrapping_sub(1), i + 1] {
            if let Some((q, _)) = found.get(j) {
                half = half.min(0.5 * (x[q.index] - x0).abs());
            }
        }
        let idx: Vec<usize> = (0..x.len()).filter(|&k| (x[k] - x0).abs() <= half).collect();
        if idx.len() < 5 {
            continue;
        }
        let wx: Vec<f64> = idx.iter().map(|&k| x[k]).collect();
        let wy: Vec<f64> = idx.iter().map(|&k| y[k]).collect();
        let mut problem = FitProblem::with_defaults(ModelId::Lorentzian, wx, wy, Weighting::Uniform)?;
        problem.initial_params = vec![p.height - baseline, x0, w0, baseline];
        let Ok(res) = fit(&problem, &FitOptions::default()) else { continue };
        if !res.converged {
            continue;
        }
        out.push(ScanPeak {
            ramp: 0,
            direction: SweepDirection::Up,
            center: res.params[1],
            fwhm: res.params[2].abs(),
            amplitude: res.params[0],
        });
    }
    Ok(out)
}

/// Keeps the most prominent maximum of each resonance: noise spikes on a
/// line's flank lie within a few half-widths of a taller maximum and are
/// dropped. Returns each survivor with its half-maximum width, sorted by
/// position.
fn distinct_resonances(x: &[f64], y: &[f64], mut found: Vec<Peak>, baseline: f64) -> Vec<(Peak, f64)> {
    found.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    let mut kept: Vec<(Peak, f64)> = Vec::new();
    for p in found {
        let Some(w) = half_max_width(x, y, p.index, baseline).filter(|w| *w > 0.0) else { continue };
        let x0 = x[p.index];
        if kept.iter().any(|(q, wq)| (x[q.index] - x0).abs() < 3.0 * wq.max(w)) {
            continue;
        }
        kept.push((p, w));
    }
    kept.sort_by_key(|(p, _)| p.index);
    kept
}
