use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use crate::error::{Error, Result};
use crate::units::{frequency_thz, GHZ_PER_THZ, NM_PER_UM};

/// Cavity line broadened by random length excursions during acquisition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VibrationSpec {
    pub kappa_intrinsic_ghz: f64,
    pub jitter_rms_nm: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub l_eff_um: f64,
    pub wavelength_nm: f64,
}

impl VibrationSpec {
    pub fn new(kappa_intrinsic_ghz: f64, jitter_rms_nm: f64, n_samples: usize) -> Self {
        VibrationSpec { kappa_intrinsic_ghz, jitter_rms_nm, n_samples, seed: 1, l_eff_um: 3.75, wavelength_nm: 618.5 }
    }
}

/// FWHM (GHz) of the average of `n_samples` Lorentzians of width
/// `κ_intrinsic` whose centres are shifted by `ν·δL/L`, with `δL` normal of
/// the given rms. The same seed reuses the same standard-normal draws for
/// every jitter, so the output is monotone in the jitter for a fixed seed.
pub fn vibration_broadening_sim(spec: &VibrationSpec) -> Result<f64> {
    let k = spec.kappa_intrinsic_ghz;
    if !(k > 0.0) || !(spec.jitter_rms_nm >= 0.0) || spec.n_samples == 0 {
        return Err(Error::invalid("need κ > 0, jitter ≥ 0 and at least one sample"));
    }
    if !(spec.l_eff_um > 0.0 && spec.wavelength_nm > 0.0) {
        return Err(Error::invalid("cavity length and wavelength must be positive"));
    }
    let nu = frequency_thz(spec.wavelength_nm) * GHZ_PER_THZ;
    let per_nm = nu / (spec.l_eff_um * NM_PER_UM);
    let mut rng = SplitMix64::new(spec.seed);
    let shifts: Vec<f64> = (0..spec.n_samples).map(|_| per_nm * spec.jitter_rms_nm * rng.standard_normal()).collect();
    let line = |d: f64| {
        shifts
            .iter()
            .map(|&s| {
                let u = 2.0 * (d - s) / k;
                1.0 / (1.0 + u * u)
            })
            .sum::<f64>()
            / shifts.len() as f64
    };

    let lo = shifts.iter().cloned().fold(f64::INFINITY, f64::min) - k;
    let hi = shifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + k;
    let n_grid = 801;
    let grid_step = (hi - lo) / (n_grid - 1) as f64;
    let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..n_grid {
        let x = lo + grid_step * i as f64;
        let v = line(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    let (mut a, mut b) = (best_x - grid_step, best_x + grid_step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if line(c) >= line(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = line(0.5 * (a + b));
    let (peak_x, peak) = if refined > best { (0.5 * (a + b), refined) } else { (best_x, best) };
    let half = 0.5 * peak;

    let crossing = |dir: f64| {
        let mut far = k;
        while line(peak_x + dir * far) >= half {
            far *= 2.0;
        }
        let (mut inside, mut outside) = (0.0, far);
        for _ in 0..100 {
            let mid = 0.5 * (inside + outside);
            if line(peak_x + dir * mid) >= half {
                inside = mid;
            } else {
                outside = mid;
            }
            if outside - inside <= 1e-13 * outside {
                break;
            }
        }
        0.5 * (inside + outside)
    };
    Ok(crossing(1.0) + crossing(-1.0))
}

/// Length jitter (nm rms) for which the simulated linewidth reaches
/// `target_kappa_ghz`, found by bisection with common random numbers.
pub fn jitter_for_target_kappa(base: &VibrationSpec, target_kappa_ghz: f64) -> Result<f64> {
    if !(target_kappa_ghz >= base.kappa_intrinsic_ghz) {
        return Err(Error::invalid("target linewidth is below the intrinsic one"));
    }
    let at = |j: f64| vibration_broadening_sim(&VibrationSpec { jitter_rms_nm: j, ..*base });
    let mut hi = 0.01;
    while at(hi)? < target_kappa_ghz {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::SearchFailure("no jitter reaches the target linewidth".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < target_kappa_ghz {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
