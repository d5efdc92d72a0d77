//! Per-model starting points and default bounds, so pipelines can run
//! without hand-tuned initial values.

use super::{Bounds, ModelId};
use crate::error::{Error, Result};
use crate::signal::{half_max_width, median, moving_average};

pub fn default_bounds(model: ModelId) -> Vec<Bounds> {
    let free = Bounds::FREE;
    let pos = Bounds::positive();
    match model {
        ModelId::Lorentzian | ModelId::Gaussian => vec![free, free, pos, free],
        ModelId::Linear => vec![free, free],
        ModelId::ExponentialDecay => vec![free, pos, free],
        ModelId::G2ThreeLevel => vec![free, free, pos, pos, free],
        ModelId::Saturation => vec![free, pos],
        ModelId::DetunedPurcell => vec![free, pos, pos, free],
    }
}

pub fn initial_guess(model: ModelId, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!("{} points for initialisation", x.len())));
    }
    Ok(match model {
        ModelId::Lorentzian => {
            let (amp, center, fwhm, base) = peak_shape(x, y);
            vec![amp, center, fwhm, base]
        }
        ModelId::Gaussian => {
            let (amp, center, fwhm, base) = peak_shape(x, y);
            vec![amp, center, fwhm / (8.0 * 2f64.ln()).sqrt(), base]
        }
        ModelId::Linear => {
            let (slope, intercept) = ordinary_line(x, y);
            vec![slope, intercept]
        }
        ModelId::ExponentialDecay => exponential_guess(x, y),
        ModelId::G2ThreeLevel => g2_guess(x, y),
        ModelId::Saturation => saturation_guess(x, y),
        ModelId::DetunedPurcell => {
            let (amp, center, fwhm, base) = peak_shape(x, y);
            let q = if fwhm > 0.0 { center.abs() / fwhm } else { 1.0 };
            vec![amp, center, q.max(1e-6), base]
        }
    })
}

fn span(x: &[f64]) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// (amplitude, center, fwhm, baseline) of the dominant peak.
fn peak_shape(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let base = median(y).min(y.iter().cloned().fold(f64::INFINITY, f64::min) + 0.25 * span(y));
    let smooth = if y.len() > 20 { moving_average(y, 1) } else { y.to_vec() };
    let imax = argmax(&smooth);
    let amp = smooth[imax] - base;
    let fwhm = half_max_width(x, &smooth, imax, base).filter(|w| *w > 0.0).unwrap_or(span(x) / 10.0);
    (amp, x[imax], fwhm, base)
}

fn argmax(y: &[f64]) -> usize {
    y.iter().enumerate().fold(0, |best, (i, &v)| if v > y[best] { i } else { best })
}

fn argmin(y: &[f64]) -> usize {
    y.iter().enumerate().fold(0, |best, (i, &v)| if v < y[best] { i } else { best })
}

pub(crate) fn ordinary_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn exponential_guess(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let tail = (n / 10).max(1);
    let offset = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let i0 = argmax(y);
    let amp0 = (y[i0] - offset).max(f64::MIN_POSITIVE);
    // First crossing of 1/e of the initial excess.
    let target = offset + amp0 / std::f64::consts::E;
    let tau = (i0..n).find(|&i| y[i] <= target).map(|i| (x[i] - x[i0]).max(f64::EPSILON)).unwrap_or(span(x) / 3.0);
    let amp = amp0 * (x[i0] / tau).exp();
    vec![amp, tau, offset]
}

fn saturation_guess(x: &[f64], y: &[f64]) -> Vec<f64> {
    // Double-reciprocal line: 1/I = (P_sat/I_sat)(1/P) + 1/I_sat.
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(p, i)| **p > 0.0 && **i > 0.0).map(|(p, i)| (1.0 / p, 1.0 / i)).collect();
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let xmax = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if pts.len() >= 2 {
        let (u, v): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let (slope, intercept) = ordinary_line(&u, &v);
        if intercept > 0.0 && slope > 0.0 {
            let i_sat = 1.0 / intercept;
            return vec![i_sat, slope * i_sat];
        }
    }
    vec![ymax * 1.5, xmax / 2.0]
}

/// Starting point for a normalised g² trace: dip depth and position give
/// `c(2β - 1)` and `t₀`, the bunching shoulder gives `c(β - 1)`, the dip
/// half-recovery time gives `γ₁`, and `γ₂ = γ₁/10`.
fn g2_guess(x: &[f64], y: &[f64]) -> Vec<f64> {
    let smooth = moving_average(y, 2);
    let imin = argmin(&smooth);
    let t0 = x[imin];
    let g0 = smooth[imin];
    let half = 0.5 * (g0 + 1.0);

    let right = (imin..x.len()).find(|&i| smooth[i] >= half).map(|i| (x[i] - t0).abs());
    let left = (0..=imin).rev().find(|&i| smooth[i] >= half).map(|i| (x[i] - t0).abs());
    let d_half = match (left, right) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        (Some(v), None) | (None, Some(v)) => v,
        (None, None) => span(x) / 20.0,
    }
    .max(span(x) * 1e-4);
    let gamma1 = std::f64::consts::LN_2 / d_half;
    let gamma2 = gamma1 / 10.0;

    let bunching = smooth
        .iter()
        .zip(x)
        .filter(|(_, &t)| (t - t0).abs() > 2.0 * d_half)
        .map(|(v, _)| v - 1.0)
        .fold(0.0, f64::max)
        .max(0.02);
    let a = g0 - 1.0 - bunching; // c·β
    let c = a - bunching;
    let beta = a / c;
    vec![c, beta, gamma1, gamma2, t0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-12)
    }

    #[test]
    fn saturation_guess_is_exact_on_clean_data() {
        let p: Vec<f64> = (1..15).map(|i| 0.1 * i as f64).collect();
        let y: Vec<f64> = p.iter().map(|&v| ModelId::Saturation.eval(&[150.0, 0.37], v)).collect();
        let g = initial_guess(ModelId::Saturation, &p, &y).unwrap();
        assert!(close(g[0], 150.0, 1e-9) && close(g[1], 0.37, 1e-9), "{g:?}");
    }

    #[test]
    fn lorentzian_guess_is_near_truth() {
        let x: Vec<f64> = (0..400).map(|i| 600.0 + 0.1 * i as f64).collect();
        let truth = [500.0, 618.6, 0.27, 10.0];
        let y: Vec<f64> = x.iter().map(|&v| ModelId::Lorentzian.eval(&truth, v)).collect();
        let g = initial_guess(ModelId::Lorentzian, &x, &y).unwrap();
        assert!((g[1] - 618.6).abs() < 0.1);
        assert!(close(g[2], 0.27, 0.5));
    }

    #[test]
    fn g2_guess_reproduces_dip_value() {
        let truth = [-1.3, 0.8038, 0.08, 0.005, 0.0];
        let x: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|&t| ModelId::G2ThreeLevel.eval(&truth, t)).collect();
        let g = initial_guess(ModelId::G2ThreeLevel, &x, &y).unwrap();
        let g0 = 1.0 + g[0] * (2.0 * g[1] - 1.0);
        assert!((g0 - 0.21).abs() < 0.05, "{g:?}");
        assert!(g[2] > g[3]);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(initial_guess(ModelId::Linear, &[1.0], &[1.0]).is_err());
    }
}
