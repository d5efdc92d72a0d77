//! Named datasets at count levels resembling the published measurements.
//!
//! Count totals, noise amplitudes and grids are estimates chosen so that
//! the spread of fitted values is comparable to the quoted error bars.

use super::traces::{generate_drift_map, generate_scan, DriftSpec, ScanSpec};
use super::{generate, geomspace, linspace, Generated, GeneratorSpec, Noise, Truth};
use crate::dataio::{SweepDirection, TraceSet};
use crate::error::{Error, Result};
use crate::fitkit::ModelId;
use crate::photophysics::G2Params;
use crate::units::{frequency_thz, GHZ_PER_THZ};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LifetimePreset {
    pub name: &'static str,
    pub tau_ns: f64,
    /// Quoted uncertainty of the measured lifetime.
    pub tolerance_ns: f64,
    pub total_counts: f64,
    pub bin_ns: f64,
    pub window_ns: f64,
}

pub const LIFETIME: [LifetimePreset; 3] = [
    LifetimePreset {
        name: "lifetime_4k",
        tau_ns: 12.2,
        tolerance_ns: 0.3,
        total_counts: 2.0e4,
        bin_ns: 0.5,
        window_ns: 60.0,
    },
    LifetimePreset {
        name: "lifetime_40k",
        tau_ns: 15.8,
        tolerance_ns: 0.3,
        total_counts: 3.0e4,
        bin_ns: 0.5,
        window_ns: 80.0,
    },
    LifetimePreset {
        name: "lifetime_100k",
        tau_ns: 21.0,
        tolerance_ns: 1.0,
        total_counts: 5.0e3,
        bin_ns: 0.5,
        window_ns: 100.0,
    },
];

impl LifetimePreset {
    pub fn spec(&self, seed: u64) -> GeneratorSpec {
        let n = (self.window_ns / self.bin_ns).round() as usize;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * self.bin_ns).collect();
        let norm: f64 = grid.iter().map(|t| (-t / self.tau_ns).exp()).sum();
        GeneratorSpec::new(
            ModelId::ExponentialDecay,
            vec![self.total_counts / norm, self.tau_ns, 0.0],
            grid,
            Noise::Poisson,
            seed,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationPreset {
    pub name: &'static str,
    pub temperature_k: f64,
    pub i_sat: f64,
    pub p_sat: f64,
    /// Quoted uncertainties of the two parameters.
    pub sigma_i_sat: f64,
    pub sigma_p_sat: f64,
    /// Gaussian noise per point as a fraction of `i_sat`.
    pub noise_fraction: f64,
}

pub const SATURATION: [SaturationPreset; 3] = [
    SaturationPreset {
        name: "saturation_10k",
        temperature_k: 10.0,
        i_sat: 150.0,
        p_sat: 0.37,
        sigma_i_sat: 10.0,
        sigma_p_sat: 0.06,
        noise_fraction: 0.04,
    },
    SaturationPreset {
        name: "saturation_40k",
        temperature_k: 40.0,
        i_sat: 180.0,
        p_sat: 1.1,
        sigma_i_sat: 20.0,
        sigma_p_sat: 0.2,
        noise_fraction: 0.04,
    },
    SaturationPreset {
        name: "saturation_100k",
        temperature_k: 100.0,
        i_sat: 162.0,
        p_sat: 2.2,
        sigma_i_sat: 9.0,
        sigma_p_sat: 0.2,
        noise_fraction: 0.02,
    },
];

impl SaturationPreset {
    pub fn spec(&self, seed: u64) -> GeneratorSpec {
        GeneratorSpec::new(
            ModelId::Saturation,
            vec![self.i_sat, self.p_sat],
            geomspace(0.1 * self.p_sat, 6.0 * self.p_sat, 15),
            Noise::Gaussian { sigma: self.noise_fraction * self.i_sat },
            seed,
        )
    }
}

/// Antibunching dip to 0.21 with bunching shoulders from a 200 ns shelving
/// state.
pub fn g2_params() -> G2Params {
    G2Params::from_g2_zero(0.21, -1.3, 1.0 / 12.2, 1.0 / 200.0, 0.0).expect("valid preset")
}

/// Coincidences per 0.5 ns bin on the long-delay plateau.
pub const G2_PLATEAU_COUNTS: f64 = 300.0;

pub fn g2_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec::new(
        ModelId::G2ThreeLevel,
        g2_params().as_vec(),
        linspace(-2000.0, 2000.0, 8001),
        Noise::Poisson,
        seed,
    )
    .with_scale(G2_PLATEAU_COUNTS)
}

/// Up and down piezo ramps over two resonances of a finesse-4600 cavity.
pub fn scan_spec(seed: u64) -> ScanSpec {
    ScanSpec {
        fsr_axis: 1.0,
        finesse: 4600.0,
        first_peak: 0.0,
        start: -0.3,
        stop: 1.3,
        step: 2e-5,
        peak_counts: 300.0,
        background: 5.0,
        ramps: vec![SweepDirection::Up, SweepDirection::Down],
        noise: Noise::Poisson,
        seed,
    }
}

pub const DETUNING_KAPPA_GHZ: f64 = 160.0;

/// Purcell factor against detection wavelength around a cavity whose
/// linewidth is 160 GHz.
pub fn detuning_spec(seed: u64) -> GeneratorSpec {
    let lc = 618.5;
    let q = frequency_thz(lc) * GHZ_PER_THZ / DETUNING_KAPPA_GHZ;
    GeneratorSpec::new(
        ModelId::DetunedPurcell,
        vec![0.78, lc, q, 1.0],
        linspace(lc - 0.6, lc + 0.6, 61),
        Noise::Gaussian { sigma: 0.04 },
        seed,
    )
}

pub const CTE_ALPHA_PER_K: f64 = 5.1e-6;
/// Length of the body whose expansion moves the cavity.
pub const CTE_REFERENCE_LENGTH_UM: f64 = 500.0;

/// 120 spectra whose resonance moves 10 nm while the temperature rises in
/// proportion.
pub fn drift_spec(seed: u64) -> DriftSpec {
    DriftSpec {
        n_frames: 120,
        frame_period_s: 60.0,
        grid_lo_nm: 600.0,
        grid_hi_nm: 640.0,
        grid_step_nm: 0.02,
        center0_nm: 613.0,
        total_shift_nm: 10.0,
        fwhm_nm: 0.2,
        peak_counts: 1000.0,
        background: 10.0,
        temperature0_k: 293.0,
        temperature_span_k: 0.0,
        noise: Noise::Poisson,
        seed,
    }
    .with_expansion(CTE_ALPHA_PER_K, CTE_REFERENCE_LENGTH_UM)
}

pub const NAMES: [&str; 10] = [
    "g2_antibunching",
    "lifetime_4k",
    "lifetime_40k",
    "lifetime_100k",
    "saturation_10k",
    "saturation_40k",
    "saturation_100k",
    "scan_finesse",
    "detuning",
    "drift_cte",
];

fn named(mut g: Generated, name: &str) -> Generated {
    g.truth.preset = Some(name.to_string());
    g
}

/// Dataset and truth for a named preset.
pub fn by_name(name: &str, seed: u64) -> Result<Generated> {
    if let Some(p) = LIFETIME.iter().find(|p| p.name == name) {
        return Ok(named(generate(&p.spec(seed))?, name));
    }
    if let Some(p) = SATURATION.iter().find(|p| p.name == name) {
        return Ok(named(generate(&p.spec(seed))?, name));
    }
    match name {
        "g2_antibunching" => Ok(named(generate(&g2_spec(seed))?, name)),
        "detuning" => Ok(named(generate(&detuning_spec(seed))?, name)),
        "scan_finesse" => {
            let spec = scan_spec(seed);
            Ok(Generated {
                traces: TraceSet::Scan(generate_scan(&spec)?),
                truth: Truth {
                    model: None,
                    param_names: vec!["fsr_axis".into(), "finesse".into(), "measured_finesse".into()],
                    true_params: vec![spec.fsr_axis, spec.finesse, spec.measured_finesse()],
                    noise: spec.noise,
                    seed,
                    scale: spec.peak_counts,
                    preset: Some(name.into()),
                },
            })
        }
        "drift_cte" => {
            let spec = drift_spec(seed);
            Ok(Generated {
                traces: TraceSet::SpectralMap(generate_drift_map(&spec)?),
                truth: Truth {
                    model: None,
                    param_names: vec!["alpha_per_k".into(), "reference_length_um".into(), "total_shift_nm".into()],
                    true_params: vec![CTE_ALPHA_PER_K, CTE_REFERENCE_LENGTH_UM, spec.total_shift_nm],
                    noise: spec.noise,
                    seed,
                    scale: spec.peak_counts,
                    preset: Some(name.into()),
                },
            })
        }
        _ => Err(Error::Unknown { kind: "preset", name: name.to_string() }),
    }
}
