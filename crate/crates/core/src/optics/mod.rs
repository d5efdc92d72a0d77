//! Gaussian-beam Fabry-Perot mode mathematics.
//!
//! A plano-concave cavity of effective length `L` and mirror radius `R`
//! resonates at
//!
//! ```text
//! ν(m, q) = c / (2nL) · (m + (q + 1) · arccos(√(1 - L/R)) / π)
//! ```
//!
//! for longitudinal index `m` and transverse order `q`. Mirror field
//! penetration is folded into `L` and never modelled separately.

mod drift;
mod figures;
mod scan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{C_NM_THZ, NM_PER_UM};

pub use drift::{drift_series, thermal_expansion_fit, DriftOptions, DriftPoint, ThermalExpansion};
pub use figures::{
    cavity_figures, effective_length_from_adjacent_modes, effective_length_refined, fsr_wavelength_nm, spatial_factor,
    CavityFigures, LengthEstimate,
};
pub use scan::{finesse_from_scan, FinesseEstimate, FinesseOptions, ScanPeak};

/// Curved-mirror parameters without a cavity length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mirror {
    pub roc_x_um: f64,
    pub roc_y_um: f64,
    /// Index of the gap medium.
    pub refractive_index: f64,
}

impl Mirror {
    pub fn new(roc_x_um: f64, roc_y_um: f64, refractive_index: f64) -> Result<Self> {
        let m = Mirror { roc_x_um, roc_y_um, refractive_index };
        m.validate()?;
        Ok(m)
    }

    pub fn spherical(roc_um: f64) -> Result<Self> {
        Mirror::new(roc_um, roc_um, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.roc_x_um > 0.0 && self.roc_y_um > 0.0) || !self.roc_x_um.is_finite() || !self.roc_y_um.is_finite() {
            return Err(Error::invalid(format!(
                "radii of curvature must be positive, got ({}, {}) µm",
                self.roc_x_um, self.roc_y_um
            )));
        }
        if !(self.refractive_index >= 1.0) {
            return Err(Error::invalid(format!("refractive index {} < 1", self.refractive_index)));
        }
        Ok(())
    }

    /// Geometric mean of the two radii, used wherever a single ROC is needed.
    pub fn scalar_roc(&self) -> f64 {
        (self.roc_x_um * self.roc_y_um).sqrt()
    }

    pub fn min_roc(&self) -> f64 {
        self.roc_x_um.min(self.roc_y_um)
    }

    pub fn with_length(&self, l_eff_um: f64) -> Result<CavityGeometry> {
        CavityGeometry::new(self.roc_x_um, self.roc_y_um, l_eff_um, self.refractive_index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub roc_x_um: f64,
    pub roc_y_um: f64,
    pub l_eff_um: f64,
    pub refractive_index: f64,
}

impl CavityGeometry {
    pub fn new(roc_x_um: f64, roc_y_um: f64, l_eff_um: f64, refractive_index: f64) -> Result<Self> {
        let g = CavityGeometry { roc_x_um, roc_y_um, l_eff_um, refractive_index };
        g.validate()?;
        Ok(g)
    }

    /// Spherical mirror in vacuum.
    pub fn spherical(roc_um: f64, l_eff_um: f64) -> Result<Self> {
        CavityGeometry::new(roc_um, roc_um, l_eff_um, 1.0)
    }

    pub fn mirror(&self) -> Mirror {
        Mirror { roc_x_um: self.roc_x_um, roc_y_um: self.roc_y_um, refractive_index: self.refractive_index }
    }

    pub fn scalar_roc(&self) -> f64 {
        self.mirror().scalar_roc()
    }

    pub fn validate(&self) -> Result<()> {
        self.mirror().validate()?;
        check_stable(self.l_eff_um, self.mirror().min_roc())
    }
}

fn check_stable(l_um: f64, roc_um: f64) -> Result<()> {
    if l_um > 0.0 && l_um < roc_um && l_um.is_finite() {
        Ok(())
    } else {
        Err(Error::UnstableGeometry { l_eff_um: l_um, roc_um })
    }
}

/// How a single ROC is obtained from an elliptical mirror.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RocMode {
    /// Geometric mean `√(ROC_x · ROC_y)`.
    #[default]
    Geometric,
    /// Separate Gouy phases per axis, Hermite-Gauss `(nx + ½)ζx + (ny + ½)ζy`.
    PerAxis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeModel {
    /// Include the Gouy phase; `false` gives plane-wave resonances.
    pub gouy: bool,
    pub roc_mode: RocMode,
}

impl Default for ModeModel {
    fn default() -> Self {
        ModeModel { gouy: true, roc_mode: RocMode::Geometric }
    }
}

impl ModeModel {
    pub fn plane_wave() -> Self {
        ModeModel { gouy: false, ..Default::default() }
    }

    /// Gouy fraction of a Hermite-Gauss mode `(nx, ny)` at length `l_um`.
    fn phase(&self, mirror: &Mirror, l_um: f64, nx: u32, ny: u32) -> Result<f64> {
        check_stable(l_um, mirror.min_roc())?;
        if !self.gouy {
            return Ok(0.0);
        }
        Ok(match self.roc_mode {
            RocMode::Geometric => (1.0 + (nx + ny) as f64) * gouy_fraction(l_um, mirror.scalar_roc())?,
            RocMode::PerAxis => {
                (nx as f64 + 0.5) * gouy_fraction(l_um, mirror.roc_x_um)?
                    + (ny as f64 + 0.5) * gouy_fraction(l_um, mirror.roc_y_um)?
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResonance {
    pub m: u32,
    /// Wavelength in the gap medium, `c / (n ν)`.
    pub wavelength_nm: f64,
    pub frequency_thz: f64,
    pub transverse_order: u32,
}

/// `arccos(√(1 - L/R)) / π`, in `[0, ½)` over the stability range.
pub fn gouy_fraction(l_um: f64, roc_um: f64) -> Result<f64> {
    check_stable(l_um, roc_um)?;
    Ok((1.0 - l_um / roc_um).sqrt().acos() / std::f64::consts::PI)
}

/// Gouy term of the fundamental mode using the scalar (geometric-mean) ROC.
pub fn gouy_term(geom: &CavityGeometry) -> Result<f64> {
    geom.validate()?;
    gouy_fraction(geom.l_eff_um, geom.scalar_roc())
}

/// Fundamental-mode resonance of longitudinal index `m`.
pub fn mode_frequency(geom: &CavityGeometry, m: u32) -> Result<ModeResonance> {
    mode_frequency_with(geom, m, 0, 0, &ModeModel::default())
}

/// Resonance of the Hermite-Gauss mode `(nx, ny)` with index `m`.
pub fn mode_frequency_with(
    geom: &CavityGeometry,
    m: u32,
    nx: u32,
    ny: u32,
    model: &ModeModel,
) -> Result<ModeResonance> {
    if m < 1 {
        return Err(Error::invalid("longitudinal index must be ≥ 1"));
    }
    geom.validate()?;
    let phase = model.phase(&geom.mirror(), geom.l_eff_um, nx, ny)?;
    let l_nm = geom.l_eff_um * NM_PER_UM;
    let n = geom.refractive_index;
    let frequency_thz = C_NM_THZ / (2.0 * n * l_nm) * (m as f64 + phase);
    Ok(ModeResonance { m, wavelength_nm: C_NM_THZ / (n * frequency_thz), frequency_thz, transverse_order: nx + ny })
}

/// Cavity length (µm) at which fundamental mode `m` resonates with
/// `wavelength_nm`. Returns the shortest such length in the stability range.
pub fn resonance_length(wavelength_nm: f64, m: u32, mirror: &Mirror, model: &ModeModel) -> Result<f64> {
    if m < 1 {
        return Err(Error::invalid("longitudinal index must be ≥ 1"));
    }
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid(format!("wavelength {wavelength_nm} nm must be positive")));
    }
    mirror.validate()?;
    let lam_um = wavelength_nm / NM_PER_UM;
    let roc = mirror.min_roc();
    if !model.gouy {
        let l = m as f64 * lam_um / 2.0;
        check_stable(l, roc)
            .map_err(|_| Error::SearchFailure(format!("plane-wave length {l} µm for m = {m} exceeds ROC {roc} µm")))?;
        return Ok(l);
    }

    let residual = |l: f64| -> f64 {
        let phase = model.phase(mirror, l, 0, 0).unwrap_or(f64::NAN);
        2.0 * l - lam_um * (m as f64 + phase)
    };
    let steps = 4096;
    let lo_edge = roc * 1e-9;
    let hi_edge = roc * (1.0 - 1e-12);
    let h = (hi_edge - lo_edge) / steps as f64;
    let mut a = lo_edge;
    let mut fa = residual(a);
    let mut bracket = None;
    for k in 1..=steps {
        let b = if k == steps { hi_edge } else { lo_edge + k as f64 * h };
        let fb = residual(b);
        if fa.signum() != fb.signum() || fb == 0.0 {
            bracket = Some((a, fa, b));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut a, mut fa, mut b) = bracket.ok_or_else(|| {
        Error::SearchFailure(format!("no resonance for m = {m} at {wavelength_nm} nm with L in (0, {roc}) µm"))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = residual(mid);
        if fm == 0.0 || (b - a) < 1e-15 * roc {
            a = mid;
            b = mid;
            break;
        }
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let l = 0.5 * (a + b);

    let geom = mirror.with_length(l)?;
    let nu = mode_frequency_with(&geom, m, 0, 0, model)?.frequency_thz;
    let target = C_NM_THZ / (mirror.refractive_index * wavelength_nm);
    if (nu - target).abs() * 1e6 >= 1.0 {
        return Err(Error::SearchFailure(format!(
            "resonance for m = {m} converged with {:.3} MHz frequency error",
            (nu - target).abs() * 1e6
        )));
    }
    Ok(l)
}

/// A pair of longitudinal modes simultaneously resonant with the
/// excitation and detection wavelengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleResonance {
    pub m_exc: u32,
    pub m_det: u32,
    pub l_exc_um: f64,
    pub l_det_um: f64,
    /// Midpoint of the two resonance lengths.
    pub l_um: f64,
    /// `|L_exc - L_det|` in nm.
    pub mismatch_nm: f64,
}

/// All `(m_exc, m_det)` pairs whose resonance lengths inside `l_range_um`
/// differ by less than `tolerance_nm`, sorted by mismatch.
pub fn double_resonance_search(
    lambda_exc_nm: f64,
    lambda_det_nm: f64,
    mirror: &Mirror,
    l_range_um: (f64, f64),
    tolerance_nm: f64,
    model: &ModeModel,
) -> Result<Vec<DoubleResonance>> {
    let (lo, hi) = l_range_um;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("length range ({lo}, {hi}) µm is empty")));
    }
    check_stable(hi, mirror.min_roc())?;
    let ladder = |lambda: f64| -> Result<Vec<(u32, f64)>> {
        let m_max = (2.0 * hi * NM_PER_UM / lambda).ceil() as u32 + 1;
        let mut out = Vec::new();
        for m in 1..=m_max {
            match resonance_length(lambda, m, mirror, model) {
                Ok(l) if l >= lo && l <= hi => out.push((m, l)),
                Ok(_) | Err(Error::SearchFailure(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    };
    let exc = ladder(lambda_exc_nm)?;
    let det = ladder(lambda_det_nm)?;
    let mut pairs = Vec::new();
    for &(me, le) in &exc {
        for &(md, ld) in &det {
            let mismatch_nm = (le - ld).abs() * NM_PER_UM;
            if mismatch_nm <= tolerance_nm {
                pairs.push(DoubleResonance {
                    m_exc: me,
                    m_det: md,
                    l_exc_um: le,
                    l_det_um: ld,
                    l_um: 0.5 * (le + ld),
                    mismatch_nm,
                });
            }
        }
    }
    pairs.sort_by(|a, b| a.mismatch_nm.total_cmp(&b.mismatch_nm).then(a.m_exc.cmp(&b.m_exc)));
    Ok(pairs)
}

/// One row of a dispersion map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub l_eff_um: f64,
    pub wavelength_nm: f64,
    pub mode_m: u32,
    pub transverse_order: u32,
}

/// Resonance wavelengths for every length in `lengths_um`, every `m` in
/// `m_range` and every transverse order up to `max_transverse`.
pub fn dispersion_map(
    mirror: &Mirror,
    lengths_um: &[f64],
    m_range: (u32, u32),
    max_transverse: u32,
    model: &ModeModel,
) -> Result<Vec<DispersionPoint>> {
    let mut out = Vec::new();
    for &l in lengths_um {
        let geom = mirror.with_length(l)?;
        for m in m_range.0.max(1)..=m_range.1 {
            for q in 0..=max_transverse {
                let axes: Vec<(u32, u32)> = match model.roc_mode {
                    RocMode::Geometric => vec![(q, 0)],
                    RocMode::PerAxis => (0..=q).map(|nx| (nx, q - nx)).collect(),
                };
                for (nx, ny) in axes {
                    let r = mode_frequency_with(&geom, m, nx, ny, model)?;
                    out.push(DispersionPoint {
                        l_eff_um: l,
                        wavelength_nm: r.wavelength_nm,
                        mode_m: m,
                        transverse_order: q,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
