use serde::{Deserialize, Serialize};

use super::{resonance_length, CavityGeometry, Mirror, ModeModel};
use crate::error::{Error, Result};
use crate::units::{frequency_thz, C_NM_THZ, GHZ_PER_THZ, NM_PER_UM};

/// Figures of merit of a plano-concave cavity at one wavelength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityFigures {
    pub fsr_thz: f64,
    pub finesse: f64,
    pub kappa_ghz: f64,
    /// `m_det · finesse`.
    pub quality_factor: f64,
    /// `ν / κ`, reported alongside and never substituted for `quality_factor`.
    pub quality_factor_linewidth: f64,
    /// `quality_factor_linewidth / quality_factor`.
    pub quality_factor_ratio: f64,
    pub beam_waist_um: f64,
    pub mirror_spot_um: f64,
    /// `π w₀² L / 4` divided by `λ³`.
    pub mode_volume_lambda3: f64,
    pub mode_volume_um3: f64,
}

impl CavityFigures {
    /// `(w₀ / w_L)²`.
    pub fn spatial_factor(&self) -> f64 {
        (self.beam_waist_um / self.mirror_spot_um).powi(2)
    }
}

pub fn cavity_figures(geom: &CavityGeometry, finesse: f64, m_det: u32, wavelength_nm: f64) -> Result<CavityFigures> {
    geom.validate()?;
    if !(finesse > 0.0) {
        return Err(Error::invalid(format!("finesse {finesse} must be positive")));
    }
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid(format!("wavelength {wavelength_nm} nm must be positive")));
    }
    let l = geom.l_eff_um;
    let roc = geom.scalar_roc();
    let lam_um = wavelength_nm / NM_PER_UM;
    let n = geom.refractive_index;

    let fsr_thz = C_NM_THZ / (2.0 * n * l * NM_PER_UM);
    let kappa_ghz = fsr_thz / finesse * GHZ_PER_THZ;
    let quality_factor = m_det as f64 * finesse;
    let quality_factor_linewidth = frequency_thz(wavelength_nm) * GHZ_PER_THZ / kappa_ghz;

    let waist2 = lam_um / std::f64::consts::PI * (l * (roc - l)).sqrt();
    let spot2 = lam_um / std::f64::consts::PI * roc * (l / (roc - l)).sqrt();
    let mode_volume_um3 = std::f64::consts::PI * waist2 * l / 4.0;

    Ok(CavityFigures {
        fsr_thz,
        finesse,
        kappa_ghz,
        quality_factor,
        quality_factor_linewidth,
        quality_factor_ratio: quality_factor_linewidth / quality_factor,
        beam_waist_um: waist2.sqrt(),
        mirror_spot_um: spot2.sqrt(),
        mode_volume_lambda3: mode_volume_um3 / lam_um.powi(3),
        mode_volume_um3,
    })
}

/// `(w₀ / w_L)²` of the fundamental mode; independent of finesse.
pub fn spatial_factor(geom: &CavityGeometry, wavelength_nm: f64) -> Result<f64> {
    Ok(cavity_figures(geom, 1.0, 1, wavelength_nm)?.spatial_factor())
}

/// Free spectral range expressed in wavelength, `λ² / (2nL)`, in nm.
pub fn fsr_wavelength_nm(wavelength_nm: f64, l_eff_um: f64, refractive_index: f64) -> f64 {
    wavelength_nm * wavelength_nm / (2.0 * refractive_index * l_eff_um * NM_PER_UM)
}

/// Cavity length from two adjacent longitudinal resonances of the same
/// transverse order, `L = λ₁λ₂ / (2(λ₁ - λ₂))` with `λ₁ > λ₂`, in µm.
///
/// Both modes share the same Gouy phase at a given length, so the spacing
/// of inverse wavelengths is exactly `1/(2L)` under the Gaussian-beam model.
pub fn effective_length_from_adjacent_modes(lambda1_nm: f64, lambda2_nm: f64) -> Result<f64> {
    if !(lambda1_nm > 0.0 && lambda2_nm > 0.0) || !lambda1_nm.is_finite() || !lambda2_nm.is_finite() {
        return Err(Error::invalid("wavelengths must be positive and finite"));
    }
    if lambda1_nm <= lambda2_nm {
        return Err(Error::Ordering(format!("need λ1 > λ2 for adjacent modes, got {lambda1_nm} nm ≤ {lambda2_nm} nm")));
    }
    let gap = lambda1_nm - lambda2_nm;
    if gap < 1e-9 * lambda1_nm {
        return Err(Error::Degenerate(format!("mode spacing {gap:e} nm is too small to resolve a cavity length")));
    }
    Ok(lambda1_nm * lambda2_nm / (2.0 * gap) / NM_PER_UM)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    /// Two-mode estimate.
    pub l_two_mode_um: f64,
    /// Longitudinal index of the red mode inferred from the absolute
    /// resonance condition.
    pub m: u32,
    /// Length from the absolute resonance condition of both modes with the
    /// inferred indices (mean of the two).
    pub l_refined_um: f64,
}

/// Two-mode length followed by one refinement pass that fixes the integer
/// mode index and re-solves the full Gouy-phase resonance condition.
pub fn effective_length_refined(
    lambda1_nm: f64,
    lambda2_nm: f64,
    mirror: &Mirror,
    model: &ModeModel,
) -> Result<LengthEstimate> {
    let l0 = effective_length_from_adjacent_modes(lambda1_nm, lambda2_nm)?;
    let geom = mirror.with_length(l0)?;
    let phase = if model.gouy { super::gouy_term(&geom)? } else { 0.0 };
    let m_real = 2.0 * l0 * NM_PER_UM / lambda1_nm - phase;
    let m = m_real.round().max(1.0) as u32;
    let l1 = resonance_length(lambda1_nm, m, mirror, model)?;
    let l2 = resonance_length(lambda2_nm, m + 1, mirror, model)?;
    Ok(LengthEstimate { l_two_mode_um: l0, m, l_refined_um: 0.5 * (l1 + l2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{mode_frequency, mode_frequency_with};

    fn design_geom() -> CavityGeometry {
        CavityGeometry::spherical(24.0, 3.75).unwrap()
    }

    #[test]
    fn summary_table_geometry() {
        let f = cavity_figures(&design_geom(), 4700.0, 12, 618.5).unwrap();
        assert!((f.beam_waist_um - 1.31).abs() < 0.01, "w0 = {}", f.beam_waist_um);
        assert!((f.mode_volume_lambda3 / 21.0 - 1.0).abs() < 0.05, "V = {}", f.mode_volume_lambda3);
        assert_eq!(f.quality_factor, 56400.0);
        assert!(f.mirror_spot_um >= f.beam_waist_um);
    }

    #[test]
    fn kappa_times_finesse_is_fsr() {
        let f = cavity_figures(&design_geom(), 4600.0, 12, 618.5).unwrap();
        assert!((f.kappa_ghz * f.finesse / GHZ_PER_THZ / f.fsr_thz - 1.0).abs() < 1e-12);
        // ν/κ counts half-wavelengths in L rather than the detected order.
        let expected = 2.0 * 3.75 * NM_PER_UM / 618.5 / 12.0;
        assert!((f.quality_factor_ratio - expected).abs() < 1e-9);
        assert!(f.quality_factor_ratio != 1.0);
    }

    #[test]
    fn spatial_factor_closed_form() {
        // (w0/wL)² = 1 - L/R for the plano-concave mode.
        let s = spatial_factor(&design_geom(), 618.5).unwrap();
        assert!((s - (1.0 - 3.75 / 24.0)).abs() < 1e-12);
        assert!((s - 0.846).abs() < 0.01);
        let tiny = spatial_factor(&CavityGeometry::spherical(24.0, 1e-6).unwrap(), 618.5).unwrap();
        assert!((tiny - 1.0).abs() < 1e-6);
    }

    #[test]
    fn two_mode_length_inverts_plane_wave_construction() {
        let l = effective_length_from_adjacent_modes(7400.0 / 12.0, 7400.0 / 13.0).unwrap();
        assert!((l - 3.7).abs() < 1e-3);
        let rounded = effective_length_from_adjacent_modes(616.67, 569.23).unwrap();
        assert!((rounded - 3.7).abs() < 1e-3, "{rounded}");
    }

    #[test]
    fn two_mode_length_errors() {
        assert!(matches!(effective_length_from_adjacent_modes(500.0, 600.0), Err(Error::Ordering(_))));
        assert!(matches!(effective_length_from_adjacent_modes(600.0, 600.0), Err(Error::Ordering(_))));
        let e = effective_length_from_adjacent_modes(600.0 + 1e-10, 600.0);
        assert!(matches!(e, Err(Error::Degenerate(_))), "{e:?}");
    }

    #[test]
    fn two_mode_length_on_gaussian_modes() {
        let geom = CavityGeometry::spherical(24.0, 4.2).unwrap();
        let r12 = mode_frequency(&geom, 12).unwrap().wavelength_nm;
        let r13 = mode_frequency(&geom, 13).unwrap().wavelength_nm;
        let l = effective_length_from_adjacent_modes(r12, r13).unwrap();
        assert!((l / 4.2 - 1.0).abs() < 0.005);
        let est = effective_length_refined(r12, r13, &geom.mirror(), &ModeModel::default()).unwrap();
        assert_eq!(est.m, 12);
        assert!((est.l_refined_um - 4.2).abs() < 1e-9);
    }

    #[test]
    fn refinement_uses_plane_wave_when_gouy_disabled() {
        let geom = CavityGeometry::spherical(24.0, 4.2).unwrap();
        let model = ModeModel::plane_wave();
        let a = mode_frequency_with(&geom, 14, 0, 0, &model).unwrap().wavelength_nm;
        let b = mode_frequency_with(&geom, 15, 0, 0, &model).unwrap().wavelength_nm;
        let est = effective_length_refined(a, b, &geom.mirror(), &model).unwrap();
        assert_eq!(est.m, 14);
        assert!((est.l_refined_um - 4.2).abs() < 1e-9);
    }
}
