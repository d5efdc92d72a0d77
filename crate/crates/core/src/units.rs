//! Physical constants expressed in the crate's working units.

/// Speed of light as wavelength × frequency, in nm·THz.
pub const C_NM_THZ: f64 = 299_792.458;

/// Nanometres per micrometre.
pub const NM_PER_UM: f64 = 1e3;

/// GHz per THz.
pub const GHZ_PER_THZ: f64 = 1e3;

/// Vacuum frequency in THz of a wavelength given in nm.
pub fn frequency_thz(wavelength_nm: f64) -> f64 {
    C_NM_THZ / wavelength_nm
}

/// Vacuum wavelength in nm of a frequency given in THz.
pub fn wavelength_nm(frequency_thz: f64) -> f64 {
    C_NM_THZ / frequency_thz
}
