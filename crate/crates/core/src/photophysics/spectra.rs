use serde::{Deserialize, Serialize};

use crate::dataio::Spectrum;
use crate::error::{Error, Result};
use crate::units::{C_NM_THZ, GHZ_PER_THZ};

/// Ground-state splitting from the two zero-phonon lines, in GHz.
pub fn gs_splitting(zpl_c_nm: f64, zpl_d_nm: f64) -> Result<f64> {
    if !(zpl_c_nm > 0.0) || !zpl_d_nm.is_finite() {
        return Err(Error::invalid("zero-phonon wavelengths must be positive"));
    }
    if zpl_d_nm < zpl_c_nm {
        return Err(Error::Ordering(format!("D line {zpl_d_nm} nm is blue of the C line {zpl_c_nm} nm")));
    }
    Ok(C_NM_THZ * (1.0 / zpl_c_nm - 1.0 / zpl_d_nm) * GHZ_PER_THZ)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebyeWallerOptions {
    pub zpl_window_nm: (f64, f64),
    pub psb_window_nm: (f64, f64),
    /// Region whose mean level is subtracted as a constant background.
    pub background_window_nm: Option<(f64, f64)>,
}

/// Fraction of the background-corrected emission that falls inside the
/// zero-phonon window.
pub fn debye_waller_estimate(spectrum: &Spectrum, opts: &DebyeWallerOptions) -> Result<f64> {
    spectrum.validate()?;
    let (z, p) = (opts.zpl_window_nm, opts.psb_window_nm);
    for (name, w) in [("zpl", z), ("psb", p)] {
        check_window(spectrum, name, w)?;
    }
    if z.0 < p.1 && p.0 < z.1 {
        return Err(Error::invalid("zero-phonon and sideband windows overlap"));
    }
    let background = match opts.background_window_nm {
        Some(w) => {
            check_window(spectrum, "background", w)?;
            let r = spectrum.window(w.0, w.1);
            if r.is_empty() {
                return Err(Error::InsufficientData("background window contains no samples".into()));
            }
            spectrum.counts[r.clone()].iter().sum::<f64>() / r.len() as f64
        }
        None => 0.0,
    };
    let zpl = integrate(spectrum, z, background);
    let psb = integrate(spectrum, p, background);
    let total = zpl + psb;
    if !(total > 0.0) {
        return Err(Error::NonPhysical(format!("total emission {total} after background subtraction is not positive")));
    }
    Ok(zpl / total)
}

fn check_window(s: &Spectrum, name: &str, w: (f64, f64)) -> Result<()> {
    let lo = s.wavelength_nm.first().copied().unwrap_or(f64::NAN);
    let hi = s.wavelength_nm.last().copied().unwrap_or(f64::NAN);
    if !(w.0 < w.1) || w.0 < lo || w.1 > hi {
        return Err(Error::invalid(format!("{name} window [{}, {}] nm outside the spectrum [{lo}, {hi}]", w.0, w.1)));
    }
    Ok(())
}

/// Trapezoidal integral of `counts - background` over the samples inside
/// `w`.
fn integrate(s: &Spectrum, w: (f64, f64), background: f64) -> f64 {
    let r = s.window(w.0, w.1);
    let x = &s.wavelength_nm[r.clone()];
    let y = &s.counts[r];
    if x.len() == 1 {
        return y[0] - background;
    }
    x.windows(2).zip(y.windows(2)).map(|(xx, yy)| 0.5 * (yy[0] + yy[1] - 2.0 * background) * (xx[1] - xx[0])).sum()
}
