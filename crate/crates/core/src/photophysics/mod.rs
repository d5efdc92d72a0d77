//! Emitter-side models: three-level g²(t), saturation, lifetime decay and
//! level-structure bookkeeping.

mod g2;
mod lifetime;
mod spectra;

use serde::{Deserialize, Serialize};

use crate::dataio::XyData;
use crate::error::{Error, Result};
use crate::fitkit::{fit, FitOptions, FitProblem, FitResult, ModelId};

pub use g2::{fit_g2, g2_model, G2Fit, G2FitOptions, G2Params};
pub use lifetime::{decay_rate_extrapolation, pulsed_lifetime_fit, DecayExtrapolation, LifetimeFit, RatePoint};
pub use spectra::{debye_waller_estimate, gs_splitting, DebyeWallerOptions};

/// Optical properties of a two-transition colour centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterSpec {
    pub zpl_c_nm: f64,
    pub zpl_d_nm: f64,
    pub linewidth_c_ghz: f64,
    pub linewidth_d_ghz: f64,
    pub free_space_lifetime_ns: f64,
    pub quantum_efficiency: f64,
    pub debye_waller: f64,
    pub branching_c: f64,
}

impl EmitterSpec {
    /// Tin-vacancy centre in a nanodiamond as characterised at 4 K and 100 K.
    pub fn tin_vacancy() -> Self {
        EmitterSpec {
            zpl_c_nm: 618.54,
            zpl_d_nm: 620.22,
            linewidth_c_ghz: 210.0,
            linewidth_d_ghz: 410.0,
            free_space_lifetime_ns: 21.7,
            quantum_efficiency: 0.8,
            debye_waller: 0.56,
            branching_c: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("quantum_efficiency", self.quantum_efficiency),
            ("debye_waller", self.debye_waller),
            ("branching_c", self.branching_c),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        if !(self.free_space_lifetime_ns > 0.0) {
            return Err(Error::invalid("free-space lifetime must be positive"));
        }
        if !(self.linewidth_c_ghz >= 0.0 && self.linewidth_d_ghz >= 0.0) {
            return Err(Error::invalid("linewidths must be non-negative"));
        }
        if !(self.zpl_c_nm > 0.0 && self.zpl_d_nm > self.zpl_c_nm) {
            return Err(Error::Ordering(format!(
                "D line ({} nm) must be red of the C line ({} nm)",
                self.zpl_d_nm, self.zpl_c_nm
            )));
        }
        Ok(())
    }

    pub fn gs_splitting_ghz(&self) -> Result<f64> {
        gs_splitting(self.zpl_c_nm, self.zpl_d_nm)
    }
}

/// Saturation curve `I = I_sat · P / (P_sat + P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationParams {
    /// kC/s.
    pub i_sat: f64,
    /// mW.
    pub p_sat: f64,
}

impl SaturationParams {
    pub fn new(i_sat: f64, p_sat: f64) -> Result<Self> {
        if !(i_sat > 0.0 && p_sat > 0.0) || !i_sat.is_finite() || !p_sat.is_finite() {
            return Err(Error::invalid(format!("saturation parameters ({i_sat}, {p_sat}) must be positive")));
        }
        Ok(SaturationParams { i_sat, p_sat })
    }
}

pub fn saturation_model(power_mw: f64, p: &SaturationParams) -> f64 {
    p.i_sat * power_mw / (p.p_sat + power_mw)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    pub params: SaturationParams,
    pub sigma_i_sat: f64,
    pub sigma_p_sat: f64,
    pub fit: FitResult,
}

/// Weighted fit of count rate (kC/s) against power (mW) using the
/// per-point uncertainties carried by the data.
pub fn fit_saturation(data: &XyData) -> Result<SaturationFit> {
    data.validate()?;
    let mut problem = FitProblem::with_defaults(
        ModelId::Saturation,
        data.x.clone(),
        data.y.clone(),
        crate::fitkit::Weighting::Uniform,
    )?;
    problem.weights = data.sigma.iter().map(|s| 1.0 / s).collect();
    let res = fit(&problem, &FitOptions::default())?;
    if !res.converged {
        return Err(Error::FitQuality("saturation fit did not converge".into()));
    }
    let params = SaturationParams::new(res.params[0], res.params[1])
        .map_err(|_| Error::NonPhysical(format!("fitted saturation parameters {:?}", res.params)))?;
    Ok(SaturationFit { params, sigma_i_sat: res.sigma[0], sigma_p_sat: res.sigma[1], fit: res })
}
