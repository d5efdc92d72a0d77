//! Purcell-enhancement budget and coupling-regime classification.

mod budget;
#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

use crate::dataio::XyData;
use crate::error::{Error, Result};
use crate::fitkit::{fit, FitOptions, FitProblem, FitResult, ModelId, Weighting};
use crate::optics::{spatial_factor, CavityGeometry};
use crate::units::{frequency_thz, GHZ_PER_THZ};

pub use budget::{budget_report, BudgetInputs, BudgetStep, PurcellBudget};

/// `|κ - γ| / max(κ, γ)` at or below this is reported as the boundary
/// between the bad-emitter and bad-cavity regimes.
pub const BOUNDARY_BAND: f64 = 0.1;

/// Emitter-cavity rates, all in GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRates {
    pub g: f64,
    pub kappa: f64,
    pub gamma0: f64,
    pub gamma_star: f64,
}

impl CouplingRates {
    pub fn new(g: f64, kappa: f64, gamma0: f64, gamma_star: f64) -> Result<Self> {
        let r = CouplingRates { g, kappa, gamma0, gamma_star };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("g", self.g), ("kappa", self.kappa), ("gamma0", self.gamma0), ("gamma_star", self.gamma_star)]
        {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("rate {name} = {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    /// Total emitter linewidth `γ₀ + γ*`.
    pub fn gamma(&self) -> f64 {
        self.gamma0 + self.gamma_star
    }

    pub fn scaled(&self, k: f64) -> Self {
        CouplingRates { g: self.g * k, kappa: self.kappa * k, gamma0: self.gamma0 * k, gamma_star: self.gamma_star * k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Strong,
    BadEmitter,
    BadCavity,
    Boundary,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Strong => "strong",
            Regime::BadEmitter => "bad_emitter",
            Regime::BadCavity => "bad_cavity",
            Regime::Boundary => "boundary",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lifetime-shortening Purcell factor `τ₀ / τ_p`. Values below one
/// (inhibition) are returned unchanged.
pub fn purcell_measured(tau0_ns: f64, taup_ns: f64) -> Result<f64> {
    if !(tau0_ns > 0.0 && taup_ns > 0.0) {
        return Err(Error::invalid(format!("lifetimes ({tau0_ns}, {taup_ns}) ns must be positive")));
    }
    Ok(tau0_ns / taup_ns)
}

/// `(3 / 4π²) · (λ/n)³ · Q / V`, with the mode volume given in units of
/// `λ³`, so the wavelength cancels.
pub fn purcell_theoretical(wavelength_nm: f64, refractive_index: f64, q: f64, mode_volume_lambda3: f64) -> Result<f64> {
    for (name, v) in [
        ("wavelength", wavelength_nm),
        ("refractive index", refractive_index),
        ("quality factor", q),
        ("mode volume", mode_volume_lambda3),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} = {v} must be positive")));
        }
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(3.0 / (4.0 * pi2) * q / (refractive_index.powi(3) * mode_volume_lambda3))
}

/// Reduction of the coupling for an emitter on the flat mirror,
/// `(w₀ / w_L)²`.
pub fn spatial_correction(geom: &CavityGeometry, wavelength_nm: f64) -> Result<f64> {
    spatial_factor(geom, wavelength_nm)
}

/// Lorentzian dependence of the enhancement on cavity detuning,
/// `f_cav · align² / (1 + (2Q(λ/λ_cav - 1))²) + f_fp`.
pub fn detuned_purcell(wavelength_nm: f64, lambda_cav_nm: f64, q: f64, f_cav: f64, align2: f64, f_fp: f64) -> f64 {
    let x = 2.0 * q * (wavelength_nm / lambda_cav_nm - 1.0);
    f_cav * align2 / (1.0 + x * x) + f_fp
}

/// Product of the quantum efficiency, Debye-Waller factor and, when given,
/// the branching ratio.
pub fn epsilon_correction(quantum_efficiency: f64, debye_waller: f64, branching: Option<f64>) -> Result<f64> {
    let b = branching.unwrap_or(1.0);
    for (name, v) in
        [("quantum efficiency", quantum_efficiency), ("Debye-Waller factor", debye_waller), ("branching", b)]
    {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(format!("{name} = {v} must lie in (0, 1]")));
        }
    }
    Ok(quantum_efficiency * debye_waller * b)
}

pub fn regime_classify(r: &CouplingRates) -> Regime {
    let gamma = r.gamma();
    if r.g > r.kappa && r.g > gamma {
        return Regime::Strong;
    }
    let top = r.kappa.max(gamma);
    if top == 0.0 || (r.kappa - gamma).abs() / top <= BOUNDARY_BAND {
        Regime::Boundary
    } else if gamma > r.kappa {
        Regime::BadEmitter
    } else {
        Regime::BadCavity
    }
}

/// `4g² / (κ + γ₀) · κ / γ*`; only meaningful when dephasing dominates.
pub fn bad_emitter_purcell(r: &CouplingRates) -> Result<f64> {
    r.validate()?;
    if !(r.gamma_star > 0.0) {
        return Err(Error::invalid("bad-emitter approximation needs a positive dephasing rate γ*"));
    }
    if !(r.kappa + r.gamma0 > 0.0) {
        return Err(Error::invalid("κ + γ₀ must be positive"));
    }
    Ok(4.0 * r.g * r.g / (r.kappa + r.gamma0) * r.kappa / r.gamma_star)
}

/// Lorentzian fit of Purcell factor against wavelength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningFit {
    /// `f_cav · align²`.
    pub peak: f64,
    pub lambda_cav_nm: f64,
    pub q: f64,
    pub sigma_q: f64,
    pub f_fp: f64,
    /// `ν / Q`.
    pub kappa_ghz: f64,
    pub sigma_kappa_ghz: f64,
    pub fit: FitResult,
}

pub fn fit_detuning(data: &XyData) -> Result<DetuningFit> {
    data.validate()?;
    let mut problem =
        FitProblem::with_defaults(ModelId::DetunedPurcell, data.x.clone(), data.y.clone(), Weighting::Uniform)?;
    problem.weights = data.sigma.iter().map(|s| 1.0 / s).collect();
    let res = fit(&problem, &FitOptions::default())?;
    if !res.converged {
        return Err(Error::FitQuality("detuning fit did not converge".into()));
    }
    let (lambda_cav_nm, q) = (res.params[1], res.params[2]);
    let nu_ghz = frequency_thz(lambda_cav_nm) * GHZ_PER_THZ;
    Ok(DetuningFit {
        peak: res.params[0],
        lambda_cav_nm,
        q,
        sigma_q: res.sigma[2],
        f_fp: res.params[3],
        kappa_ghz: nu_ghz / q,
        sigma_kappa_ghz: nu_ghz / (q * q) * res.sigma[2],
        fit: res,
    })
}
