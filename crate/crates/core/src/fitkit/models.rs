use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every model the fitting engine knows how to evaluate and differentiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    /// `amplitude / (1 + (2 (x - center) / fwhm)²) + offset`
    Lorentzian,
    /// `amplitude · exp(-(x - center)² / 2σ²) + offset`
    Gaussian,
    /// `slope · x + intercept`
    Linear,
    /// `amplitude · exp(-x / tau) + offset`
    ExponentialDecay,
    /// `1 + c (β e^{-γ₁|t - t₀|} + (β - 1) e^{-γ₂|t - t₀|})`
    G2ThreeLevel,
    /// `i_sat · P / (p_sat + P)`
    Saturation,
    /// `peak / (1 + (2Q (λ/λ_cav - 1))²) + f_fp`
    DetunedPurcell,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        ModelId::Lorentzian,
        ModelId::Gaussian,
        ModelId::Linear,
        ModelId::ExponentialDecay,
        ModelId::G2ThreeLevel,
        ModelId::Saturation,
        ModelId::DetunedPurcell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Lorentzian => "lorentzian",
            ModelId::Gaussian => "gaussian",
            ModelId::Linear => "linear",
            ModelId::ExponentialDecay => "exponential_decay",
            ModelId::G2ThreeLevel => "g2_three_level",
            ModelId::Saturation => "saturation",
            ModelId::DetunedPurcell => "detuned_purcell",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let normalized = name.trim().to_ascii_lowercase().replace('-', "_");
        ModelId::ALL
            .into_iter()
            .find(|m| m.name() == normalized)
            .ok_or_else(|| Error::Unknown { kind: "model", name: name.to_string() })
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::Lorentzian => &["amplitude", "center", "fwhm", "offset"],
            ModelId::Gaussian => &["amplitude", "center", "sigma", "offset"],
            ModelId::Linear => &["slope", "intercept"],
            ModelId::ExponentialDecay => &["amplitude", "tau", "offset"],
            ModelId::G2ThreeLevel => &["c", "beta", "gamma1", "gamma2", "t0"],
            ModelId::Saturation => &["i_sat", "p_sat"],
            ModelId::DetunedPurcell => &["peak", "lambda_cav", "q", "f_fp"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    pub fn eval(self, p: &[f64], x: f64) -> f64 {
        debug_assert_eq!(p.len(), self.n_params());
        match self {
            ModelId::Lorentzian => {
                let u = 2.0 * (x - p[1]) / p[2];
                p[0] / (1.0 + u * u) + p[3]
            }
            ModelId::Gaussian => {
                let z = (x - p[1]) / p[2];
                p[0] * (-0.5 * z * z).exp() + p[3]
            }
            ModelId::Linear => p[0] * x + p[1],
            ModelId::ExponentialDecay => p[0] * (-x / p[1]).exp() + p[2],
            ModelId::G2ThreeLevel => {
                let d = (x - p[4]).abs();
                1.0 + p[0] * (p[1] * (-p[2] * d).exp() + (p[1] - 1.0) * (-p[3] * d).exp())
            }
            ModelId::Saturation => p[0] * x / (p[1] + x),
            ModelId::DetunedPurcell => {
                let u = 2.0 * p[2] * (x / p[1] - 1.0);
                p[0] / (1.0 + u * u) + p[3]
            }
        }
    }

    /// Analytic partial derivatives of the model with respect to each
    /// parameter, written into `out`.
    pub fn gradient(self, p: &[f64], x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_params());
        match self {
            ModelId::Lorentzian => {
                let (a, w) = (p[0], p[2]);
                let dx = x - p[1];
                let u = 2.0 * dx / w;
                let den = 1.0 + u * u;
                out[0] = 1.0 / den;
                out[1] = 4.0 * a * u / (w * den * den);
                out[2] = 2.0 * a * u * u / (w * den * den);
                out[3] = 1.0;
            }
            ModelId::Gaussian => {
                let (a, s) = (p[0], p[2]);
                let z = (x - p[1]) / s;
                let e = (-0.5 * z * z).exp();
                out[0] = e;
                out[1] = a * e * z / s;
                out[2] = a * e * z * z / s;
                out[3] = 1.0;
            }
            ModelId::Linear => {
                out[0] = x;
                out[1] = 1.0;
            }
            ModelId::ExponentialDecay => {
                let (a, tau) = (p[0], p[1]);
                let e = (-x / tau).exp();
                out[0] = e;
                out[1] = a * e * x / (tau * tau);
                out[2] = 1.0;
            }
            ModelId::G2ThreeLevel => {
                let (c, beta, g1, g2) = (p[0], p[1], p[2], p[3]);
                let dt = x - p[4];
                let d = dt.abs();
                let s = if dt > 0.0 {
                    1.0
                } else if dt < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let e1 = (-g1 * d).exp();
                let e2 = (-g2 * d).exp();
                out[0] = beta * e1 + (beta - 1.0) * e2;
                out[1] = c * (e1 + e2);
                out[2] = -c * beta * d * e1;
                out[3] = -c * (beta - 1.0) * d * e2;
                out[4] = c * s * (beta * g1 * e1 + (beta - 1.0) * g2 * e2);
            }
            ModelId::Saturation => {
                let (i_sat, p_sat) = (p[0], p[1]);
                let den = p_sat + x;
                out[0] = x / den;
                out[1] = -i_sat * x / (den * den);
            }
            ModelId::DetunedPurcell => {
                let (peak, lc, q) = (p[0], p[1], p[2]);
                let u = 2.0 * q * (x / lc - 1.0);
                let den = 1.0 + u * u;
                out[0] = 1.0 / den;
                out[1] = 4.0 * peak * q * u * x / (lc * lc * den * den);
                out[2] = -2.0 * peak * u * u / (q * den * den);
                out[3] = 1.0;
            }
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::parse(s)
    }
}

/// Analytic Jacobian `∂f(xᵢ)/∂pⱼ`, one row per abscissa.
pub fn jacobian(model: ModelId, params: &[f64], x: &[f64]) -> DMatrix<f64> {
    let np = model.n_params();
    let mut jac = DMatrix::zeros(x.len(), np);
    let mut row = vec![0.0; np];
    for (i, &xi) in x.iter().enumerate() {
        model.gradient(params, xi, &mut row);
        for (j, &v) in row.iter().enumerate() {
            jac[(i, j)] = v;
        }
    }
    jac
}
