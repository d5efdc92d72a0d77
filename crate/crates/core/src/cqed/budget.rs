use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{epsilon_correction, purcell_measured, purcell_theoretical};
use crate::dataio::Report;
use crate::error::{Error, Result};
use crate::optics::{cavity_figures, CavityGeometry};
use crate::units::{frequency_thz, GHZ_PER_THZ};

/// Everything needed to go from measured lifetimes to the dipole alignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetInputs {
    pub tau0_ns: f64,
    pub taup_ns: f64,
    pub quantum_efficiency: f64,
    pub debye_waller: f64,
    /// `None` leaves the branching ratio out of ε.
    pub branching: Option<f64>,
    pub wavelength_nm: f64,
    /// Index entering the Purcell formula.
    pub refractive_index: f64,
    pub geometry: CavityGeometry,
    pub finesse: f64,
    pub m_det: u32,
    /// Measured (vibration-broadened) cavity linewidth.
    pub kappa_exp_ghz: f64,
    /// Overrides the Gaussian-mode volume computed from the geometry.
    pub mode_volume_lambda3: Option<f64>,
    /// Overrides `(w₀/w_L)²` computed from the geometry.
    pub spatial_factor: Option<f64>,
    /// Background (free-space) enhancement term; zero unless fitted.
    pub f_fp: f64,
}

impl BudgetInputs {
    /// C transition at 4 K in the 3.75 µm cavity, with the tabulated
    /// 21 λ³ mode volume.
    pub fn transition_c() -> Self {
        BudgetInputs {
            tau0_ns: 21.7,
            taup_ns: 12.2,
            quantum_efficiency: 0.8,
            debye_waller: 0.56,
            branching: Some(0.8),
            wavelength_nm: 618.5,
            refractive_index: 1.0,
            geometry: CavityGeometry { roc_x_um: 24.0, roc_y_um: 24.0, l_eff_um: 3.75, refractive_index: 1.0 },
            finesse: 4700.0,
            m_det: 12,
            kappa_exp_ghz: 160.0,
            mode_volume_lambda3: Some(21.0),
            spatial_factor: None,
            f_fp: 0.0,
        }
    }

    /// D transition: no branching correction, 120 GHz measured linewidth.
    pub fn transition_d() -> Self {
        BudgetInputs {
            taup_ns: 13.1,
            branching: None,
            wavelength_nm: 620.22,
            kappa_exp_ghz: 120.0,
            ..BudgetInputs::transition_c()
        }
    }
}

/// One link of the budget chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetStep {
    pub name: String,
    pub value: f64,
    pub formula_ref: String,
    pub inputs: Map<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurcellBudget {
    pub f_cav_ideal: f64,
    pub spatial_factor: f64,
    pub f_cav_corrected: f64,
    /// `m_det · finesse`.
    pub q_ideal: f64,
    /// `ν / κ_exp`, used for the vibration-limited factor.
    pub q_used: f64,
    pub mode_volume_lambda3: f64,
    pub f_vib: f64,
    pub f_measured: f64,
    pub epsilon: f64,
    pub f_zpl: f64,
    /// `f_zpl / f_vib`.
    pub alignment: f64,
    /// `√alignment`, the projection of the dipole on the cavity field.
    pub alignment_projection: f64,
    pub f_fp: f64,
    /// Conditions worth a reader's attention, such as lifetime lengthening.
    pub flags: Vec<String>,
    pub steps: Vec<BudgetStep>,
}

struct Chain {
    steps: Vec<BudgetStep>,
}

impl Chain {
    fn push(&mut self, name: &str, value: f64, formula: &str, inputs: Value) -> Result<f64> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Report {
                step: name.into(),
                message: format!("value {value} must be finite and positive"),
            });
        }
        let inputs = match inputs {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        self.steps.push(BudgetStep { name: name.into(), value, formula_ref: formula.into(), inputs });
        Ok(value)
    }
}

fn step_err(step: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Report { step: step.into(), message: e.to_string() }
}

pub fn budget_report(inp: &BudgetInputs) -> Result<PurcellBudget> {
    let mut c = Chain { steps: Vec::new() };
    let mut flags = Vec::new();

    let f_measured = purcell_measured(inp.tau0_ns, inp.taup_ns).map_err(step_err("f_measured"))?;
    c.push("f_measured", f_measured, "tau0 / tau_p", json!({"tau0_ns": inp.tau0_ns, "taup_ns": inp.taup_ns}))?;
    if f_measured < 1.0 {
        flags.push(format!("cavity lengthens the lifetime (f_measured = {f_measured:.4})"));
    }

    let epsilon =
        epsilon_correction(inp.quantum_efficiency, inp.debye_waller, inp.branching).map_err(step_err("epsilon"))?;
    c.push(
        "epsilon",
        epsilon,
        "quantum_efficiency * debye_waller * branching",
        json!({"quantum_efficiency": inp.quantum_efficiency, "debye_waller": inp.debye_waller, "branching": inp.branching}),
    )?;
    let f_zpl = c.push(
        "f_zpl",
        f_measured / epsilon,
        "f_measured / epsilon",
        json!({"f_measured": f_measured, "epsilon": epsilon}),
    )?;

    let fig =
        cavity_figures(&inp.geometry, inp.finesse, inp.m_det, inp.wavelength_nm).map_err(step_err("cavity_figures"))?;
    let volume = inp.mode_volume_lambda3.unwrap_or(fig.mode_volume_lambda3);
    c.push(
        "mode_volume_lambda3",
        volume,
        if inp.mode_volume_lambda3.is_some() { "given" } else { "pi * w0^2 * L / 4 / lambda^3" },
        json!({"w0_um": fig.beam_waist_um, "l_eff_um": inp.geometry.l_eff_um, "wavelength_nm": inp.wavelength_nm}),
    )?;
    let spatial = inp.spatial_factor.unwrap_or(fig.spatial_factor());
    c.push(
        "spatial_factor",
        spatial,
        if inp.spatial_factor.is_some() { "given" } else { "(w0 / w_L)^2" },
        json!({"w0_um": fig.beam_waist_um, "w_l_um": fig.mirror_spot_um}),
    )?;
    if spatial > 1.0 {
        return Err(Error::Report { step: "spatial_factor".into(), message: format!("{spatial} exceeds one") });
    }

    let q_ideal =
        c.push("q_ideal", fig.quality_factor, "m_det * finesse", json!({"m_det": inp.m_det, "finesse": inp.finesse}))?;
    let theory = |q: f64, step: &'static str| {
        purcell_theoretical(inp.wavelength_nm, inp.refractive_index, q, volume).map_err(step_err(step))
    };
    let f_cav_ideal = theory(q_ideal, "f_cav_ideal")?;
    c.push(
        "f_cav_ideal",
        f_cav_ideal,
        "3 / (4 pi^2) * (lambda / n)^3 * Q / V",
        json!({"q": q_ideal, "mode_volume_lambda3": volume, "refractive_index": inp.refractive_index}),
    )?;
    let f_cav_corrected = c.push(
        "f_cav_corrected",
        f_cav_ideal * spatial,
        "f_cav_ideal * spatial_factor",
        json!({"f_cav_ideal": f_cav_ideal, "spatial_factor": spatial}),
    )?;

    if !(inp.kappa_exp_ghz > 0.0) {
        return Err(Error::Report { step: "q_used".into(), message: "measured linewidth must be positive".into() });
    }
    let nu_ghz = frequency_thz(inp.wavelength_nm) * GHZ_PER_THZ;
    let q_used = c.push(
        "q_used",
        nu_ghz / inp.kappa_exp_ghz,
        "nu / kappa_exp",
        json!({"nu_ghz": nu_ghz, "kappa_exp_ghz": inp.kappa_exp_ghz}),
    )?;
    let f_vib = c.push(
        "f_vib",
        theory(q_used, "f_vib")? * spatial,
        "3 / (4 pi^2) * (lambda / n)^3 * Q_used / V * spatial_factor",
        json!({"q_used": q_used, "mode_volume_lambda3": volume, "spatial_factor": spatial}),
    )?;
    let alignment = c.push("alignment", f_zpl / f_vib, "f_zpl / f_vib", json!({"f_zpl": f_zpl, "f_vib": f_vib}))?;
    if alignment > 1.0 {
        flags.push(format!("alignment {alignment:.4} exceeds one"));
    }
    let alignment_projection =
        c.push("alignment_projection", alignment.sqrt(), "sqrt(alignment)", json!({"alignment": alignment}))?;
    if !(inp.f_fp >= 0.0) {
        return Err(Error::Report {
            step: "f_fp".into(),
            message: format!("background term {} is negative", inp.f_fp),
        });
    }

    Ok(PurcellBudget {
        f_cav_ideal,
        spatial_factor: spatial,
        f_cav_corrected,
        q_ideal,
        q_used,
        mode_volume_lambda3: volume,
        f_vib,
        f_measured,
        epsilon,
        f_zpl,
        alignment,
        alignment_projection,
        f_fp: inp.f_fp,
        flags,
        steps: c.steps,
    })
}

impl PurcellBudget {
    /// Shared report document: one entry per chain step followed by a
    /// summary step whose outputs hold every budget field.
    pub fn to_report(&self, inputs: &BudgetInputs) -> Result<Report> {
        let mut report = Report::new();
        report.add_input(serde_json::to_string(inputs)?.as_bytes());
        for s in &self.steps {
            report.push_raw(serde_json::to_value(s)?);
        }
        let mut outputs = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut outputs {
            m.remove("steps");
        }
        report.push_step("summary", serde_json::to_value(inputs)?, outputs);
        Ok(report)
    }

    /// Checks the structural identities of the budget.
    pub fn check_invariants(&self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        let checks = [
            ("f_cav_corrected", close(self.f_cav_corrected, self.f_cav_ideal * self.spatial_factor)),
            ("f_zpl", close(self.f_zpl, self.f_measured / self.epsilon)),
            ("alignment", close(self.alignment, self.f_zpl / self.f_vib)),
        ];
        for (step, ok) in checks {
            if !ok {
                return Err(Error::Report { step: step.into(), message: "identity violated".into() });
            }
        }
        for (step, v) in [
            ("f_cav_ideal", self.f_cav_ideal),
            ("spatial_factor", self.spatial_factor),
            ("q_used", self.q_used),
            ("f_vib", self.f_vib),
            ("f_measured", self.f_measured),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0) {
                return Err(Error::Report { step: step.into(), message: format!("{v} is not positive") });
            }
        }
        Ok(())
    }
}
