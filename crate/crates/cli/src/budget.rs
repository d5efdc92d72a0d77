use std::path::{Path, PathBuf};

use cavkit::cqed::{budget_report, BudgetInputs};
use clap::{Args, ValueEnum};

use crate::{write_json, CliError, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransitionPreset {
    TransitionC,
    TransitionD,
}

impl TransitionPreset {
    pub fn inputs(self) -> BudgetInputs {
        match self {
            TransitionPreset::TransitionC => BudgetInputs::transition_c(),
            TransitionPreset::TransitionD => BudgetInputs::transition_d(),
        }
    }
}

/// Starting inputs come from `--input` (a JSON object with every budget
/// field) or from `--preset`; individual flags override single fields.
#[derive(Clone, Debug, Default, Args)]
pub struct BudgetArgs {
    #[arg(long, value_enum)]
    pub preset: Option<TransitionPreset>,
    #[arg(long, conflicts_with = "preset")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub tau0_ns: Option<f64>,
    #[arg(long)]
    pub taup_ns: Option<f64>,
    #[arg(long)]
    pub quantum_efficiency: Option<f64>,
    #[arg(long)]
    pub debye_waller: Option<f64>,
    #[arg(long)]
    pub branching: Option<f64>,
    /// Leave the branching ratio out of ε.
    #[arg(long, conflicts_with = "branching")]
    pub no_branching: bool,
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
    #[arg(long)]
    pub refractive_index: Option<f64>,
    #[arg(long)]
    pub roc_um: Option<f64>,
    #[arg(long)]
    pub l_eff_um: Option<f64>,
    #[arg(long)]
    pub finesse: Option<f64>,
    #[arg(long)]
    pub m_det: Option<u32>,
    #[arg(long)]
    pub kappa_ghz: Option<f64>,
    /// Mode volume in λ³.
    #[arg(long)]
    pub mode_volume: Option<f64>,
    /// Use the Gaussian-mode volume computed from the geometry.
    #[arg(long, conflicts_with = "mode_volume")]
    pub computed_volume: bool,
    #[arg(long)]
    pub spatial_factor: Option<f64>,
    #[arg(long)]
    pub f_fp: Option<f64>,
    /// Report file name inside the output directory.
    #[arg(long, default_value = "purcell_budget.json")]
    pub report_name: String,
}

impl BudgetArgs {
    pub fn resolve(&self) -> Result<BudgetInputs, CliError> {
        let mut inp = match &self.input {
            Some(path) => {
                let bytes = std::fs::read(path)
                    .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::invalid(format!("{} is not a budget input document: {e}", path.display())))?
            }
            None => self.preset.unwrap_or(TransitionPreset::TransitionC).inputs(),
        };
        let set = |field: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut inp.tau0_ns, self.tau0_ns);
        set(&mut inp.taup_ns, self.taup_ns);
        set(&mut inp.quantum_efficiency, self.quantum_efficiency);
        set(&mut inp.debye_waller, self.debye_waller);
        set(&mut inp.wavelength_nm, self.wavelength_nm);
        set(&mut inp.refractive_index, self.refractive_index);
        set(&mut inp.finesse, self.finesse);
        set(&mut inp.kappa_exp_ghz, self.kappa_ghz);
        set(&mut inp.f_fp, self.f_fp);
        set(&mut inp.geometry.l_eff_um, self.l_eff_um);
        if let Some(r) = self.roc_um {
            inp.geometry.roc_x_um = r;
            inp.geometry.roc_y_um = r;
        }
        if self.branching.is_some() {
            inp.branching = self.branching;
        }
        if self.no_branching {
            inp.branching = None;
        }
        if let Some(m) = self.m_det {
            inp.m_det = m;
        }
        if self.mode_volume.is_some() {
            inp.mode_volume_lambda3 = self.mode_volume;
        }
        if self.computed_volume {
            inp.mode_volume_lambda3 = None;
        }
        if self.spatial_factor.is_some() {
            inp.spatial_factor = self.spatial_factor;
        }
        Ok(inp)
    }
}

pub(crate) fn run(a: &BudgetArgs, out: &Path) -> Result<Outcome, CliError> {
    let inputs = a.resolve()?;
    inputs.geometry.validate()?;
    let budget = budget_report(&inputs)?;
    let path = out.join(&a.report_name);
    write_json(&path, &budget.to_report(&inputs)?)?;
    let summary = format!(
        "F_p = {:.4}, F_zpl = {:.4}, Q = {:.0}, F_vib = {:.3}, alignment = {:.3}",
        budget.f_measured, budget.f_zpl, budget.q_used, budget.f_vib, budget.alignment
    );
    Ok(Outcome { summary, files: vec![path] })
}
