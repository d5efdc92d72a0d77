use std::path::Path;

use cavkit::dataio::Report;
use cavkit::optics::{dispersion_map, double_resonance_search, RocMode};
use cavkit::synthlab::linspace;
use cavkit::{Mirror, ModeModel};
use clap::{Args, ValueEnum};
use serde_json::json;

use crate::{write_json, write_table, CliError, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RocModeArg {
    Geometric,
    PerAxis,
}

#[derive(Clone, Debug, Args)]
pub struct DispersionArgs {
    /// Mirror radius of curvature, µm.
    #[arg(long, default_value_t = 24.0)]
    pub roc: f64,
    /// Second-axis radius for an elliptical mirror; defaults to --roc.
    #[arg(long)]
    pub roc_y: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub index: f64,
    #[arg(long, default_value_t = 533.3)]
    pub lambda_exc: f64,
    #[arg(long, default_value_t = 618.5)]
    pub lambda_det: f64,
    /// Map length range and sample count, µm.
    #[arg(long, default_value_t = 3.0)]
    pub l_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub l_max: f64,
    #[arg(long, default_value_t = 201)]
    pub l_points: usize,
    #[arg(long, default_value_t = 11)]
    pub m_min: u32,
    #[arg(long, default_value_t = 17)]
    pub m_max: u32,
    #[arg(long, default_value_t = 0)]
    pub max_transverse: u32,
    /// Length window for the double-resonance search, µm.
    #[arg(long, default_value_t = 3.6)]
    pub search_min: f64,
    #[arg(long, default_value_t = 3.9)]
    pub search_max: f64,
    /// Largest accepted resonance-length mismatch, nm.
    #[arg(long, default_value_t = 25.0)]
    pub tolerance_nm: f64,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub gouy: Toggle,
    #[arg(long, value_enum, default_value_t = RocModeArg::Geometric)]
    pub roc_mode: RocModeArg,
}

impl Default for DispersionArgs {
    fn default() -> Self {
        DispersionArgs {
            roc: 24.0,
            roc_y: None,
            index: 1.0,
            lambda_exc: 533.3,
            lambda_det: 618.5,
            l_min: 3.0,
            l_max: 5.0,
            l_points: 201,
            m_min: 11,
            m_max: 17,
            max_transverse: 0,
            search_min: 3.6,
            search_max: 3.9,
            tolerance_nm: 25.0,
            gouy: Toggle::On,
            roc_mode: RocModeArg::Geometric,
        }
    }
}

impl DispersionArgs {
    pub fn model(&self) -> ModeModel {
        ModeModel {
            gouy: self.gouy == Toggle::On,
            roc_mode: match self.roc_mode {
                RocModeArg::Geometric => RocMode::Geometric,
                RocModeArg::PerAxis => RocMode::PerAxis,
            },
        }
    }
}

pub(crate) fn run(a: &DispersionArgs, out: &Path) -> Result<Outcome, CliError> {
    if a.l_points < 2 || !(a.l_max > a.l_min) {
        return Err(CliError::invalid(format!(
            "map needs l_min < l_max and at least 2 points, got [{}, {}] with {}",
            a.l_min, a.l_max, a.l_points
        )));
    }
    if a.m_min > a.m_max {
        return Err(CliError::invalid(format!("m range {}..{} is empty", a.m_min, a.m_max)));
    }
    let mirror = Mirror::new(a.roc, a.roc_y.unwrap_or(a.roc), a.index)?;
    let model = a.model();
    let lengths = linspace(a.l_min, a.l_max, a.l_points);
    let map = dispersion_map(&mirror, &lengths, (a.m_min, a.m_max), a.max_transverse, &model)?;
    let pairs = double_resonance_search(
        a.lambda_exc,
        a.lambda_det,
        &mirror,
        (a.search_min, a.search_max),
        a.tolerance_nm,
        &model,
    )?;

    let csv = out.join("dispersion.csv");
    write_table(
        &csv,
        &["l_eff_um", "wavelength_nm", "mode_m", "transverse_order"],
        map.iter().map(|p| {
            vec![
                p.l_eff_um.to_string(),
                p.wavelength_nm.to_string(),
                p.mode_m.to_string(),
                p.transverse_order.to_string(),
            ]
        }),
    )?;

    let mut report = Report::new();
    report.push_step(
        "dispersion_map",
        json!({
            "mirror": mirror,
            "model": model,
            "l_range_um": [a.l_min, a.l_max],
            "l_points": a.l_points,
            "m_range": [a.m_min, a.m_max],
            "max_transverse": a.max_transverse,
        }),
        json!({ "rows": map.len(), "csv": "dispersion.csv" }),
    );
    report.push_step(
        "double_resonance",
        json!({
            "lambda_exc_nm": a.lambda_exc,
            "lambda_det_nm": a.lambda_det,
            "l_range_um": [a.search_min, a.search_max],
            "tolerance_nm": a.tolerance_nm,
        }),
        json!({ "best": pairs.first(), "pairs": pairs }),
    );
    let js = out.join("dispersion.json");
    write_json(&js, &report)?;

    let summary = match pairs.first() {
        Some(p) => format!(
            "best double resonance: m_exc = {}, m_det = {} at L = {:.4} µm (mismatch {:.2} nm)",
            p.m_exc, p.m_det, p.l_um, p.mismatch_nm
        ),
        None => format!("no double resonance within {} nm", a.tolerance_nm),
    };
    Ok(Outcome { summary, files: vec![csv, js] })
}
