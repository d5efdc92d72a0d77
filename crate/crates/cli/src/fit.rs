use std::path::{Path, PathBuf};

use cavkit::cqed::fit_detuning;
use cavkit::dataio::{digest_bytes, format_g10, read_csv, Report, Schema, XyData};
use cavkit::fitkit::{fit, FitProblem, Weighting};
use cavkit::optics::{drift_series, finesse_from_scan, thermal_expansion_fit, DriftOptions, FinesseOptions};
use cavkit::photophysics::{fit_g2, g2_model, pulsed_lifetime_fit, saturation_model, G2FitOptions};
use cavkit::synthlab::presets::CTE_REFERENCE_LENGTH_UM;
use cavkit::{FitOptions, FitResult, ModelId, TimeHistogram, TraceSet};
use clap::Args;
use serde_json::{json, Map, Value};

use crate::{cell, write_json, write_table, CliError, Outcome};

#[derive(Clone, Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV layout; inferred from the header when omitted.
    #[arg(long)]
    pub schema: Option<String>,
    /// Registered model name, or one of the aliases g2, lifetime, detuning.
    /// Scans and spectral maps run their own pipelines and ignore it.
    #[arg(long)]
    pub model: Option<String>,
    /// Delay window for lifetime fits, ns, as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub window: Option<Vec<f64>>,
    /// Length of the expanding body for the CTE fit, µm.
    #[arg(long, default_value_t = CTE_REFERENCE_LENGTH_UM)]
    pub reference_length_um: f64,
    /// Free spectral range bounding the frame-to-frame jump of a tracked peak, nm.
    #[arg(long, default_value_t = 50.0)]
    pub fsr_nm: f64,
    /// Half-width of the peak-tracking fit window, nm.
    #[arg(long, default_value_t = 0.5)]
    pub track_window_nm: f64,
}

impl FitArgs {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        FitArgs {
            input: input.into(),
            schema: None,
            model: None,
            window: None,
            reference_length_um: CTE_REFERENCE_LENGTH_UM,
            fsr_nm: 50.0,
            track_window_nm: 0.5,
        }
    }
}

pub fn parse_model(name: &str) -> Result<ModelId, CliError> {
    let id = match name.trim().to_ascii_lowercase().as_str() {
        "g2" => ModelId::G2ThreeLevel,
        "lifetime" | "decay" => ModelId::ExponentialDecay,
        "detuning" => ModelId::DetunedPurcell,
        other => ModelId::parse(other)?,
    };
    Ok(id)
}

fn infer_schema(text: &[u8]) -> Result<Schema, CliError> {
    let first = text.split(|&b| b == b'\n').next().unwrap_or_default();
    let header: Vec<String> =
        String::from_utf8_lossy(first).trim().split(',').map(|h| h.trim().to_ascii_lowercase()).collect();
    Schema::ALL.into_iter().find(|s| s.header().iter().copied().eq(header.iter().map(String::as_str))).ok_or_else(
        || CliError::invalid(format!("cannot infer a schema from header {:?}; pass --schema", header.join(","))),
    )
}

/// Plot-ready table: header and rows.
type Table = (Vec<&'static str>, Vec<Vec<String>>);

pub(crate) fn run(a: &FitArgs, out: &Path) -> Result<Outcome, CliError> {
    let bytes =
        std::fs::read(&a.input).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", a.input.display())))?;
    let schema = match &a.schema {
        Some(s) => Schema::parse(s)?,
        None => infer_schema(&bytes)?,
    };
    let traces = read_csv(bytes.as_slice(), schema)?;
    let model = a.model.as_deref().map(parse_model).transpose()?;

    let (pipeline, params, outputs, table) = match (&traces, model) {
        (TraceSet::Histogram(h), Some(ModelId::G2ThreeLevel)) => g2(h)?,
        (TraceSet::Histogram(h), Some(ModelId::ExponentialDecay)) => lifetime(h, a.window.as_deref())?,
        (TraceSet::Histogram(h), Some(m)) => generic(m, h.bin_centers_ns.clone(), h.counts_f64(), None)?,
        (TraceSet::Histogram(_), None) => {
            return Err(CliError::invalid("histogram input needs --model (g2 or exponential_decay, for example)"))
        }
        (TraceSet::Xy(d), Some(ModelId::Saturation)) => saturation(d)?,
        (TraceSet::Xy(d), Some(ModelId::DetunedPurcell)) => detuning(d)?,
        (TraceSet::Xy(d), Some(m)) => generic(m, d.x.clone(), d.y.clone(), Some(&d.sigma))?,
        (TraceSet::Xy(_), None) => return Err(CliError::invalid("xy input needs --model")),
        (TraceSet::Spectrum(s), m) => {
            generic(m.unwrap_or(ModelId::Lorentzian), s.wavelength_nm.clone(), s.counts.clone(), None)?
        }
        (TraceSet::Scan(s), _) => {
            let est = finesse_from_scan(s, &FinesseOptions::default())?;
            let rows = est
                .peaks
                .iter()
                .map(|p| {
                    vec![
                        p.ramp.to_string(),
                        p.direction.as_str().to_string(),
                        p.center.to_string(),
                        p.fwhm.to_string(),
                        p.amplitude.to_string(),
                    ]
                })
                .collect();
            let outputs = json!({
                "finesse": est.finesse,
                "sigma": est.sigma,
                "per_pair": est.per_pair,
                "peaks": est.peaks,
            });
            ("finesse", json!({}), outputs, (vec!["ramp", "direction", "center", "fwhm", "amplitude"], rows))
        }
        (TraceSet::SpectralMap(m), _) => drift(m, a)?,
    };

    let stem = a.input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
    let csv = out.join(format!("{stem}.fit.csv"));
    let js = out.join(format!("{stem}.fit.json"));

    let mut report = Report::new();
    report.add_input_digest(digest_bytes(&bytes));
    let file = a.input.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    report.push_step("load", json!({ "file": file, "schema": schema }), json!({ "kind": schema }));
    let summary = summary_line(pipeline, &outputs);
    report.push_step(pipeline, params, outputs);
    write_json(&js, &report)?;
    write_table(&csv, &table.0, table.1)?;
    Ok(Outcome { summary, files: vec![js, csv] })
}

fn summary_line(pipeline: &str, outputs: &Value) -> String {
    let keys: &[&str] = match pipeline {
        "g2" => &["g2_zero", "g2_zero_sigma"],
        "lifetime" => &["tau_ns", "sigma_ns"],
        "saturation" => &["i_sat", "sigma_i_sat", "p_sat", "sigma_p_sat"],
        "detuning" => &["kappa_ghz", "q"],
        "finesse" => &["finesse", "sigma"],
        "drift" => &["alpha_per_k", "sigma_alpha"],
        _ => &["reduced_chi2"],
    };
    let parts: Vec<String> = keys
        .iter()
        .filter_map(|k| outputs.get(*k).and_then(Value::as_f64).map(|v| format!("{k} = {}", format_g10(v))))
        .collect();
    format!("{pipeline}: {}", parts.join(", "))
}

/// Named parameters, uncertainties and goodness of fit.
fn fit_summary(res: &FitResult) -> Value {
    let names = res.model.param_names();
    let named =
        |v: &[f64]| -> Map<String, Value> { names.iter().zip(v).map(|(n, x)| (n.to_string(), json!(x))).collect() };
    json!({
        "model": res.model,
        "params": named(&res.params),
        "sigma": named(&res.sigma),
        "covariance": res.covariance,
        "chi2": res.chi2,
        "reduced_chi2": res.reduced_chi2,
        "dof": res.dof,
        "iterations": res.iterations,
        "converged": res.converged,
    })
}

type Fitted = (&'static str, Value, Value, Table);

fn g2(h: &TimeHistogram) -> Result<Fitted, CliError> {
    let opts = G2FitOptions::default();
    let f = fit_g2(h, &opts)?;
    let rows = h
        .bin_centers_ns
        .iter()
        .zip(&h.counts)
        .map(|(&t, &c)| {
            let model = g2_model(t, &f.params);
            vec![t.to_string(), c.to_string(), (c as f64 / f.plateau).to_string(), model.to_string()]
        })
        .collect();
    let outputs = json!({
        "g2_zero": f.g2_zero,
        "g2_zero_sigma": f.g2_zero_sigma,
        "params": f.params,
        "sigma": f.sigma,
        "plateau": f.plateau,
        "fit": fit_summary(&f.fit),
    });
    Ok((
        "g2",
        json!({ "model": ModelId::G2ThreeLevel, "options": opts }),
        outputs,
        (vec!["t_ns", "counts", "g2", "model"], rows),
    ))
}

fn lifetime(h: &TimeHistogram, window: Option<&[f64]>) -> Result<Fitted, CliError> {
    let t = &h.bin_centers_ns;
    let half = 0.5 * h.bin_width_ns;
    let window = match window {
        Some(w) => (w[0], w[1]),
        None => (t[0] - half, t[t.len() - 1] + half),
    };
    let f = pulsed_lifetime_fit(h, window)?;
    let t_first = t[f.first_bin];
    let last = f.first_bin + f.n_bins;
    let rows = t
        .iter()
        .zip(&h.counts)
        .enumerate()
        .map(|(i, (&ti, &c))| {
            let model = (f.first_bin..last).contains(&i).then(|| f.amplitude * (-(ti - t_first) / f.tau_ns).exp());
            vec![ti.to_string(), c.to_string(), cell(model)]
        })
        .collect();
    let outputs = json!({
        "tau_ns": f.tau_ns,
        "sigma_ns": f.sigma_ns,
        "amplitude": f.amplitude,
        "first_bin": f.first_bin,
        "n_bins": f.n_bins,
        "fit": fit_summary(&f.fit),
    });
    Ok((
        "lifetime",
        json!({ "model": ModelId::ExponentialDecay, "window_ns": [window.0, window.1] }),
        outputs,
        (vec!["t_ns", "counts", "model"], rows),
    ))
}

fn xy_rows(d: &XyData, model: impl Fn(f64) -> f64) -> Vec<Vec<String>> {
    (0..d.x.len())
        .map(|i| vec![d.x[i].to_string(), d.y[i].to_string(), d.sigma[i].to_string(), model(d.x[i]).to_string()])
        .collect()
}

fn saturation(d: &XyData) -> Result<Fitted, CliError> {
    let f = cavkit::photophysics::fit_saturation(d)?;
    let rows = xy_rows(d, |x| saturation_model(x, &f.params));
    let outputs = json!({
        "i_sat": f.params.i_sat,
        "p_sat": f.params.p_sat,
        "sigma_i_sat": f.sigma_i_sat,
        "sigma_p_sat": f.sigma_p_sat,
        "fit": fit_summary(&f.fit),
    });
    Ok(("saturation", json!({ "model": ModelId::Saturation }), outputs, (vec!["x", "y", "sigma", "model"], rows)))
}

fn detuning(d: &XyData) -> Result<Fitted, CliError> {
    let f = fit_detuning(d)?;
    let rows = xy_rows(d, |x| ModelId::DetunedPurcell.eval(&f.fit.params, x));
    let outputs = json!({
        "peak": f.peak,
        "lambda_cav_nm": f.lambda_cav_nm,
        "q": f.q,
        "sigma_q": f.sigma_q,
        "f_fp": f.f_fp,
        "kappa_ghz": f.kappa_ghz,
        "sigma_kappa_ghz": f.sigma_kappa_ghz,
        "fit": fit_summary(&f.fit),
    });
    Ok(("detuning", json!({ "model": ModelId::DetunedPurcell }), outputs, (vec!["x", "y", "sigma", "model"], rows)))
}

/// Any registered model with its default start and bounds. Points carry
/// their own σ when the data has one, Poisson weights otherwise.
fn generic(model: ModelId, x: Vec<f64>, y: Vec<f64>, sigma: Option<&[f64]>) -> Result<Fitted, CliError> {
    let weighting = if sigma.is_some() { Weighting::Uniform } else { Weighting::Poisson };
    let mut problem = FitProblem::with_defaults(model, x, y, weighting)?;
    if let Some(s) = sigma {
        problem.weights = s.iter().map(|v| 1.0 / v).collect();
    }
    let res = fit(&problem, &FitOptions::default())?;
    if !res.converged {
        return Err(CliError::Numerical(format!("{model} fit did not converge in {} iterations", res.iterations)));
    }
    let rows = problem
        .x
        .iter()
        .zip(&problem.y)
        .zip(&problem.weights)
        .map(|((&x, &y), &w)| {
            vec![x.to_string(), y.to_string(), (1.0 / w).to_string(), model.eval(&res.params, x).to_string()]
        })
        .collect();
    let weighting = if sigma.is_some() { "sigma" } else { "poisson" };
    let mut outputs = fit_summary(&res);
    outputs["data_digest"] = json!(problem.data_digest());
    Ok(("fit", json!({ "model": model, "weighting": weighting }), outputs, (vec!["x", "y", "sigma", "model"], rows)))
}

fn drift(m: &cavkit::SpectralMap, a: &FitArgs) -> Result<Fitted, CliError> {
    let opts = DriftOptions { fsr_nm: a.fsr_nm, window_nm: a.track_window_nm, initial_center_nm: None };
    let pts = drift_series(&m.frames, &opts)?;
    let has_temperature = pts.iter().all(|p| p.temperature_k.is_some());
    let mut outputs = json!({
        "frames": pts.len(),
        "delta_l_end_nm": pts.last().map(|p| p.delta_l_nm),
    });
    if has_temperature {
        let cte = thermal_expansion_fit(&pts, a.reference_length_um)?;
        outputs["alpha_per_k"] = json!(cte.alpha_per_k);
        outputs["sigma_alpha"] = json!(cte.sigma_alpha);
        outputs["slope_nm_per_k"] = json!(cte.slope_nm_per_k);
        outputs["intercept_nm"] = json!(cte.intercept_nm);
        outputs["fit"] = fit_summary(&cte.fit);
    }
    let rows = pts
        .iter()
        .map(|p| {
            vec![
                p.index.to_string(),
                cell(p.time_s),
                cell(p.temperature_k),
                p.center_nm.to_string(),
                p.delta_l_nm.to_string(),
            ]
        })
        .collect();
    Ok((
        "drift",
        json!({ "options": opts, "reference_length_um": a.reference_length_um }),
        outputs,
        (vec!["index", "time_s", "temperature_k", "center_nm", "delta_l_nm"], rows),
    ))
}
