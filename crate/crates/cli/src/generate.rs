use std::path::Path;

use cavkit::synthlab::presets;
use clap::Args;

use crate::{CliError, Outcome};

#[derive(Clone, Debug, Args)]
pub struct GenerateArgs {
    /// Dataset name; run with an unknown name to see the list.
    #[arg(long)]
    pub preset: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File stem for the CSV and truth files; defaults to the preset name.
    #[arg(long)]
    pub stem: Option<String>,
}

pub(crate) fn run(a: &GenerateArgs, out: &Path) -> Result<Outcome, CliError> {
    let name = a.preset.trim().replace('-', "_");
    if !presets::NAMES.contains(&name.as_str()) {
        return Err(CliError::invalid(format!(
            "unknown preset `{}`; available: {}",
            a.preset,
            presets::NAMES.join(", ")
        )));
    }
    let g = presets::by_name(&name, a.seed)?;
    let stem = a.stem.as_deref().unwrap_or(&name);
    let (csv, truth) = g.write(out, stem)?;
    let summary = format!("{name} (seed {}): {} record", a.seed, g.traces.schema());
    Ok(Outcome { summary, files: vec![csv, truth] })
}
