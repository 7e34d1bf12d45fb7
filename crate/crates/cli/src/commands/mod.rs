pub mod analyze;
pub mod codebook;
pub mod replay;
pub mod reproduce;
pub mod simulate;
pub mod theory;

use std::fs;
use std::path::{Path, PathBuf};

use pilotgain::codebooks::read_codebook;
use pilotgain::PilotCodebook;

use crate::error::{CliError, CliResult};
use crate::manifest::{Inputs, Manifest};
use crate::spec::ExperimentSpec;

/// Empty for `None`, shortest round-trip form otherwise.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn load_codebook(inputs: &mut Inputs, path: &str) -> CliResult<PilotCodebook> {
    let text = inputs.read(path)?;
    read_codebook(&text).map_err(|e| CliError::runtime(format!("{path}: {e}")))
}

/// Splits a user-supplied output path into its directory and file name.
pub(crate) fn split_output(path: &Path) -> CliResult<(PathBuf, String)> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::usage(format!("invalid output path {}", path.display())))?
        .to_string();
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((dir, name))
}

/// Runs a validated spec, writing outputs under `out_dir`.
pub fn execute(spec: &ExperimentSpec, out_dir: &Path, inputs: Inputs) -> CliResult<Option<Manifest>> {
    spec.validate()?;
    match spec {
        ExperimentSpec::CodebookGen(s) => codebook::run(s, out_dir).map(Some),
        ExperimentSpec::Analyze(s) => analyze::run(s, out_dir, inputs),
        ExperimentSpec::Simulate(s) => simulate::run(s, out_dir, inputs).map(Some),
        ExperimentSpec::Theory(s) => theory::run(s, out_dir),
        ExperimentSpec::Reproduce(s) => reproduce::run(s, out_dir).map(Some),
    }
}

/// File name of the manifest a spec writes into its output directory.
pub fn manifest_name(spec: &ExperimentSpec) -> Option<String> {
    match spec {
        ExperimentSpec::CodebookGen(s) => Some(format!("{}.manifest.json", s.file_name)),
        ExperimentSpec::Analyze(s) => s.output.as_ref().map(|o| format!("{o}.manifest.json")),
        ExperimentSpec::Theory(s) => s.output.as_ref().map(|o| format!("{o}.manifest.json")),
        ExperimentSpec::Simulate(_) | ExperimentSpec::Reproduce(_) => Some("manifest.json".into()),
    }
}

pub(crate) fn write_stdout(text: &str) -> CliResult<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub(crate) fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))
}
