use std::path::Path;

use super::{execute, read_to_string};
use crate::error::{CliError, CliResult};
use crate::manifest::{Inputs, Manifest};

/// Reruns a manifest into `out` (default: the manifest's directory) and
/// checks that every input and output digest matches the recorded one.
pub fn run(manifest_path: &Path, out: Option<&Path>) -> CliResult<Manifest> {
    let recorded = Manifest::parse(&read_to_string(manifest_path)?)?;
    let base = manifest_path.parent().unwrap_or(Path::new("")).to_path_buf();
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| base.clone());
    let fresh = execute(&recorded.spec, &out_dir, Inputs::for_replay(&base, recorded.input_base.as_deref()))?
        .ok_or_else(|| CliError::usage("manifest describes a run without file outputs"))?;

    let mut problems = Vec::new();
    if fresh.inputs != recorded.inputs {
        problems.push("inputs differ from the recorded digests".to_string());
    }
    for old in &recorded.outputs {
        match fresh.outputs.iter().find(|f| f.path == old.path) {
            Some(new) if new.sha256 == old.sha256 => {}
            Some(_) => problems.push(format!("{} differs", old.path)),
            None => problems.push(format!("{} was not produced", old.path)),
        }
    }
    if fresh.outputs.len() != recorded.outputs.len() {
        problems.push("output set differs".to_string());
    }
    if !problems.is_empty() {
        return Err(CliError::runtime(format!("replay mismatch: {}", problems.join("; "))));
    }
    eprintln!("replayed {} outputs, all digests match", fresh.outputs.len());
    Ok(fresh)
}
