//! Run manifests: the validated experiment spec plus digests of every input
//! and output. A manifest carries no timestamps, host data or thread counts,
//! so rerunning it yields a byte-identical manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::spec::ExperimentSpec;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub tool: String,
    pub spec: ExperimentSpec,
    /// Directory that relative input paths resolve against, relative to the
    /// manifest's directory. Absent when the run read no files.
    pub input_base: Option<String>,
    pub inputs: Vec<FileDigest>,
    /// Output files, named relative to the manifest's directory.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn is_digest(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// A bare file name: no separators, no parent references.
pub(crate) fn is_plain_name(s: &str) -> bool {
    !s.is_empty() && s != "." && s != ".." && !s.contains(['/', '\\']) && !s.contains('\0')
}

impl Manifest {
    pub fn new(
        spec: ExperimentSpec,
        input_base: Option<String>,
        inputs: Vec<FileDigest>,
        outputs: Vec<FileDigest>,
    ) -> Self {
        Manifest {
            format_version: FORMAT_VERSION,
            tool: concat!("pilotgain ", env!("CARGO_PKG_VERSION")).to_string(),
            spec,
            input_base,
            inputs,
            outputs,
        }
    }

    /// Parses and validates a manifest document.
    pub fn parse(text: &str) -> CliResult<Manifest> {
        let m: Manifest = serde_json::from_str(text)
            .map_err(|e| CliError::usage(format!("invalid manifest: {e}")))?;
        if m.format_version != FORMAT_VERSION {
            return Err(CliError::usage(format!(
                "unsupported manifest format_version {} (expected {FORMAT_VERSION})",
                m.format_version
            )));
        }
        for f in m.inputs.iter().chain(&m.outputs) {
            if !is_digest(&f.sha256) {
                return Err(CliError::usage(format!("malformed digest for {:?}", f.path)));
            }
        }
        if let Some(f) = m.outputs.iter().find(|f| !is_plain_name(&f.path)) {
            return Err(CliError::usage(format!("output {:?} must be a plain file name", f.path)));
        }
        m.spec.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Collects output files written under one directory.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileDigest>,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>) -> CliResult<Self> {
        let mut dir: PathBuf = dir.into();
        if dir.as_os_str().is_empty() {
            dir = PathBuf::from(".");
        }
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs { dir, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(FileDigest { path: name.to_string(), sha256: sha256_hex(contents) });
        Ok(())
    }

    /// Writes the manifest itself (not listed among the outputs).
    pub fn finish(self, name: &str, spec: ExperimentSpec, inputs: Inputs) -> CliResult<Manifest> {
        let base = if inputs.digests.is_empty() {
            None
        } else {
            match inputs.recorded_base {
                Some(b) => Some(b),
                None => Some(relative_path(&fs::canonicalize(&self.dir)?, &std::env::current_dir()?)),
            }
        };
        let manifest = Manifest::new(spec, base, inputs.digests, self.files);
        let path = self.dir.join(name);
        fs::write(&path, manifest.to_json())
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// `to` expressed relative to `from`, with `/` separators.
fn relative_path(from: &Path, to: &Path) -> String {
    let f: Vec<_> = from.components().collect();
    let t: Vec<_> = to.components().collect();
    let common = f.iter().zip(&t).take_while(|(a, b)| a == b).count();
    let mut parts: Vec<String> = vec!["..".to_string(); f.len() - common];
    parts.extend(t[common..].iter().map(|c| c.as_os_str().to_string_lossy().into_owned()));
    if parts.is_empty() {
        ".".to_string()
    } else {
        parts.join("/")
    }
}

/// Reads input files and records their digests. A fresh run resolves
/// relative paths against the working directory; a replay resolves them
/// against the base recorded in the manifest.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    base: Option<PathBuf>,
    recorded_base: Option<String>,
    digests: Vec<FileDigest>,
}

impl Inputs {
    pub fn for_replay(manifest_dir: &Path, input_base: Option<&str>) -> Self {
        let base = input_base.unwrap_or(".");
        Inputs {
            base: Some(manifest_dir.join(base)),
            recorded_base: input_base.map(str::to_string),
            digests: Vec::new(),
        }
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        match &self.base {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Reads a UTF-8 input and records its digest.
    pub fn read(&mut self, path: &str) -> CliResult<String> {
        let resolved = self.resolve(path);
        let bytes = fs::read(&resolved)
            .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", resolved.display())))?;
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::runtime(format!("{} is not UTF-8", resolved.display())))?;
        self.digests.push(FileDigest { path: path.to_string(), sha256: sha256_hex(text.as_bytes()) });
        Ok(text)
    }
}
