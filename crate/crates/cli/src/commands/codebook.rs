use std::path::Path;

use pilotgain::codebooks::{
    coherence_report, gen_gaussian_complex, gen_gaussian_real, gen_grassmannian, gen_random_phase,
    gen_vandermonde, write_codebook, CoherenceReport, DEFAULT_FRAME_TOL,
};
use pilotgain::PilotCodebook;
use serde::Serialize;

use crate::error::CliResult;
use crate::manifest::{Inputs, Manifest, Outputs};
use crate::spec::{ExperimentSpec, GenKind, GenSpec};

#[derive(Serialize)]
struct PackingSummary {
    converged: bool,
    iterations: usize,
    restart: usize,
}

#[derive(Serialize)]
struct CoherenceFile {
    q: usize,
    k: usize,
    kind: String,
    coherence: CoherenceReport,
    packing: Option<PackingSummary>,
}

fn generate(s: &GenSpec) -> CliResult<(PilotCodebook, Option<PackingSummary>)> {
    let (q, k, seed) = (s.q, s.k, s.seed);
    Ok(match s.kind {
        GenKind::GaussianComplex => (gen_gaussian_complex(q, k, seed)?, None),
        GenKind::GaussianReal => (gen_gaussian_real(q, k, seed)?, None),
        GenKind::RandomPhase => (gen_random_phase(q, k, seed)?, None),
        GenKind::Vandermonde => (gen_vandermonde(q, k, None, seed)?, None),
        GenKind::Grassmannian => {
            let cfg = s.packing.expect("validated");
            let out = gen_grassmannian(q, k, &cfg)?;
            let summary = PackingSummary {
                converged: out.converged,
                iterations: out.iterations,
                restart: out.restart,
            };
            (out.codebook, Some(summary))
        }
    })
}

pub fn run(s: &GenSpec, out_dir: &Path) -> CliResult<Manifest> {
    let (p, packing) = generate(s)?;
    if packing.as_ref().is_some_and(|p| !p.converged) {
        eprintln!("warning: packer stopped at the iteration cap before stalling");
    }
    let report = CoherenceFile {
        q: p.q(),
        k: p.k(),
        kind: p.kind().to_string(),
        coherence: coherence_report(&p, DEFAULT_FRAME_TOL),
        packing,
    };
    let mut outputs = Outputs::new(out_dir)?;
    outputs.write(&s.file_name, write_codebook(&p).as_bytes())?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    outputs.write(&format!("{}.coherence.json", s.file_name), json.as_bytes())?;
    let spec = ExperimentSpec::CodebookGen(s.clone());
    outputs.finish(&format!("{}.manifest.json", s.file_name), spec, Inputs::default())
}
