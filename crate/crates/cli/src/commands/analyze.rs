use std::path::Path;

use pilotgain::analysis::{noise_enhancement, theoretical_avg_enhancement_db, NoiseEnhancementReport};
use pilotgain::codebooks::{coherence_report, CoherenceReport, DEFAULT_FRAME_TOL};
use pilotgain::model::build_design_matrix;
use serde::Serialize;

use super::{load_codebook, write_stdout};
use crate::error::{CliError, CliResult};
use crate::manifest::{Inputs, Manifest, Outputs};
use crate::spec::{AnalyzeSpec, ExperimentSpec, Format};

#[derive(Serialize)]
struct AnalysisReport {
    q: usize,
    k: usize,
    kind: String,
    rank: usize,
    full_rank: bool,
    coherence: CoherenceReport,
    noise_enhancement: NoiseEnhancementReport,
    /// Average enhancement an equiangular codebook of this size would have.
    theoretical_avg_db: Option<f64>,
}

pub fn run(s: &AnalyzeSpec, out_dir: &Path, mut inputs: Inputs) -> CliResult<Option<Manifest>> {
    let p = load_codebook(&mut inputs, &s.codebook)?;
    let d = build_design_matrix(&p)?;
    let report = AnalysisReport {
        q: p.q(),
        k: p.k(),
        kind: p.kind().to_string(),
        rank: d.rank(),
        full_rank: d.is_full_column_rank(),
        coherence: coherence_report(&p, DEFAULT_FRAME_TOL),
        noise_enhancement: noise_enhancement(&d)?,
        theoretical_avg_db: theoretical_avg_enhancement_db(p.q(), p.k()).ok(),
    };
    let text = match s.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&report)?;
            t.push('\n');
            t
        }
        Format::Csv => report.noise_enhancement.to_csv(),
    };

    let manifest = match &s.output {
        Some(name) => {
            let mut outputs = Outputs::new(out_dir)?;
            outputs.write(name, text.as_bytes())?;
            let spec = ExperimentSpec::Analyze(s.clone());
            Some(outputs.finish(&format!("{name}.manifest.json"), spec, inputs)?)
        }
        None => {
            write_stdout(&text)?;
            None
        }
    };
    if s.require_full_rank && !report.full_rank {
        return Err(CliError::runtime(format!(
            "design matrix is rank deficient: rank {} < K = {}",
            report.rank, report.k
        )));
    }
    Ok(manifest)
}
