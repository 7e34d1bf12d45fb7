use std::fmt::Write as _;
use std::path::Path;

use pilotgain::analysis::{etf_gram_spectrum, large_q_asymptote_db, theoretical_avg_enhancement_db};

use super::write_stdout;
use crate::error::CliResult;
use crate::manifest::{Inputs, Manifest, Outputs};
use crate::spec::{ExperimentSpec, TheorySpec};

/// Closed-form table for equiangular codebooks.
pub fn table(s: &TheorySpec) -> CliResult<String> {
    let mut out = String::from("q,k,c_d,lambda_inv_first,lambda_inv_rest,avg_db,asymptote_db\n");
    for q in s.q_min..=s.q_max {
        let ks: Vec<usize> = if s.all_k { (q + 1..=q * q).collect() } else { vec![q * q] };
        for k in ks {
            let spec = etf_gram_spectrum(q, k)?;
            let avg = theoretical_avg_enhancement_db(q, k)?;
            let _ = writeln!(
                out,
                "{q},{k},{},{},{},{avg},{}",
                spec.c_d,
                1.0 / spec.eigenvalues[0],
                1.0 / spec.eigenvalues[1],
                large_q_asymptote_db(q)
            );
        }
    }
    Ok(out)
}

pub fn run(s: &TheorySpec, out_dir: &Path) -> CliResult<Option<Manifest>> {
    let csv = table(s)?;
    match &s.output {
        Some(name) => {
            let mut outputs = Outputs::new(out_dir)?;
            outputs.write(name, csv.as_bytes())?;
            let spec = ExperimentSpec::Theory(s.clone());
            Ok(Some(outputs.finish(&format!("{name}.manifest.json"), spec, Inputs::default())?))
        }
        None => {
            write_stdout(&csv)?;
            Ok(None)
        }
    }
}
