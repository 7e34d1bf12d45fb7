//! Sweeps behind the three noise-enhancement figures.
//!
//! Each figure writes `<fig>.csv` (the artifact of record), `<fig>.py` (a
//! matplotlib script that plots the CSV) and `manifest.json`.

use std::fmt::Write as _;
use std::path::Path;

use pilotgain::analysis::{full_load_avg_enhancement_db, noise_enhancement, theoretical_avg_enhancement_db, NoiseEnhancementReport};
use pilotgain::codebooks::{gen_gaussian_complex, gen_gaussian_real, gen_grassmannian, gen_random_phase, PackingConfig, PackingOutcome};
use pilotgain::model::build_design_matrix;
use pilotgain::{PilotCodebook, Result};
use rayon::prelude::*;

use super::cell;
use crate::error::{CliError, CliResult};
use crate::manifest::{Inputs, Manifest, Outputs};
use crate::spec::{ExperimentSpec, Figure, ReproduceSpec};

fn report(p: &PilotCodebook) -> Result<NoiseEnhancementReport> {
    noise_enhancement(&build_design_matrix(p)?)
}

fn pack(q: usize, k: usize, s: &ReproduceSpec) -> Result<PackingOutcome> {
    gen_grassmannian(q, k, &PackingConfig { seed: s.seed, ..s.packing })
}

struct Fig1Row {
    q: usize,
    theoretical: f64,
    gaussian: Vec<f64>,
    packed_db: Option<f64>,
    packed: PackingOutcome,
}

fn fig1(s: &ReproduceSpec) -> Result<(String, bool)> {
    let rows: Vec<Fig1Row> = (s.q_min..=s.q_max)
        .into_par_iter()
        .map(|q| {
            let k = q * q;
            let gaussian = (0..s.seeds as u64)
                .map(|i| Ok(report(&gen_gaussian_complex(q, k, s.seed.wrapping_add(i))?)?.average_db))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            let packed = pack(q, k, s)?;
            Ok(Fig1Row {
                q,
                theoretical: full_load_avg_enhancement_db(q)?,
                gaussian,
                packed_db: report(&packed.codebook)?.average_db,
                packed,
            })
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from(
        "q,k,theoretical_db,gaussian_median_db,gaussian_min_db,gaussian_max_db,gaussian_full_rank_seeds,\
         packed_db,packed_coherence,welch_bound,packed_converged\n",
    );
    let mut all_converged = true;
    for r in &rows {
        let g = &r.gaussian;
        all_converged &= r.packed.converged;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.q,
            r.q * r.q,
            r.theoretical,
            cell(pilotgain::analysis::median(g)),
            cell(g.iter().copied().reduce(f64::min)),
            cell(g.iter().copied().reduce(f64::max)),
            g.len(),
            cell(r.packed_db),
            r.packed.max_coherence,
            r.packed.welch_bound,
            r.packed.converged
        );
    }
    Ok((csv, all_converged))
}

fn fig2(s: &ReproduceSpec) -> Result<(String, bool)> {
    let (q, k) = (s.q, s.q * s.q);
    let gaussian = report(&gen_gaussian_complex(q, k, s.seed)?)?;
    let packed = pack(q, k, s)?;
    let packed_rep = report(&packed.codebook)?;
    let qf = q as f64;
    let mut csv = String::from("dimension,theoretical_db,gaussian_db,packed_db\n");
    for i in 0..k {
        let th = if i == 0 { 10.0 * (1.0 / qf).log10() } else { 10.0 * (1.0 + 1.0 / qf).log10() };
        let at = |r: &NoiseEnhancementReport| r.per_dimension_db.as_ref().map(|v| v[i]);
        let _ = writeln!(csv, "{i},{th},{},{}", cell(at(&gaussian)), cell(at(&packed_rep)));
    }
    Ok((csv, packed.converged))
}

const FIG3_FAMILIES: [&str; 3] = ["gaussian_complex", "gaussian_real", "random_phase"];

fn fig3(s: &ReproduceSpec) -> Result<(String, bool)> {
    let q = s.q;
    let rows: Vec<(usize, f64, Option<f64>, bool, Vec<Option<f64>>)> = (q..=q * q)
        .into_par_iter()
        .map(|k| {
            let theoretical = if k == q { 0.0 } else { theoretical_avg_enhancement_db(q, k)? };
            let packed = pack(q, k, s)?;
            let packed_db = report(&packed.codebook)?.average_db;
            let random = [
                gen_gaussian_complex(q, k, s.seed)?,
                gen_gaussian_real(q, k, s.seed)?,
                gen_random_phase(q, k, s.seed)?,
            ]
            .iter()
            .map(|p| Ok(report(p)?.average_db))
            .collect::<Result<Vec<_>>>()?;
            Ok((k, theoretical, packed_db, packed.converged, random))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from(
        "k,theoretical_db,grassmannian_db,gaussian_complex_db,gaussian_real_db,random_phase_db,\
         grassmannian_converged,rank_deficient\n",
    );
    let mut all_converged = true;
    for (k, th, packed_db, converged, random) in &rows {
        all_converged &= converged;
        let mut deficient: Vec<&str> = FIG3_FAMILIES
            .iter()
            .zip(random)
            .filter(|(_, v)| v.is_none())
            .map(|(name, _)| *name)
            .collect();
        if packed_db.is_none() {
            deficient.insert(0, "grassmannian");
        }
        let _ = writeln!(
            csv,
            "{k},{th},{},{},{},{},{converged},{}",
            cell(*packed_db),
            cell(random[0]),
            cell(random[1]),
            cell(random[2]),
            deficient.join(";")
        );
    }
    Ok((csv, all_converged))
}

fn plot_script(fig: Figure) -> String {
    let body = match fig {
        Figure::Fig1 => {
            "plt.plot(d.q, d.gaussian_median_db, 'b-o', label='Gaussian (median)')\n\
             plt.plot(d.q, d.packed_db, 'r--s', label='Grassmannian packing')\n\
             plt.plot(d.q, d.theoretical_db, 'k-', label='Welch-bound codebook')\n\
             plt.xlabel('Q (K = Q^2)')\n"
        }
        Figure::Fig2 => {
            "plt.plot(d.dimension, d.gaussian_db, 'b-o', label='Gaussian')\n\
             plt.plot(d.dimension, d.packed_db, 'r--s', label='Grassmannian packing')\n\
             plt.plot(d.dimension, d.theoretical_db, 'k-', label='Welch-bound codebook')\n\
             plt.xlabel('dimension')\n"
        }
        Figure::Fig3 => {
            "for col, style in [('theoretical_db', 'k-'), ('grassmannian_db', 'r--s'),\n\
             \x20                  ('gaussian_complex_db', 'b-o'), ('gaussian_real_db', 'g-^'),\n\
             \x20                  ('random_phase_db', 'm-v')]:\n\
             \x20   plt.plot(d.k, d[col], style, label=col[:-3])\n\
             plt.xlabel('K')\n"
        }
    };
    let name = fig.name();
    format!(
        "# Plots {name}.csv; run from the directory holding it.\n\
         import matplotlib.pyplot as plt\n\
         import pandas as pd\n\n\
         d = pd.read_csv('{name}.csv')\n\
         {body}\
         plt.yscale('symlog', linthresh=1.0)\n\
         plt.ylabel('noise enhancement [dB]')\n\
         plt.grid(True, which='both')\n\
         plt.legend()\n\
         plt.savefig('{name}.pdf', bbox_inches='tight')\n"
    )
}

pub fn run(s: &ReproduceSpec, out_dir: &Path) -> CliResult<Manifest> {
    let (csv, converged) = match s.figure {
        Figure::Fig1 => fig1(s)?,
        Figure::Fig2 => fig2(s)?,
        Figure::Fig3 => fig3(s)?,
    };
    let name = s.figure.name();
    let mut outputs = Outputs::new(out_dir)?;
    outputs.write(&format!("{name}.csv"), csv.as_bytes())?;
    outputs.write(&format!("{name}.py"), plot_script(s.figure).as_bytes())?;
    let manifest = outputs.finish("manifest.json", ExperimentSpec::Reproduce(s.clone()), Inputs::default())?;
    if !converged {
        return Err(CliError::runtime(format!(
            "packer hit its iteration cap for some {name} points (flagged in {name}.csv)"
        )));
    }
    Ok(manifest)
}
