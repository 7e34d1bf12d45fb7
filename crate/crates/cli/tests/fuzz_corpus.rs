//! Runs the fuzz target bodies over the checked-in seed corpus.

use std::fs;
use std::path::PathBuf;

use pilotgain::channel::parse_gains;
use pilotgain::codebooks::{read_codebook, write_codebook};
use pilotgain_cli::manifest::Manifest;

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn codebook_seeds() {
    let mut accepted = 0;
    for text in seeds("codebook_file") {
        if let Ok(p) = read_codebook(&text) {
            assert_eq!(read_codebook(&write_codebook(&p)).unwrap(), p);
            accepted += 1;
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn gains_seeds() {
    let results: Vec<_> = seeds("gains_file").iter().map(|t| parse_gains(t)).collect();
    assert!(results.iter().any(|r| r.is_err()));
    for g in results.into_iter().flatten() {
        assert!(g.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}

#[test]
fn manifest_seeds() {
    for text in seeds("manifest") {
        let m = Manifest::parse(&text).unwrap();
        assert_eq!(m.to_json(), text);
    }
}
