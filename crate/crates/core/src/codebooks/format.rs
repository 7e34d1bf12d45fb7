//! Codebook text format.
//!
//! ```text
//! Q,K,kind
//! re:im re:im … (K entries)
//! …             (Q rows)
//! ```
//!
//! Entries are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fmt::Write as _;

use crate::model::{CodebookKind, PilotCodebook};
use crate::{CMatrix, Error, Result, C64};

/// Upper bound on `Q·K` accepted by the reader.
pub const MAX_ENTRIES: usize = 1 << 24;

pub fn write_codebook(p: &PilotCodebook) -> String {
    let (q, k) = (p.q(), p.k());
    let mut out = String::with_capacity(16 + q * k * 50);
    let _ = writeln!(out, "{q},{k},{}", p.kind());
    for i in 0..q {
        for j in 0..k {
            let z = p.entries()[(i, j)];
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.16e}:{:.16e}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite number {s:?}")));
    }
    Ok(v)
}

fn parse_dim(s: &str, what: &str) -> Result<usize> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, format!("invalid {what} {s:?}")))?;
    if v == 0 {
        return Err(Error::parse(1, format!("{what} must be ≥ 1")));
    }
    Ok(v)
}

/// Parses and validates a codebook file.
pub fn read_codebook(text: &str) -> Result<PilotCodebook> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 3 {
        return Err(Error::parse(1, "header must be `Q,K,kind`"));
    }
    let q = parse_dim(fields[0], "Q")?;
    let k = parse_dim(fields[1], "K")?;
    let kind: CodebookKind = fields[2]
        .trim()
        .parse()
        .map_err(|e: Error| Error::parse(1, e.to_string()))?;
    if q.checked_mul(k).is_none_or(|n| n > MAX_ENTRIES) {
        return Err(Error::parse(1, format!("{q}×{k} codebook exceeds {MAX_ENTRIES} entries")));
    }

    let mut m = CMatrix::zeros(q, k);
    for row in 0..q {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(row + 2, format!("expected {q} rows, found {row}")))?;
        let mut cols = 0;
        for tok in line.split_whitespace() {
            if cols == k {
                return Err(Error::parse(ln, format!("more than {k} entries")));
            }
            let (re, im) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(ln, format!("entry {tok:?} is not `re:im`")))?;
            m[(row, cols)] = C64::new(parse_f64(re, ln)?, parse_f64(im, ln)?);
            cols += 1;
        }
        if cols != k {
            return Err(Error::parse(ln, format!("expected {k} entries, found {cols}")));
        }
    }
    if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(ln, "trailing content after the last row"));
    }
    PilotCodebook::new(m, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebooks::{gen_gaussian_real, gen_random_phase};

    #[test]
    fn header_and_layout() {
        let p = PilotCodebook::new(CMatrix::identity(2, 2), CodebookKind::External).unwrap();
        let s = write_codebook(&p);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("2,2,External"));
        assert_eq!(
            lines.next(),
            Some("1.0000000000000000e0:0.0000000000000000e0 0.0000000000000000e0:0.0000000000000000e0")
        );
        assert!(s.ends_with('\n'));
        assert_eq!(read_codebook(&s).unwrap(), p);
    }

    #[test]
    fn kinds_survive_round_trip() {
        let p = gen_random_phase(3, 5, 4).unwrap();
        assert_eq!(read_codebook(&write_codebook(&p)).unwrap().kind(), CodebookKind::RandomPhase);
        let p = gen_gaussian_real(3, 5, 4).unwrap();
        assert_eq!(read_codebook(&write_codebook(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            "",
            "2,2",
            "0,2,External\n",
            "1,1,Unknown\n1:0\n",
            "1,1,External\n1\n",
            "1,1,External\n1:0 0:0\n",
            "1,2,External\n1:0\n",
            "2,1,External\n1:0\n",
            "1,1,External\nNaN:0\n",
            "1,1,External\ninf:0\n",
            "1,1,External\n2:0\n",
            "1,1,External\n1:0\nextra\n",
            "1,1,GaussianReal\n0:1\n",
            "99999999,99999999,External\n",
        ];
        for c in cases {
            assert!(read_codebook(c).is_err(), "accepted {c:?}");
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        match read_codebook("2,1,External\n1:0\nx:0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tolerates_trailing_blank_lines_and_crlf() {
        let p = read_codebook("1,1,External\r\n1:0\r\n\n").unwrap();
        assert_eq!(p.entries()[(0, 0)], C64::new(1.0, 0.0));
    }
}
