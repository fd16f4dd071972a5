//! On-disk formats.
//!
//! * Matrices: MatrixMarket `array real general` (header, `rows cols` line,
//!   then values in column-major order, one per line).
//! * Vectors: one value per line.
//! * Traces: CSV with header `iter,err_sq,energy_err_sq,residual_sq,bound`.
//!
//! Reals are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly. Line endings are `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::trace::{ConvergenceTrace, StopReason, TraceRecord};

pub const MATRIX_MARKET_HEADER: &str = "%%MatrixMarket matrix array real general";
pub const TRACE_HEADER: &str = "iter,err_sq,energy_err_sq,residual_sq,bound";

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn matrix_to_string(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(24 * m.as_slice().len() + 64);
    out.push_str(MATRIX_MARKET_HEADER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", m.n_rows(), m.n_cols());
    for v in m.as_slice() {
        out.push_str(&fmt_real(*v));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(path, 1, "missing %%MatrixMarket header"));
    }
    if words[1..] != ["matrix", "array", "real", "general"] {
        return Err(parse_err(
            path,
            1,
            format!("unsupported format '{header}'; expected array real general"),
        ));
    }
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (dim_line, dims) = body.next().ok_or_else(|| parse_err(path, 2, "missing dimensions"))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, dim_line + 1, format!("bad dimensions: {e}")))?;
    let [n_rows, n_cols] = dims[..] else {
        return Err(parse_err(path, dim_line + 1, "expected 'rows cols'"));
    };
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for (no, line) in body {
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|e| parse_err(path, no + 1, format!("bad value '{}': {e}", line.trim())))?;
        data.push(v);
    }
    if data.len() != n_rows * n_cols {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("expected {} values, found {}", n_rows * n_cols, data.len()),
        ));
    }
    DenseMatrix::from_col_major(n_rows, n_cols, data)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_string(path, &matrix_to_string(m))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    parse_matrix(&read_to_string(path)?, path)
}

pub fn vector_to_string(v: &[f64]) -> String {
    let mut out = String::with_capacity(24 * v.len());
    for x in v {
        out.push_str(&fmt_real(*x));
        out.push('\n');
    }
    out
}

pub fn parse_vector(text: &str, path: &Path) -> Result<DenseVector> {
    let mut data = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        data.push(
            t.parse()
                .map_err(|e| parse_err(path, no + 1, format!("bad value '{t}': {e}")))?,
        );
    }
    DenseVector::new(data)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_string(path, &vector_to_string(v))
}

pub fn read_vector(path: &Path) -> Result<DenseVector> {
    parse_vector(&read_to_string(path)?, path)
}

pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(100 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            fmt_real(r.err_sq),
            fmt_real(r.energy_err_sq),
            fmt_real(r.residual_sq),
            fmt_real(r.bound)
        );
    }
    out
}

pub fn write_trace(path: &Path, trace: &ConvergenceTrace) -> Result<()> {
    write_string(path, &trace_to_csv(&trace.records))
}

/// Parses a trace CSV. The stop reason is not stored and reads back as
/// [`StopReason::MaxIters`].
pub fn parse_trace(text: &str, path: &Path) -> Result<ConvergenceTrace> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TRACE_HEADER => {}
        _ => return Err(parse_err(path, 1, format!("expected header '{TRACE_HEADER}'"))),
    }
    let mut records = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                path,
                no + 1,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let real = |k: usize| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|e| parse_err(path, no + 1, format!("bad value '{}': {e}", fields[k])))
        };
        records.push(TraceRecord {
            iter: fields[0]
                .parse()
                .map_err(|e| parse_err(path, no + 1, format!("bad iteration '{}': {e}", fields[0])))?,
            err_sq: real(1)?,
            energy_err_sq: real(2)?,
            residual_sq: real(3)?,
            bound: real(4)?,
        });
    }
    if records.is_empty() {
        return Err(parse_err(path, 2, "no records"));
    }
    Ok(ConvergenceTrace {
        records,
        stop: StopReason::MaxIters,
    })
}

pub fn read_trace(path: &Path) -> Result<ConvergenceTrace> {
    parse_trace(&read_to_string(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn matrix_layout() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let s = matrix_to_string(&m);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], MATRIX_MARKET_HEADER);
        assert_eq!(lines[1], "3 2");
        assert_eq!(lines[2], "1.0000000000000000e0");
        assert_eq!(lines[3], "3.0000000000000000e0");
        assert_eq!(lines[5], "2.0000000000000000e0");
        assert!(s.ends_with('\n') && !s.contains('\r'));
    }

    #[test]
    fn matrix_reader_accepts_comments_and_plain_decimals() {
        let text = "%%MatrixMarket matrix array real general\n% made by hand\n2 2\n1\n0.5\n-2\n1e3\n";
        let m = parse_matrix(text, p()).unwrap();
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(m.get(0, 1), -2.0);
        assert_eq!(m.get(1, 1), 1000.0);
    }

    #[test]
    fn matrix_reader_errors() {
        assert!(matches!(parse_matrix("", p()), Err(Error::Parse { .. })));
        let coord = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n";
        assert!(matches!(parse_matrix(coord, p()), Err(Error::Parse { line: 1, .. })));
        let short = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert!(matches!(parse_matrix(short, p()), Err(Error::Parse { .. })));
        let bad = "%%MatrixMarket matrix array real general\n1 1\nabc\n";
        assert!(matches!(parse_matrix(bad, p()), Err(Error::Parse { line: 3, .. })));
        let nan = "%%MatrixMarket matrix array real general\n1 1\nNaN\n";
        assert!(matches!(parse_matrix(nan, p()), Err(Error::NonFinite(0))));
    }

    #[test]
    fn vector_reader_errors() {
        assert!(matches!(
            parse_vector("1.0\nfoo\n", p()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_vector("\n", p()), Err(Error::Empty)));
    }

    #[test]
    fn trace_csv_layout() {
        let rec = TraceRecord {
            iter: 7,
            err_sq: 0.25,
            energy_err_sq: 1.0,
            residual_sq: 0.0,
            bound: 3.0,
        };
        let s = trace_to_csv(&[rec]);
        assert_eq!(
            s,
            "iter,err_sq,energy_err_sq,residual_sq,bound\n\
             7,2.5000000000000000e-1,1.0000000000000000e0,0.0000000000000000e0,3.0000000000000000e0\n"
        );
        assert!(matches!(
            parse_trace("iter,x\n", p()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("X.mtx");
        let m = DenseMatrix::from_rows(&[[0.1, 0.2, 0.3]]).unwrap();
        write_matrix(&path, &m).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), m);
        assert!(matches!(
            read_vector(&dir.path().join("missing.vec")),
            Err(Error::Io { .. })
        ));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            -1e3f64..1e3,
            Just(0.0),
            Just(-0.0),
            Just(f64::MIN_POSITIVE),
            Just(5e-324),
        ]
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_bit_exact(
            (n, p_, data) in (1usize..5, 1usize..5).prop_flat_map(|(n, p_)| {
                (Just(n), Just(p_), proptest::collection::vec(finite(), n * p_))
            })
        ) {
            let m = DenseMatrix::from_col_major(n, p_, data).unwrap();
            let back = parse_matrix(&matrix_to_string(&m), p()).unwrap();
            for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn vector_and_trace_round_trip_is_bit_exact(
            data in proptest::collection::vec(finite(), 1..20),
        ) {
            let v = parse_vector(&vector_to_string(&data), p()).unwrap();
            for (a, b) in data.iter().zip(v.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            let records: Vec<TraceRecord> = data
                .iter()
                .enumerate()
                .map(|(i, &x)| TraceRecord {
                    iter: i as u64,
                    err_sq: x.abs(),
                    energy_err_sq: x * x,
                    residual_sq: x.abs() / 3.0,
                    bound: x.abs() * 7.0,
                })
                .collect();
            let back = parse_trace(&trace_to_csv(&records), p()).unwrap();
            prop_assert_eq!(back.records.len(), records.len());
            for (a, b) in records.iter().zip(&back.records) {
                prop_assert_eq!(a.iter, b.iter);
                prop_assert_eq!(a.err_sq.to_bits(), b.err_sq.to_bits());
                prop_assert_eq!(a.energy_err_sq.to_bits(), b.energy_err_sq.to_bits());
                prop_assert_eq!(a.residual_sq.to_bits(), b.residual_sq.to_bits());
                prop_assert_eq!(a.bound.to_bits(), b.bound.to_bits());
            }
        }
    }
}
