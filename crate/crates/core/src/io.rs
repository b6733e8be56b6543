//! Matrix file formats.
//!
//! * CSV: one matrix row per line, comma separated, every value written with
//!   17 significant digits so a round trip is lossless.
//! * Binary: the 5-byte magic `URVK1`, the row and column counts as
//!   little-endian `u64`, then the entries column by column as little-endian
//!   `f64`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{LinalgError, Result};
use crate::matrix::Matrix;

pub const BINARY_MAGIC: &[u8; 5] = b"URVK1";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn write_csv<W: Write>(a: &Matrix, mut w: W) -> Result<()> {
    let mut line = String::new();
    for i in 0..a.rows() {
        line.clear();
        for j in 0..a.cols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(a[(i, j)]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(mut r: R) -> Result<Matrix> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|e| {
                    LinalgError::Format(format!("line {}: {tok:?}: {e}", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(LinalgError::Format("empty CSV matrix".into()));
    }
    Matrix::from_rows(&rows).map_err(|_| LinalgError::Format("rows of unequal length".into()))
}

pub fn write_binary<W: Write>(a: &Matrix, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(21 + 8 * a.as_slice().len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    for v in a.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Matrix> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 21 || &bytes[..5] != BINARY_MAGIC {
        return Err(LinalgError::Format("missing URVK1 header".into()));
    }
    let dim = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, cols) = (dim(5), dim(13));
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .filter(|&c| c == (bytes.len() - 21) as u64)
        .ok_or_else(|| {
            LinalgError::Format(format!(
                "{rows}x{cols} header does not match {} payload bytes",
                bytes.len() - 21
            ))
        })?;
    let data = bytes[21..21 + count as usize]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::from_col_major(rows as usize, cols as usize, data)
}

/// Reads either format, sniffing the binary magic.
pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<Matrix> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(&bytes[..])
    } else {
        read_csv(&bytes[..])
    }
}

/// Writes binary when the extension is `.bin`, CSV otherwise.
pub fn write_matrix_file(a: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    if path.extension().is_some_and(|e| e == "bin") {
        write_binary(a, &mut out)?;
    } else {
        write_csv(a, &mut out)?;
    }
    fs::write(path, out)?;
    Ok(())
}
