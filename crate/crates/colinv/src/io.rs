//! Matrix file formats.
//!
//! Two interchangeable on-disk forms:
//!
//! - CSV: one matrix row per line, `,`-separated, `.` decimal, no header.
//!   Values are written in shortest round-trip form, so CSV -> parse -> CSV
//!   is lossless for finite `f64`.
//! - Binary: magic `CINV`, little-endian `u32` rows, `u32` cols, then
//!   `rows * cols` little-endian IEEE-754 `f64` in row-major order.

use crate::matrix::{DenseMatrix, MatrixError};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CINV";

/// Error type for matrix file I/O.
#[derive(Debug)]
pub enum MatrixIoError {
    Io(std::io::Error),
    /// A CSV cell failed to parse; carries line (1-based), column (1-based)
    /// and the offending token.
    Parse { line: usize, column: usize, token: String },
    /// Rows have inconsistent lengths.
    Ragged { line: usize, expected: usize, got: usize },
    /// Binary header is not a matrix file.
    BadMagic,
    /// Binary payload shorter than the header promises.
    Truncated,
    Matrix(MatrixError),
}

impl fmt::Display for MatrixIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixIoError::Io(e) => write!(f, "i/o error: {e}"),
            MatrixIoError::Parse { line, column, token } => {
                write!(f, "line {line}, field {column}: cannot parse {token:?} as a number")
            }
            MatrixIoError::Ragged { line, expected, got } => {
                write!(f, "line {line}: expected {expected} fields, got {got}")
            }
            MatrixIoError::BadMagic => write!(f, "not a CINV binary matrix file"),
            MatrixIoError::Truncated => write!(f, "binary matrix file is truncated"),
            MatrixIoError::Matrix(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MatrixIoError {}

impl From<std::io::Error> for MatrixIoError {
    fn from(e: std::io::Error) -> Self {
        MatrixIoError::Io(e)
    }
}

impl From<MatrixError> for MatrixIoError {
    fn from(e: MatrixError) -> Self {
        MatrixIoError::Matrix(e)
    }
}

/// Reads a CSV matrix.
pub fn read_csv<R: Read>(reader: R) -> Result<DenseMatrix, MatrixIoError> {
    let reader = BufReader::new(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for (field_idx, field) in trimmed.split(',').enumerate() {
            let token = field.trim();
            let value: f64 = token.parse().map_err(|_| MatrixIoError::Parse {
                line: idx + 1,
                column: field_idx + 1,
                token: token.to_string(),
            })?;
            data.push(value);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(MatrixIoError::Ragged {
                    line: idx + 1,
                    expected: c,
                    got: count,
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Ok(DenseMatrix::new(rows, cols, data)?)
}

/// Writes a CSV matrix in shortest round-trip form.
pub fn write_csv<W: Write>(writer: W, m: &DenseMatrix) -> Result<(), MatrixIoError> {
    let mut w = BufWriter::new(writer);
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                w.write_all(b",")?;
            }
            // {:?} prints f64 in shortest form that parses back exactly.
            write!(w, "{v:?}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a binary matrix.
pub fn read_binary<R: Read>(mut reader: R) -> Result<DenseMatrix, MatrixIoError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(|_| MatrixIoError::BadMagic)?;
    if &magic != MAGIC {
        return Err(MatrixIoError::BadMagic);
    }
    let mut word = [0u8; 4];
    reader.read_exact(&mut word).map_err(|_| MatrixIoError::Truncated)?;
    let rows = u32::from_le_bytes(word) as usize;
    reader.read_exact(&mut word).map_err(|_| MatrixIoError::Truncated)?;
    let cols = u32::from_le_bytes(word) as usize;
    let mut data = Vec::with_capacity(rows * cols);
    let mut buf = [0u8; 8];
    for _ in 0..rows * cols {
        reader.read_exact(&mut buf).map_err(|_| MatrixIoError::Truncated)?;
        data.push(f64::from_le_bytes(buf));
    }
    Ok(DenseMatrix::new(rows, cols, data)?)
}

/// Writes a binary matrix.
pub fn write_binary<W: Write>(writer: W, m: &DenseMatrix) -> Result<(), MatrixIoError> {
    let mut w = BufWriter::new(writer);
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u32).to_le_bytes())?;
    w.write_all(&(m.cols() as u32).to_le_bytes())?;
    for v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix file, picking the format by content: binary when the file
/// starts with the magic, CSV otherwise.
pub fn read_matrix_file(path: &Path) -> Result<DenseMatrix, MatrixIoError> {
    let bytes = std::fs::read(path)?;
    if bytes.len() >= 4 && &bytes[0..4] == MAGIC {
        read_binary(&bytes[..])
    } else {
        read_csv(&bytes[..])
    }
}

/// Writes a matrix file; `.bin` extension selects the binary format, anything
/// else CSV.
pub fn write_matrix_file(path: &Path, m: &DenseMatrix) -> Result<(), MatrixIoError> {
    let file = std::fs::File::create(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("bin") {
        write_binary(file, m)
    } else {
        write_csv(file, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let m = DenseMatrix::from_rows(&[
            &[1.0, -2.5, 3.333333333333333e-7],
            &[0.1 + 0.2, 1e300, -4.9e-324],
        ]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &m).unwrap();
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let m = DenseMatrix::from_rows(&[&[std::f64::consts::PI, 2.0], &[-0.0, 1.5e-200]]);
        let mut buf = Vec::new();
        write_binary(&mut buf, &m).unwrap();
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(m.rows(), back.rows());
        assert_eq!(m.cols(), back.cols());
        // Bit-exact, including the negative zero.
        for (a, b) in m.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_parse_errors_name_the_token() {
        let err = read_csv("1.0,2.0\n3.0,oops\n".as_bytes()).unwrap_err();
        match err {
            MatrixIoError::Parse { line, column, token } => {
                assert_eq!((line, column), (2, 2));
                assert_eq!(token, "oops");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(matches!(
            read_csv("1,2\n3\n".as_bytes()),
            Err(MatrixIoError::Ragged { line: 2, .. })
        ));
    }

    #[test]
    fn binary_rejects_bad_magic_and_truncation() {
        assert!(matches!(
            read_binary(&b"NOPE"[..]),
            Err(MatrixIoError::BadMagic)
        ));
        let mut buf = Vec::new();
        write_binary(&mut buf, &DenseMatrix::identity(3)).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(matches!(read_binary(&buf[..]), Err(MatrixIoError::Truncated)));
    }
}
