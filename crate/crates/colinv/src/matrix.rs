//! Dense row-major matrices and vectors.
//!
//! The only matrix representation in this crate: `data[i * cols + j]` holds
//! `A[i, j]`. Construction rejects non-finite entries so every downstream
//! routine can assume clean data. Matrices and vectors are immutable in
//! practice — the solvers and the simulator share them across threads by
//! reference and never mutate them.

use std::fmt;

/// Error type for matrix and vector construction/arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// Data length does not match `rows * cols`.
    InvalidData { expected: usize, got: usize },
    /// An entry was NaN or infinite.
    NonFinite { index: usize },
    /// Dimensions do not match for the operation.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Matrix must be square for this operation.
    NotSquare { rows: usize, cols: usize },
    /// Zero rows or zero columns.
    Empty,
    /// Pivot collapsed below the singularity threshold during elimination.
    Singular { pivot_col: usize },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::InvalidData { expected, got } => {
                write!(f, "data length mismatch: expected {expected}, got {got}")
            }
            MatrixError::NonFinite { index } => {
                write!(f, "non-finite entry at flat index {index}")
            }
            MatrixError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            MatrixError::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            MatrixError::Empty => write!(f, "matrix must have at least one row and column"),
            MatrixError::Singular { pivot_col } => {
                write!(f, "matrix is singular to working precision (pivot column {pivot_col})")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

/// Relative pivot threshold for [`DenseMatrix::direct_inverse`]: a pivot whose
/// magnitude falls below `SINGULARITY_RTOL * max|entry|` is treated as zero.
pub const SINGULARITY_RTOL: f64 = 1e-12;

/// A dense real matrix stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// A dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

fn check_finite(data: &[f64]) -> Result<(), MatrixError> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(MatrixError::NonFinite { index }),
        None => Ok(()),
    }
}

impl DenseMatrix {
    /// Creates a matrix from row-major data. Rejects empty shapes, length
    /// mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::InvalidData {
                expected: rows * cols,
                got: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    /// Creates a matrix from row slices.
    ///
    /// Panics on ragged input; intended for literals in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        assert!(!rows.is_empty(), "must have at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data).expect("from_rows: invalid literal")
    }

    /// The n-by-n identity.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// Raw row-major entries.
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` by strided copy.
    pub fn column(&self, j: usize) -> Vector {
        assert!(j < self.cols, "column index out of range");
        let data = (0..self.rows).map(|i| self.get(i, j)).collect();
        Vector { data }
    }

    /// Overwrites column `j`.
    pub fn set_column(&mut self, j: usize, v: &Vector) {
        assert_eq!(v.len(), self.rows, "column length mismatch");
        for i in 0..self.rows {
            self.set(i, j, v[i]);
        }
    }

    /// Overwrites row `i`.
    pub fn set_row(&mut self, i: usize, v: &Vector) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(v.as_slice());
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Matrix-vector product `Ax`.
    pub fn matvec(&self, x: &Vector) -> Result<Vector, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, 1),
                got: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x.as_slice());
        }
        Ok(Vector { data: out })
    }

    /// Transposed matrix-vector product `A^T x`, accumulated row by row so the
    /// row-major layout is walked contiguously.
    pub fn matvec_transposed(&self, x: &Vector) -> Result<Vector, MatrixError> {
        if x.len() != self.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.rows, 1),
                got: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        Ok(Vector { data: out })
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, other.rows),
                got: (other.rows, other.cols),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                let orow = i * out.cols;
                let brow = k * other.cols;
                for j in 0..other.cols {
                    out.data[orow + j] += aik * other.data[brow + j];
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `B = A^T A`, symmetrized as `(B + B^T) / 2` so that
    /// conjugate-gradient callers see an exactly symmetric operator despite
    /// roundoff in the accumulation.
    pub fn gram(&self) -> DenseMatrix {
        let m = self.cols;
        let mut b = DenseMatrix::zeros(m, m);
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..m {
                let aij = row[j];
                if aij == 0.0 {
                    continue;
                }
                let brow = j * m;
                for k in 0..m {
                    b.data[brow + k] += aij * row[k];
                }
            }
        }
        for j in 0..m {
            for k in (j + 1)..m {
                let avg = 0.5 * (b.data[j * m + k] + b.data[k * m + j]);
                b.data[j * m + k] = avg;
                b.data[k * m + j] = avg;
            }
        }
        b
    }

    /// Sum of squared entries.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.rows, self.cols),
                got: (other.rows, other.cols),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entrywise scaling `c * self`.
    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// Exact entrywise symmetry check.
    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Inverse by Gauss-Jordan elimination on `[A | I]` with partial pivoting.
    ///
    /// This is the reference route for the true inverse: the iterative
    /// estimators are measured against it, and it backs the pseudoinverse
    /// reference `(A^T A)^{-1} A^T`. It is deliberately not a general
    /// factorization API.
    ///
    /// A pivot below [`SINGULARITY_RTOL`] times the largest input entry is
    /// treated as a singular matrix.
    pub fn direct_inverse(&self) -> Result<DenseMatrix, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let max_abs = self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let threshold = SINGULARITY_RTOL * max_abs;

        // Augmented system [A | I], row-major with width 2n.
        let w = 2 * n;
        let mut aug = vec![0.0; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(self.row(i));
            aug[i * w + n + i] = 1.0;
        }

        for col in 0..n {
            let mut piv_row = col;
            let mut piv_val = aug[col * w + col].abs();
            for r in (col + 1)..n {
                let v = aug[r * w + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val <= threshold {
                return Err(MatrixError::Singular { pivot_col: col });
            }
            if piv_row != col {
                for j in 0..w {
                    aug.swap(col * w + j, piv_row * w + j);
                }
            }
            let pivot = aug[col * w + col];
            for j in 0..w {
                aug[col * w + j] /= pivot;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = aug[r * w + col];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..w {
                    aug[r * w + j] -= factor * aug[col * w + j];
                }
            }
        }

        let mut inv = DenseMatrix::zeros(n, n);
        for i in 0..n {
            inv.data[i * n..(i + 1) * n].copy_from_slice(&aug[i * w + n..(i + 1) * w]);
        }
        Ok(inv)
    }
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.is_empty() {
            return Err(MatrixError::Empty);
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    /// Standard basis vector `e_i` of the given length.
    pub fn basis(len: usize, i: usize) -> Self {
        assert!(i < len, "basis index out of range");
        let mut data = vec![0.0; len];
        data[i] = 1.0;
        Self { data }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot length mismatch");
        dot(&self.data, &other.data)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector {
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "add length mismatch");
        Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "sub length mismatch");
        Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        Self { data }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Dot product with four independent accumulators. The fixed accumulation
/// pattern keeps results identical across runs and lets the compiler keep the
/// streams in vector registers.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..chunks {
        let i = 4 * c;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rejects_bad_data() {
        assert_eq!(
            DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0]),
            Err(MatrixError::InvalidData {
                expected: 4,
                got: 3
            })
        );
        assert_eq!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(MatrixError::NonFinite { index: 1 })
        );
        assert_eq!(DenseMatrix::new(0, 3, vec![]), Err(MatrixError::Empty));
        assert_eq!(
            Vector::new(vec![1.0, f64::INFINITY]),
            Err(MatrixError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn matvec_identity_and_diagonal() {
        let i3 = DenseMatrix::identity(3);
        let x = Vector::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(i3.matvec(&x).unwrap().as_slice(), &[1.0, 2.0, 3.0]);

        let d = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let ones = Vector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(d.matvec(&ones).unwrap().as_slice(), &[2.0, 4.0]);
    }

    #[test]
    fn matvec_rejects_dimension_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        let x = Vector::zeros(2);
        assert!(matches!(
            a.matvec(&x),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gram_trivial_cases() {
        let i2 = DenseMatrix::identity(2);
        assert_eq!(i2.gram(), i2);

        let col = DenseMatrix::from_rows(&[&[1.0], &[2.0]]);
        let g = col.gram();
        assert_eq!(g.rows(), 1);
        assert_eq!(g.get(0, 0), 5.0);
    }

    #[test]
    fn frobenius_trivial_cases() {
        assert_eq!(DenseMatrix::identity(3).frobenius_norm_sq(), 3.0);
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(m.frobenius_norm_sq(), 10.0);
    }

    #[test]
    fn direct_inverse_trivial_cases() {
        let i4 = DenseMatrix::identity(4);
        assert_eq!(i4.direct_inverse().unwrap(), i4);

        let d = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let inv = d.direct_inverse().unwrap();
        assert_eq!(inv.get(0, 0), 0.5);
        assert_eq!(inv.get(1, 1), 0.25);
        assert_eq!(inv.get(0, 1), 0.0);
    }

    #[test]
    fn direct_inverse_rejects_singular() {
        let s = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            s.direct_inverse(),
            Err(MatrixError::Singular { .. })
        ));
    }

    #[test]
    fn column_round_trip() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let c1 = a.column(1);
        assert_eq!(c1.as_slice(), &[2.0, 4.0, 6.0]);
        let mut b = DenseMatrix::zeros(3, 2);
        b.set_column(1, &c1);
        assert_eq!(b.get(2, 1), 6.0);
    }

    #[test]
    fn gram_is_exactly_symmetric() {
        // Deliberately lopsided values so unsymmetrized accumulation would
        // disagree in the last bit.
        let a = DenseMatrix::from_rows(&[
            &[1.000000000000001e8, -3.7, 2.2],
            &[0.1, 5.0e-9, -1.0e7],
            &[9.99, 8.88, 7.77],
            &[-2.0e-5, 3.0e5, 1.1],
        ]);
        let g = a.gram();
        assert!(g.is_symmetric());
    }
}
