//! Dense complex matrices and the shared tolerance settings.
//!
//! The JSON wire format is `{"rows": m, "cols": n, "data": [[re, im], ...]}`
//! with `data` in row-major order; every tool in this workspace reads and
//! writes matrices through it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense m x n matrix over the complex numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols.max(1),
                    col: idx % cols.max(1),
                });
            }
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Fixture helper: build from real integer-scale entries.
    ///
    /// Panics on ragged input; intended for literal matrices in tests and
    /// the built-in example generators.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = if m == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            assert_eq!(r.len(), n, "ragged row in from_real");
            data.extend(r.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self {
            inner: DMatrix::from_row_slice(m, n, &data),
        }
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.inner.is_square()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.inner[(row, col)] = value;
    }

    /// Matrix product; errors when the inner dimensions disagree.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::DimensionMismatch {
                left_rows: self.nrows(),
                left_cols: self.ncols(),
                right_rows: rhs.nrows(),
                right_cols: rhs.ncols(),
            });
        }
        Ok(Self {
            inner: &self.inner * &rhs.inner,
        })
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        if self.nrows() != rhs.nrows() || self.ncols() != rhs.ncols() {
            return Err(Error::DimensionMismatch {
                left_rows: self.nrows(),
                left_cols: self.ncols(),
                right_rows: rhs.nrows(),
                right_cols: rhs.ncols(),
            });
        }
        Ok(Self {
            inner: &self.inner + &rhs.inner,
        })
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        if self.nrows() != rhs.nrows() || self.ncols() != rhs.ncols() {
            return Err(Error::DimensionMismatch {
                left_rows: self.nrows(),
                left_cols: self.ncols(),
                right_rows: rhs.nrows(),
                right_cols: rhs.ncols(),
            });
        }
        Ok(Self {
            inner: &self.inner - &rhs.inner,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            inner: self.inner.map(|z| z * factor),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.inner.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Extract the contiguous block starting at (row, col).
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self {
            inner: self.inner.view((row, col), (rows, cols)).into_owned(),
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (m1, n1) = (self.nrows(), self.ncols());
        let (m2, n2) = (other.nrows(), other.ncols());
        let mut out = DMatrix::zeros(m1 + m2, n1 + n2);
        out.view_mut((0, 0), (m1, n1)).copy_from(&self.inner);
        out.view_mut((m1, n1), (m2, n2)).copy_from(&other.inner);
        Self { inner: out }
    }

    pub fn row_major_data(&self) -> Vec<Complex64> {
        let mut data = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                data.push(self.inner[(i, j)]);
            }
        }
        data
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix addition shape mismatch")
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix subtraction shape mismatch")
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl std::ops::Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<(f64, f64)>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MatrixJson {
            rows: self.nrows(),
            cols: self.ncols(),
            data: self
                .row_major_data()
                .into_iter()
                .map(|z| (z.re, z.im))
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixJson::deserialize(deserializer)?;
        let data = repr
            .data
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(repr.rows, repr.cols, data).map_err(D::Error::custom)
    }
}

/// Numerical cutoffs shared by every rank and residual decision.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff for numerical rank.
    pub rank_rel: f64,
    /// Relative cutoff for identity residuals.
    pub residual_rel: f64,
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_rel: f64) -> Result<Self> {
        if !(rank_rel > 0.0 && rank_rel < 1.0) {
            return Err(Error::BadTolerance {
                name: "rank_rel",
                value: rank_rel,
            });
        }
        if !(residual_rel > 0.0 && residual_rel < 1.0) {
            return Err(Error::BadTolerance {
                name: "residual_rel",
                value: residual_rel,
            });
        }
        Ok(Self {
            rank_rel,
            residual_rel,
        })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            residual_rel: 1e-9,
        }
    }
}

/// Residual normalized by a scale, guarding the zero-scale case.
pub(crate) fn rel_residual(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else {
        residual / scale.max(f64::MIN_POSITIVE)
    }
}

/// Deviation metric used by all verification reports:
/// `||x - y||_F / max(1, ||y||_F)`.
pub fn deviation(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    (x - y).norm_fro() / y.norm_fro().max(1.0)
}
