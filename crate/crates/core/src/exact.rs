//! Exact arithmetic over Gaussian rationals, used as an independent oracle
//! for rank and linear-system feasibility on matrices with rational entries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn from_int(re: i64) -> Self {
        Self {
            re: BigRational::from(BigInt::from(re)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from(BigInt::from(re)),
            im: BigRational::from(BigInt::from(im)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    fn mul(&self, other: &Self) -> Self {
        Self {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    fn div(&self, other: &Self) -> Self {
        let denom = &other.re * &other.re + &other.im * &other.im;
        assert!(!denom.is_zero(), "division by zero in exact arithmetic");
        let conj = Self {
            re: other.re.clone(),
            im: -other.im.clone(),
        };
        let num = self.mul(&conj);
        Self {
            re: num.re / denom.clone(),
            im: num.im / denom,
        }
    }
}

/// Dense row-major matrix over Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussianRational>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<GaussianRational>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let m = rows.len();
        let n = if m == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            assert_eq!(r.len(), n);
            data.extend(r.iter().map(|&x| GaussianRational::from_int(x)));
        }
        Self::new(m, n, data)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussianRational {
        &self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: GaussianRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::new(
            self.rows,
            other.cols,
            vec![GaussianRational::zero(); self.rows * other.cols],
        );
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = GaussianRational::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Gaussian elimination; returns the rank and leaves `self` untouched.
    pub fn rank(&self) -> usize {
        self.clone().row_echelon().0
    }

    /// Reduce to row echelon form in place on a clone; returns
    /// (rank, pivot columns, echelon matrix).
    fn row_echelon(mut self) -> (usize, Vec<usize>, Self) {
        let mut pivot_row = 0;
        let mut pivots = Vec::new();
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(src) = (pivot_row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if src != pivot_row {
                for j in 0..self.cols {
                    self.data
                        .swap(src * self.cols + j, pivot_row * self.cols + j);
                }
            }
            let pivot = self.get(pivot_row, col).clone();
            for j in col..self.cols {
                let v = self.get(pivot_row, j).div(&pivot);
                self.set(pivot_row, j, v);
            }
            for r in 0..self.rows {
                if r != pivot_row && !self.get(r, col).is_zero() {
                    let factor = self.get(r, col).clone();
                    for j in col..self.cols {
                        let v = self.get(r, j).sub(&factor.mul(self.get(pivot_row, j)));
                        self.set(r, j, v);
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        (pivot_row, pivots, self)
    }

    /// Whether `self * x = rhs` admits an exact solution.
    pub fn system_consistent(&self, rhs: &[GaussianRational]) -> bool {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Self::new(
            self.rows,
            self.cols + 1,
            vec![GaussianRational::zero(); self.rows * (self.cols + 1)],
        );
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, rhs[i].clone());
        }
        let (_, pivots, _) = aug.row_echelon();
        !pivots.contains(&self.cols)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n, vec![GaussianRational::zero(); n * n]);
        for i in 0..n {
            m.set(
                i,
                i,
                GaussianRational {
                    re: BigRational::one(),
                    im: BigRational::zero(),
                },
            );
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_singular_integer_matrix() {
        let m = ExactMatrix::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn rank_of_identity() {
        assert_eq!(ExactMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn consistency_detects_infeasible_system() {
        let m = ExactMatrix::from_int_rows(&[&[1], &[1]]);
        let feasible = vec![GaussianRational::from_int(2), GaussianRational::from_int(2)];
        let infeasible = vec![GaussianRational::from_int(0), GaussianRational::from_int(1)];
        assert!(m.system_consistent(&feasible));
        assert!(!m.system_consistent(&infeasible));
    }
}
