//! Rank-revealing numerical kernels: rank, pseudoinverse, minimum-norm
//! least squares, and matrix powers.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Tolerance};

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    a.as_dmatrix()
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

fn rank_cutoff(sv: &[f64], a: &ComplexMatrix, tol: &Tolerance) -> f64 {
    let s_max = sv.first().copied().unwrap_or(0.0);
    tol.rank_rel * s_max * a.nrows().max(a.ncols()) as f64
}

/// Numerical rank: singular values above `rank_rel * s_max * max(m, n)`.
pub fn rank(a: &ComplexMatrix, tol: &Tolerance) -> usize {
    let sv = singular_values(a);
    let cutoff = rank_cutoff(&sv, a, tol);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Numerical rank with an external scale floor. A matrix computed as a
/// product of quantities of size `scale` carries roundoff of that order,
/// so singular values are also compared against `rank_rel * scale`; an
/// exactly-zero product contaminated by noise then reports rank 0 instead
/// of looking full-rank relative to its own noise.
pub fn rank_with_scale(a: &ComplexMatrix, scale: f64, tol: &Tolerance) -> usize {
    let sv = singular_values(a);
    let cutoff = rank_cutoff(&sv, a, tol)
        .max(tol.rank_rel * scale * a.nrows().max(a.ncols()) as f64);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Ratio of largest to smallest singular value (infinite when singular).
pub fn condition_estimate(a: &ComplexMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&s_max), Some(&s_min)) if s_min > 0.0 => s_max / s_min,
        (Some(&s_max), _) if s_max == 0.0 => 1.0,
        _ => f64::INFINITY,
    }
}

/// Moore-Penrose pseudoinverse via a complete orthogonal decomposition:
/// column-pivoted QR of A gives A = Q1 R1 P^T with R1 of full row rank r,
/// a second QR of R1^H turns that into A = Q1 R2^H Q2^H P^T, and the
/// pseudoinverse is read off the sandwich. The numerical rank comes from
/// the vector-free singular values, keeping the cutoff shared with
/// `rank`. (The SVD route is deliberately avoided: the complex SVD's
/// singular vectors are not reliable on nearly rank-deficient inputs.)
pub fn pseudo_inverse(a: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return ComplexMatrix::zeros(n, m);
    }
    let r = rank(a, tol);
    if r == 0 {
        return ComplexMatrix::zeros(n, m);
    }
    let qr = a.as_dmatrix().clone().col_piv_qr();
    let q = qr.q();
    let r_mat = qr.r();
    let q1_h = q.view((0, 0), (m, r)).adjoint();
    let r1 = r_mat.view((0, 0), (r, n)).into_owned();
    let qr2 = r1.adjoint().qr();
    let q2 = qr2.q();
    let r2 = qr2.r();
    // solve R2^H Z = Q1^H, lower triangular of full rank r
    let z = r2
        .adjoint()
        .solve_lower_triangular(&q1_h)
        .expect("R2 is invertible at the detected rank");
    let mut pinv = q2 * z;
    qr.p().inv_permute_rows(&mut pinv);
    ComplexMatrix::from_dmatrix(pinv)
}

/// Orthonormal basis of the column space as the columns of an m x r
/// matrix, from column-pivoted QR. The caller supplies the numerical rank
/// so the decision stays with whatever scale information it has.
pub fn range_basis(a: &ComplexMatrix, r: usize) -> ComplexMatrix {
    let m = a.nrows();
    if r == 0 {
        return ComplexMatrix::zeros(m, 0);
    }
    let q = a.as_dmatrix().clone().col_piv_qr().q();
    ComplexMatrix::from_dmatrix(q.view((0, 0), (m, r)).into_owned())
}

/// Orthonormal basis of the null space as the columns of an n x (n - r)
/// matrix: the orthogonal complement of the row space, from column-pivoted
/// QR of A^H. Requires nrows >= ncols so the full unitary factor exists.
pub fn null_basis(a: &ComplexMatrix, r: usize) -> ComplexMatrix {
    let n = a.ncols();
    if r == n {
        return ComplexMatrix::zeros(n, 0);
    }
    let q = a.as_dmatrix().adjoint().col_piv_qr().q();
    ComplexMatrix::from_dmatrix(q.view((0, r), (n, n - r)).into_owned())
}

/// Minimum-norm least-squares solution of `m x = rhs` (rhs is a column
/// vector); returns the solution and the 2-norm of the residual.
pub fn solve_linear_least_squares(
    m: &ComplexMatrix,
    rhs: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(ComplexMatrix, f64)> {
    if rhs.ncols() != 1 || m.nrows() != rhs.nrows() {
        return Err(Error::DimensionMismatch {
            left_rows: m.nrows(),
            left_cols: m.ncols(),
            right_rows: rhs.nrows(),
            right_cols: rhs.ncols(),
        });
    }
    let x = pseudo_inverse(m, tol).matmul(rhs)?;
    let residual = (&m.matmul(&x)? - rhs).norm_fro();
    Ok((x, residual))
}

/// `a^k` by repeated squaring; `a^0 = I`.
pub fn matrix_power(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut result = ComplexMatrix::identity(n);
    let mut base = a.clone();
    let mut exp = k;
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    Ok(result)
}

/// LU-based inverse; `None` when numerically singular.
pub fn try_inverse(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    a.as_dmatrix()
        .clone()
        .try_inverse()
        .map(ComplexMatrix::from_dmatrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactMatrix;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn random_matrix(rng: &mut StdRng, m: usize, n: usize) -> ComplexMatrix {
        let data: Vec<Complex64> = (0..m * n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(m, n, data).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let mut rng = StdRng::seed_from_u64(7);
        let m = random_matrix(&mut rng, 2, 2);
        let id = ComplexMatrix::identity(2);
        assert_eq!(id.matmul(&m).unwrap(), m);
    }

    #[test]
    fn matmul_paper_example_products() {
        // ab for the PAPER_EX_1_6 pair equals ca for its recorded witness c.
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
        let c = ComplexMatrix::from_real(&[&[0.0, 0.0], &[-1.0, 0.0]]);
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab, ComplexMatrix::from_real(&[&[0.0, 0.0], &[0.0, -1.0]]));
        assert_eq!(ab, c.matmul(&a).unwrap());
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = StdRng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 3, 3);
        let b = random_matrix(&mut rng, 3, 3);
        let fast = a.matmul(&b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    acc += a.get(i, k) * b.get(k, j);
                }
                assert!((fast.get(i, j) - acc).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn rank_zero_matrix() {
        assert_eq!(rank(&ComplexMatrix::zeros(3, 3), &tol()), 0);
    }

    #[test]
    fn rank_paper_nilpotent() {
        let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
        assert_eq!(rank(&b, &tol()), 1);
    }

    #[test]
    fn rank_two_outer_product_sum_matches_exact_oracle() {
        // Rank-2 4x4 from two integer rank-1 terms; exact row reduction is
        // the oracle.
        let u1 = [1i64, 2, -1, 3];
        let v1 = [2i64, 0, 1, -1];
        let u2 = [0i64, 1, 1, -2];
        let v2 = [1i64, 1, 0, 2];
        let mut rows = Vec::new();
        for i in 0..4 {
            let mut row = Vec::new();
            for j in 0..4 {
                row.push(u1[i] * v1[j] + u2[i] * v2[j]);
            }
            rows.push(row);
        }
        let exact = ExactMatrix::from_int_rows(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        assert_eq!(exact.rank(), 2);

        let data: Vec<Complex64> = rows
            .iter()
            .flatten()
            .map(|&x| Complex64::new(x as f64, 0.0))
            .collect();
        let m = ComplexMatrix::new(4, 4, data).unwrap();
        assert_eq!(rank(&m, &tol()), 2);
    }

    #[test]
    fn pinv_of_involutory_is_itself() {
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = pseudo_inverse(&a, &tol());
        assert!((&p - &a).norm_fro() < 1e-14);
    }

    #[test]
    fn pinv_of_zero_is_zero_transposed() {
        let p = pseudo_inverse(&ComplexMatrix::zeros(2, 3), &tol());
        assert_eq!(p.nrows(), 3);
        assert_eq!(p.ncols(), 2);
        assert!(p.is_zero());
    }

    #[test]
    fn pinv_paper_nilpotent() {
        let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
        let expected = ComplexMatrix::from_real(&[&[0.0, 0.0], &[-1.0, 0.0]]);
        let p = pseudo_inverse(&b, &tol());
        assert!((&p - &expected).norm_fro() < 1e-14);
    }

    #[test]
    fn penrose_identities() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let m = rng.gen_range(1..6);
            let n = rng.gen_range(1..6);
            let a = random_matrix(&mut rng, m, n);
            let x = pseudo_inverse(&a, &tol());
            let ax = &a * &x;
            let xa = &x * &a;
            let scale = a.norm_fro().max(1.0);
            assert!((&(&ax * &a) - &a).norm_fro() <= 1e-9 * scale);
            assert!((&(&xa * &x) - &x).norm_fro() <= 1e-9 * x.norm_fro().max(1.0));
            assert!((&ax.adjoint() - &ax).norm_fro() <= 1e-9 * scale);
            assert!((&xa.adjoint() - &xa).norm_fro() <= 1e-9 * scale);
        }
    }

    #[test]
    fn least_squares_identity_system() {
        let m = ComplexMatrix::identity(3);
        let rhs = ComplexMatrix::new(
            3,
            1,
            vec![
                Complex64::new(1.0, 2.0),
                Complex64::new(-1.0, 0.5),
                Complex64::new(0.0, -3.0),
            ],
        )
        .unwrap();
        let (x, res) = solve_linear_least_squares(&m, &rhs, &tol()).unwrap();
        assert!((&x - &rhs).norm_fro() < 1e-14);
        assert!(res < 1e-14);
    }

    #[test]
    fn least_squares_inconsistent_system() {
        // [[1],[1]] x = (0,1)^T: x = 1/2, residual sqrt(2)/2 by the normal
        // equations.
        let m = ComplexMatrix::from_real(&[&[1.0], &[1.0]]);
        let rhs = ComplexMatrix::from_real(&[&[0.0], &[1.0]]);
        let (x, res) = solve_linear_least_squares(&m, &rhs, &tol()).unwrap();
        assert!((x.get(0, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((res - (2.0f64).sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn power_zero_is_identity() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 4, 4);
        assert_eq!(matrix_power(&a, 0).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn power_of_nilpotent_vanishes() {
        let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
        assert!(matrix_power(&b, 2).unwrap().is_zero());
    }

    #[test]
    fn power_matches_naive_multiplication() {
        let mut rng = StdRng::seed_from_u64(17);
        let a = random_matrix(&mut rng, 3, 3);
        let mut naive = ComplexMatrix::identity(3);
        for _ in 0..5 {
            naive = &naive * &a;
        }
        let fast = matrix_power(&a, 5).unwrap();
        assert!((&fast - &naive).norm_fro() < 1e-12 * naive.norm_fro().max(1.0));
    }

    #[test]
    fn power_rejects_non_square() {
        assert!(matrix_power(&ComplexMatrix::zeros(2, 3), 2).is_err());
    }

    proptest! {
        #[test]
        fn rank_invariant_under_transpose(seed in 0u64..200, dim in 1usize..9) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, dim, dim);
            let r = rank(&a, &tol());
            prop_assert_eq!(rank(&a.transpose(), &tol()), r);
            prop_assert_eq!(rank(&a.adjoint(), &tol()), r);
        }

        #[test]
        fn power_additivity(seed in 0u64..50, j in 0usize..4, k in 0usize..4) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 3, 3);
            let lhs = matrix_power(&a, j + k).unwrap();
            let rhs = &matrix_power(&a, j).unwrap() * &matrix_power(&a, k).unwrap();
            let scale = a.norm_fro().max(1.0).powi((j + k) as i32);
            prop_assert!((&lhs - &rhs).norm_fro() <= 1e-10 * scale);
        }

        #[test]
        fn associativity_within_floating_error(seed in 0u64..50) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 4, 4);
            let b = random_matrix(&mut rng, 4, 4);
            let c = random_matrix(&mut rng, 4, 4);
            let lhs = &(&a * &b) * &c;
            let rhs = &a * &(&b * &c);
            let scale = a.norm_fro() * b.norm_fro() * c.norm_fro();
            prop_assert!((&lhs - &rhs).norm_fro() <= 1e-9 * scale.max(1.0));
        }
    }
}
