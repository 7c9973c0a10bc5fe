//! Drazin inverse, index, and spectral idempotent via the range/null-space
//! split of `A^k`, plus the block-triangular composition formula.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{condition_estimate, matrix_power, null_basis, range_basis, rank_with_scale, singular_values};
use crate::matrix::{rel_residual, ComplexMatrix, Tolerance};
use crate::report::{Verdict, VerificationReport};

/// Drazin inverse together with the index and spectral idempotent.
#[derive(Clone, Debug)]
pub struct DrazinResult {
    /// `A^D`.
    pub d_inverse: ComplexMatrix,
    /// Least k with rank(A^k) = rank(A^{k+1}); 0 iff A is invertible.
    pub index: usize,
    /// Spectral idempotent `I - A A^D`.
    pub projector: ComplexMatrix,
    /// Rank of `A^k`, the dimension of the invertible core.
    pub core_dim: usize,
    /// Condition estimate of the core block.
    pub core_condition: f64,
    /// Set when the core condition exceeds `1 / rank_rel`.
    pub ill_conditioned: bool,
}

/// Similarity taking A to `diag(A1, A2)` with A1 invertible and A2 nilpotent.
#[derive(Clone, Debug)]
pub struct CoreNilpotentSplit {
    /// Columns: orthonormal basis of R(A^k) followed by one of N(A^k).
    pub basis_change: ComplexMatrix,
    pub core_block: ComplexMatrix,
    pub nilpotent_block: ComplexMatrix,
}

fn require_square(a: &ComplexMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Noise floor carried by A^k when A itself holds entrywise error of
/// size `context`: the first power contributes `context`, every further
/// multiplication scales by `||A||_2`.
fn power_scale(context: f64, own: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        context * own.powi(k as i32 - 1)
    }
}

/// Least k >= 0 with rank(A^k) = rank(A^{k+1}). Rank decisions for A^k use
/// the scale `||A||_2^k`, since that is the size of the roundoff A^k
/// carries; without the floor, a numerically-zero high power of a
/// nilpotent matrix looks full-rank relative to its own noise.
pub fn drazin_index(a: &ComplexMatrix, tol: &Tolerance) -> Result<usize> {
    drazin_index_scaled(a, spectral_norm(a), tol)
}

/// `drazin_index` for a matrix that is itself a computed product or sum
/// and therefore carries entrywise roundoff of size `context` (e.g.
/// `||A||·||B||` for AB): the rank floor for the first power is raised to
/// `context`, so an exactly-zero product contaminated by noise reports
/// index 1 instead of looking invertible relative to its own noise.
pub fn drazin_index_scaled(a: &ComplexMatrix, context: f64, tol: &Tolerance) -> Result<usize> {
    let n = require_square(a)?;
    let own = spectral_norm(a);
    let context = context.max(own);
    let mut power = ComplexMatrix::identity(n);
    let mut prev_rank = n;
    for k in 0..=n {
        power = &power * a;
        let r = rank_with_scale(&power, power_scale(context, own, k + 1), tol);
        if r == prev_rank {
            return Ok(k);
        }
        prev_rank = r;
    }
    // Ranks strictly decrease until stabilization, so this is unreachable.
    Ok(n)
}

/// Split A into invertible core and nilpotent part along R(A^k) + N(A^k).
pub fn core_nilpotent_split(
    a: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(CoreNilpotentSplit, usize)> {
    core_nilpotent_split_scaled(a, spectral_norm(a), tol)
}

/// `core_nilpotent_split` with an external noise scale; see
/// [`drazin_index_scaled`].
pub fn core_nilpotent_split_scaled(
    a: &ComplexMatrix,
    context: f64,
    tol: &Tolerance,
) -> Result<(CoreNilpotentSplit, usize)> {
    let n = require_square(a)?;
    let own = spectral_norm(a);
    let context = context.max(own);
    let k = drazin_index_scaled(a, context, tol)?;
    let power = matrix_power(a, k.max(1))?;
    let r = if k == 0 {
        n
    } else {
        rank_with_scale(&power, power_scale(context, own, k), tol)
    };

    let basis_change = if k == 0 {
        ComplexMatrix::identity(n)
    } else {
        // columns: orthonormal basis of R(A^k), then one of N(A^k), both
        // from column-pivoted QR (rank decisions already made above)
        let range = range_basis(&power, r);
        let null = null_basis(&power, r);
        let mut q = DMatrix::<Complex64>::zeros(n, n);
        q.view_mut((0, 0), (n, r)).copy_from(range.as_dmatrix());
        q.view_mut((0, r), (n, n - r)).copy_from(null.as_dmatrix());
        ComplexMatrix::from_dmatrix(q)
    };

    let q_inv = crate::linalg::try_inverse(&basis_change).ok_or_else(|| {
        Error::SingularResolvent("core/nilpotent basis change is singular".into())
    })?;
    let similar = &(&q_inv * a) * &basis_change;
    let core_block = similar.block(0, 0, r, r);
    let nilpotent_block = similar.block(r, r, n - r, n - r);
    Ok((
        CoreNilpotentSplit {
            basis_change,
            core_block,
            nilpotent_block,
        },
        k,
    ))
}

/// Drazin inverse by the core-nilpotent decomposition.
pub fn drazin_inverse(a: &ComplexMatrix, tol: &Tolerance) -> Result<DrazinResult> {
    drazin_inverse_scaled(a, spectral_norm(a), tol)
}

/// `drazin_inverse` with an external noise scale; see
/// [`drazin_index_scaled`]. Use this for matrices assembled from products
/// or sums of other operands, passing the product/sum of their norms.
pub fn drazin_inverse_scaled(
    a: &ComplexMatrix,
    context: f64,
    tol: &Tolerance,
) -> Result<DrazinResult> {
    let n = require_square(a)?;
    let (split, index) = core_nilpotent_split_scaled(a, context, tol)?;
    let r = split.core_block.nrows();

    let core_condition = if r == 0 {
        1.0
    } else {
        condition_estimate(&split.core_block)
    };
    let ill_conditioned = core_condition > 1.0 / tol.rank_rel;

    let d_inverse = if r == 0 {
        ComplexMatrix::zeros(n, n)
    } else {
        let core_inv = crate::linalg::try_inverse(&split.core_block).ok_or_else(|| {
            Error::SingularResolvent("core block not numerically invertible".into())
        })?;
        let middle = core_inv.direct_sum(&ComplexMatrix::zeros(n - r, n - r));
        let q_inv = crate::linalg::try_inverse(&split.basis_change)
            .ok_or_else(|| Error::SingularResolvent("basis change is singular".into()))?;
        &(&split.basis_change * &middle) * &q_inv
    };

    let projector = &ComplexMatrix::identity(n) - &(a * &d_inverse);
    Ok(DrazinResult {
        d_inverse,
        index,
        projector,
        core_dim: r,
        core_condition,
        ill_conditioned,
    })
}

/// Drazin inverse of the lower block-triangular matrix `[[A1, 0], [A3, A2]]`
/// from the Drazin data of the diagonal blocks.
pub fn block_triangular_drazin(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let p = require_square(a1)?;
    let q = require_square(a2)?;
    if a3.nrows() != q || a3.ncols() != p {
        return Err(Error::DimensionMismatch {
            left_rows: q,
            left_cols: p,
            right_rows: a3.nrows(),
            right_cols: a3.ncols(),
        });
    }
    let d1 = drazin_inverse(a1, tol)?;
    let d2 = drazin_inverse(a2, tol)?;
    let a1d = &d1.d_inverse;
    let a2d = &d2.d_inverse;

    let mut c = ComplexMatrix::zeros(q, p);

    // sum over n of (A2^D)^{n+2} A3 A1^n (I - A1 A1^D); the A1-power factor
    // is (A1 A1^pi)^n for n >= 1, so terms die once that power hits zero.
    let mut a2d_pow = a2d.matmul(a2d)?; // (A2^D)^{n+2} at n = 0
    let mut a1_nil_pow = ComplexMatrix::identity(p);
    let a1_nil = a1.matmul(&d1.projector)?;
    let base1 = a1_nil.norm_fro().max(1.0);
    for n in 0..p {
        let tail = if n == 0 {
            d1.projector.clone()
        } else {
            a1_nil_pow.clone()
        };
        c = &c + &(&(&a2d_pow * a3) * &tail);
        a2d_pow = &a2d_pow * a2d;
        a1_nil_pow = &a1_nil_pow * &a1_nil;
        if power_is_negligible(a1_nil_pow.norm_fro(), base1, n + 1, tol) {
            break;
        }
    }

    // sum over n of (I - A2 A2^D) A2^n A3 (A1^D)^{n+2}.
    let mut a1d_pow = a1d.matmul(a1d)?;
    let mut a2_nil_pow = ComplexMatrix::identity(q);
    let a2_nil = a2.matmul(&d2.projector)?;
    let base2 = a2_nil.norm_fro().max(1.0);
    for n in 0..q {
        let head = if n == 0 {
            d2.projector.clone()
        } else {
            a2_nil_pow.clone()
        };
        c = &c + &(&(&head * a3) * &a1d_pow);
        a1d_pow = &a1d_pow * a1d;
        a2_nil_pow = &a2_nil_pow * &a2_nil;
        if power_is_negligible(a2_nil_pow.norm_fro(), base2, n + 1, tol) {
            break;
        }
    }

    c = &c - &(&(a2d * a3) * a1d);

    let mut out = DMatrix::<Complex64>::zeros(p + q, p + q);
    out.view_mut((0, 0), (p, p)).copy_from(a1d.as_dmatrix());
    out.view_mut((p, 0), (q, p)).copy_from(c.as_dmatrix());
    out.view_mut((p, p), (q, q)).copy_from(a2d.as_dmatrix());
    Ok(ComplexMatrix::from_dmatrix(out))
}

/// Whether a computed power of a (theoretically nilpotent) matrix has
/// reached numerical zero, relative to base^n.
pub(crate) fn power_is_negligible(norm: f64, base: f64, n: usize, tol: &Tolerance) -> bool {
    norm <= tol.rank_rel * base.max(1.0).powi(n as i32)
}

/// Residual check of the three Drazin axioms for a candidate inverse X with
/// alleged index k.
pub fn verify_drazin_axioms(
    a: &ComplexMatrix,
    x: &ComplexMatrix,
    k: usize,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let n = require_square(a)?;
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch {
            left_rows: n,
            left_cols: n,
            right_rows: x.nrows(),
            right_cols: x.ncols(),
        });
    }
    let mut report = VerificationReport::new("DRAZIN_AXIOMS");
    let na = a.norm_fro();
    let nx = x.norm_fro();

    let commute = (&(a * x) - &(x * a)).norm_fro();
    let r1 = rel_residual(commute, na * nx);
    report.push_check("commutation", r1, r1 <= tol.residual_rel);

    let inner = (&(&(x * a) * x) - x).norm_fro();
    let r2 = rel_residual(inner, nx);
    report.push_check("inner_inverse", r2, r2 <= tol.residual_rel);

    // k = 0 means A is invertible and A - A^2 X must itself vanish
    let nil_part = a - &(&(a * a) * x);
    let k_eff = k.max(1);
    let nil_power = matrix_power(&nil_part, k_eff)?;
    let r3 = rel_residual(nil_power.norm_fro(), na.max(1.0).powi(k_eff as i32));
    report.push_check("nilpotency", r3, r3 <= tol.residual_rel * n as f64);

    report.deviation = r1.max(r2).max(r3);
    report.verdict = if report.hypotheses_pass() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Test-independent route to the Drazin inverse: `A^k (A^{2k+1})^+ A^k`.
pub fn drazin_oracle(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = require_square(a)?;
    let k = drazin_index(a, tol)?.max(1);
    let ak = matrix_power(a, k)?;
    // Nilpotent input: A^k is exactly zero up to roundoff of size ||A||^k,
    // and pseudo-inverting the residual noise of A^{2k+1} would amplify it
    // into an arbitrary dense matrix. The true answer is zero.
    if rank_with_scale(&ak, spectral_norm(a).powi(k as i32), tol) == 0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let mid = crate::linalg::pseudo_inverse(&matrix_power(a, 2 * k + 1)?, tol);
    Ok(&(&ak * &mid) * &ak)
}

/// Nilpotency index by rank stabilization; `None` when the rank sequence
/// does not hit zero (i.e. the matrix is not nilpotent).
pub fn nilpotency_index(a: &ComplexMatrix, tol: &Tolerance) -> Result<Option<usize>> {
    nilpotency_index_scaled(a, spectral_norm(a), tol)
}

/// `nilpotency_index` with an external noise scale; see
/// [`drazin_index_scaled`].
pub fn nilpotency_index_scaled(
    a: &ComplexMatrix,
    context: f64,
    tol: &Tolerance,
) -> Result<Option<usize>> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok(Some(0));
    }
    let own = spectral_norm(a);
    let context = context.max(own);
    let mut power = ComplexMatrix::identity(n);
    for k in 1..=n {
        power = &power * a;
        if rank_with_scale(&power, power_scale(context, own, k), tol) == 0 {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Spectral norm, for scale estimates.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactMatrix;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn index_of_invertible_is_zero() {
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(drazin_index(&a, &tol()).unwrap(), 0);
    }

    #[test]
    fn index_of_paper_nilpotent_is_two() {
        let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
        assert_eq!(drazin_index(&b, &tol()).unwrap(), 2);
    }

    #[test]
    fn index_of_jordan_block_with_scalar() {
        // diag(J3(0), 2): exact row reduction gives ranks 3, 2, 1, 1 for
        // powers 1..4, so the index is 3.
        let m = ComplexMatrix::from_real(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ]);
        let exact = ExactMatrix::from_int_rows(&[
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[0, 0, 0, 0],
            &[0, 0, 0, 2],
        ]);
        let mut p = ExactMatrix::identity(4);
        let mut ranks = Vec::new();
        for _ in 0..4 {
            p = p.matmul(&exact);
            ranks.push(p.rank());
        }
        assert_eq!(ranks, vec![3, 2, 1, 1]);
        assert_eq!(drazin_index(&m, &tol()).unwrap(), 3);
    }

    #[test]
    fn drazin_of_involutory_is_itself() {
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let d = drazin_inverse(&a, &tol()).unwrap();
        assert_eq!(d.index, 0);
        assert!((&d.d_inverse - &a).norm_fro() < 1e-12);
        assert!(d.projector.norm_fro() < 1e-12);
    }

    #[test]
    fn drazin_of_paper_example_3_4_matrix() {
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let expected =
            ComplexMatrix::from_real(&[&[0.0, 0.5, 0.0], &[0.5, 0.0, 0.5], &[0.0, 0.5, 0.0]]);
        let d = drazin_inverse(&a, &tol()).unwrap();
        assert!((&d.d_inverse - &expected).norm_fro() < 1e-12);
        assert_eq!(d.index, 1);
    }

    #[test]
    fn drazin_of_nilpotent_is_zero() {
        let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
        let d = drazin_inverse(&b, &tol()).unwrap();
        assert!(d.d_inverse.is_zero());
        assert_eq!(d.index, 2);
        assert!((&d.projector - &ComplexMatrix::identity(2)).norm_fro() < 1e-12);
    }

    #[test]
    fn split_blocks_satisfy_invariants() {
        let m = ComplexMatrix::from_real(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ]);
        let (split, k) = core_nilpotent_split(&m, &tol()).unwrap();
        assert_eq!(k, 3);
        assert_eq!(split.core_block.nrows(), 1);
        let q_inv = crate::linalg::try_inverse(&split.basis_change).unwrap();
        let similar = &(&q_inv * &m) * &split.basis_change;
        // off-diagonal coupling blocks vanish
        let off_tr = similar.block(0, 1, 1, 3);
        let off_bl = similar.block(1, 0, 3, 1);
        assert!(off_tr.norm_fro() < 1e-10);
        assert!(off_bl.norm_fro() < 1e-10);
        let nil = matrix_power(&split.nilpotent_block, k).unwrap();
        assert!(nil.norm_fro() < 1e-10);
    }

    #[test]
    fn pseudo_inverse_fails_drazin_commutation_for_non_ep() {
        // A A^+ = diag(1,0) while A^+ A = diag(0,1) for this shift matrix.
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let x = crate::linalg::pseudo_inverse(&a, &tol());
        let report = verify_drazin_axioms(&a, &x, 2, &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(!report.hypotheses[0].pass, "commutation axiom must fail");
    }

    #[test]
    fn block_triangular_zero_coupling_is_block_diagonal() {
        let a1 = ComplexMatrix::from_real(&[&[2.0, 1.0], &[0.0, 3.0]]);
        let a2 = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let a3 = ComplexMatrix::zeros(2, 2);
        let full = block_triangular_drazin(&a1, &a2, &a3, &tol()).unwrap();
        let d1 = drazin_inverse(&a1, &tol()).unwrap();
        let expected = d1.d_inverse.direct_sum(&ComplexMatrix::zeros(2, 2));
        assert!((&full - &expected).norm_fro() < 1e-12);
    }

    #[test]
    fn block_triangular_matches_direct_drazin_on_1x1_blocks() {
        let a1 = ComplexMatrix::from_real(&[&[2.0]]);
        let a2 = ComplexMatrix::from_real(&[&[0.0]]);
        let a3 = ComplexMatrix::from_real(&[&[1.0]]);
        let formula = block_triangular_drazin(&a1, &a2, &a3, &tol()).unwrap();
        let assembled = ComplexMatrix::from_real(&[&[2.0, 0.0], &[1.0, 0.0]]);
        let direct = drazin_inverse(&assembled, &tol()).unwrap().d_inverse;
        assert!((&formula - &direct).norm_fro() < 1e-12);
    }

    #[test]
    fn oracle_agrees_with_decomposition_route() {
        let m = ComplexMatrix::from_real(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ]);
        let d = drazin_inverse(&m, &tol()).unwrap();
        let oracle = drazin_oracle(&m, &tol()).unwrap();
        assert!((&d.d_inverse - &oracle).norm_fro() < 1e-10);
    }
}
