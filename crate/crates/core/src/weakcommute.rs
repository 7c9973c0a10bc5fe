//! The weak-commutativity relation: witness solving for AB = CA, BA = AC,
//! pair classification, and the commutation identities it implies.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::drazin::drazin_inverse;
use crate::error::{Error, Result};
use crate::linalg::{rank, solve_linear_least_squares};
use crate::matrix::{rel_residual, ComplexMatrix, Tolerance};
use crate::report::{Verdict, VerificationReport};

/// Outcome of solving the witness system for a pair (A, B).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessResult {
    /// Minimum-Frobenius-norm C with AB = CA and BA = AC, when feasible.
    pub witness: Option<ComplexMatrix>,
    /// `||AB - CA||_F + ||BA - AC||_F` for the computed C.
    pub residual: f64,
    /// Dimension of the homogeneous solution set.
    pub solution_space_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationFlag {
    #[serde(rename = "commuting")]
    Commuting,
    #[serde(rename = "a_weak")]
    AWeak,
    #[serde(rename = "b_weak")]
    BWeak,
    #[serde(rename = "ab_weak")]
    AbWeak,
    #[serde(rename = "squared_commuting")]
    SquaredCommuting,
    #[serde(rename = "chen_sheibani")]
    ChenSheibani,
}

/// Classification of a pair (A, B) under the relation taxonomy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationClass {
    pub flags: BTreeSet<RelationFlag>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_a: Option<ComplexMatrix>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_b: Option<ComplexMatrix>,
}

impl RelationClass {
    pub fn has(&self, flag: RelationFlag) -> bool {
        self.flags.contains(&flag)
    }
}

fn require_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if b.nrows() != a.nrows() || b.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch {
            left_rows: a.nrows(),
            left_cols: a.ncols(),
            right_rows: b.nrows(),
            right_cols: b.ncols(),
        });
    }
    Ok(a.nrows())
}

fn vec_col_major(m: &ComplexMatrix) -> Vec<Complex64> {
    m.as_dmatrix().as_slice().to_vec()
}

/// Solve AB = CA, BA = AC for C by minimum-norm least squares on the
/// stacked 2n^2 x n^2 system in the entries of C.
pub fn solve_witness(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<WitnessResult> {
    let n = require_same_square(a, b)?;
    let id = DMatrix::<Complex64>::identity(n, n);
    // vec(CA) = (A^T kron I) vec(C), vec(AC) = (I kron A) vec(C),
    // with column-major vec.
    let top = a.as_dmatrix().transpose().kronecker(&id);
    let bottom = id.kronecker(a.as_dmatrix());
    let mut system = DMatrix::<Complex64>::zeros(2 * n * n, n * n);
    system.view_mut((0, 0), (n * n, n * n)).copy_from(&top);
    system
        .view_mut((n * n, 0), (n * n, n * n))
        .copy_from(&bottom);
    let system = ComplexMatrix::from_dmatrix(system);

    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    let mut rhs = vec_col_major(&ab);
    rhs.extend(vec_col_major(&ba));
    let rhs = ComplexMatrix::new(2 * n * n, 1, rhs)?;

    let (x, _) = solve_linear_least_squares(&system, &rhs, tol)?;
    let c = ComplexMatrix::from_dmatrix(DMatrix::from_column_slice(
        n,
        n,
        x.as_dmatrix().as_slice(),
    ));

    let residual = (&ab - &c.matmul(a)?).norm_fro() + (&ba - &a.matmul(&c)?).norm_fro();
    let scale = n as f64 * a.norm_fro() * b.norm_fro();
    let feasible = residual <= tol.residual_rel * scale.max(f64::MIN_POSITIVE) || residual == 0.0;
    let solution_space_dim = n * n - rank(&system, tol);

    Ok(WitnessResult {
        witness: feasible.then_some(c),
        residual,
        solution_space_dim,
    })
}

fn proportional_to(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    entry_cut: f64,
    resid_cut: f64,
) -> bool {
    // Is there a nonzero scalar s with s*x = y?
    let x_zero = x.max_abs() <= entry_cut;
    let y_zero = y.max_abs() <= entry_cut;
    if x_zero || y_zero {
        return x_zero && y_zero;
    }
    let mut scalar = None;
    'outer: for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if x.get(i, j).norm() > entry_cut && y.get(i, j).norm() > entry_cut {
                scalar = Some(y.get(i, j) / x.get(i, j));
                break 'outer;
            }
        }
    }
    let Some(s) = scalar else {
        return false;
    };
    (&x.scale(s) - y).norm_fro() <= resid_cut
}

/// Classify (A, B): commuting / a-weak / b-weak / {a,b}-weak /
/// squared-commuting, plus the Chen-Sheibani contrast flag.
pub fn classify_pair(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<RelationClass> {
    require_same_square(a, b)?;
    let mut flags = BTreeSet::new();
    let na = a.norm_fro();
    let nb = b.norm_fro();

    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    if rel_residual((&ab - &ba).norm_fro(), na * nb) <= tol.residual_rel {
        flags.insert(RelationFlag::Commuting);
    }

    let a2 = a.matmul(a)?;
    let a2b = a2.matmul(b)?;
    let ba2 = b.matmul(&a2)?;
    if rel_residual((&a2b - &ba2).norm_fro(), na * na * nb) <= tol.residual_rel {
        flags.insert(RelationFlag::SquaredCommuting);
    }

    let wa = solve_witness(a, b, tol)?;
    if wa.witness.is_some() {
        flags.insert(RelationFlag::AWeak);
    }
    let wb = solve_witness(b, a, tol)?;
    if wb.witness.is_some() {
        flags.insert(RelationFlag::BWeak);
    }
    if wa.witness.is_some() && wb.witness.is_some() {
        flags.insert(RelationFlag::AbWeak);
    }

    // Chen-Sheibani: aba proportional to both a^2 b and b a^2 by nonzero
    // scalars (detection only; scalars read off matched entries).
    let aba = &ab * a;
    let entry_cut = tol.residual_rel * na.max(nb).max(1.0);
    let resid_cut = tol.residual_rel * (na * na * nb).max(1.0);
    if proportional_to(&a2b, &aba, entry_cut, resid_cut)
        && proportional_to(&ba2, &aba, entry_cut, resid_cut)
    {
        flags.insert(RelationFlag::ChenSheibani);
    }

    Ok(RelationClass {
        flags,
        witness_a: wa.witness,
        witness_b: wb.witness,
    })
}

/// Commutation identities forced by AB = CA, BA = AC when A is Drazin
/// invertible: AA^D B = B AA^D, AA^D C = C AA^D, A^D B = C A^D,
/// A^D C = B A^D.
pub fn commutation_identities(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let _ = require_same_square(a, b)?;
    let _ = require_same_square(a, c)?;
    let na = a.norm_fro();
    let nb = b.norm_fro();
    let nc = c.norm_fro();

    let pre1 = (&a.matmul(b)? - &c.matmul(a)?).norm_fro();
    let pre2 = (&b.matmul(a)? - &a.matmul(c)?).norm_fro();
    let pre_scale = (na * nb.max(nc)).max(f64::MIN_POSITIVE);
    let mut failing = Vec::new();
    if pre1 > tol.residual_rel * pre_scale {
        failing.push("AB = CA");
    }
    if pre2 > tol.residual_rel * pre_scale {
        failing.push("BA = AC");
    }
    if !failing.is_empty() {
        return Err(Error::PreconditionViolated(format!(
            "input equations fail: {}",
            failing.join(", ")
        )));
    }

    let ad = drazin_inverse(a, tol)?;
    let aad = a.matmul(&ad.d_inverse)?;
    let x = &ad.d_inverse;

    let mut report = VerificationReport::new("THM_3_1_IDENTITIES");
    let checks = [
        ("AA^D B = B AA^D", (&(&aad * b) - &(b * &aad)).norm_fro(), nb),
        ("AA^D C = C AA^D", (&(&aad * c) - &(c * &aad)).norm_fro(), nc),
        ("A^D B = C A^D", (&(x * b) - &(c * x)).norm_fro(), x.norm_fro() * nb.max(nc)),
        ("A^D C = B A^D", (&(x * c) - &(b * x)).norm_fro(), x.norm_fro() * nb.max(nc)),
    ];
    for (name, resid, scale) in checks {
        let r = rel_residual(resid, scale.max(1.0));
        report.push_check(name, r, r <= tol.residual_rel);
    }
    report.deviation = report
        .hypotheses
        .iter()
        .map(|h| h.residual)
        .fold(0.0, f64::max);
    report.verdict = if report.hypotheses_pass() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ExactMatrix, GaussianRational};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn paper_pair() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        (
            ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]),
            ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]),
            ComplexMatrix::from_real(&[&[0.0, 0.0], &[-1.0, 0.0]]),
        )
    }

    #[test]
    fn witness_exists_for_paper_example() {
        let (a, b, c_paper) = paper_pair();
        let w = solve_witness(&a, &b, &tol()).unwrap();
        let c = w.witness.expect("witness must exist");
        // the returned minimum-norm witness satisfies both equations
        let e1 = (&a.matmul(&b).unwrap() - &c.matmul(&a).unwrap()).norm_fro();
        let e2 = (&b.matmul(&a).unwrap() - &a.matmul(&c).unwrap()).norm_fro();
        assert!(e1 + e2 < 1e-12);
        // and the recorded witness also solves exactly
        let p1 = (&a.matmul(&b).unwrap() - &c_paper.matmul(&a).unwrap()).norm_fro();
        let p2 = (&b.matmul(&a).unwrap() - &a.matmul(&c_paper).unwrap()).norm_fro();
        assert_eq!(p1 + p2, 0.0);
    }

    #[test]
    fn witness_for_commuting_polynomial_pair() {
        let a = ComplexMatrix::from_real(&[&[1.0, 2.0], &[0.0, 3.0]]);
        // p(a) = a^2 - a
        let b = &(&a * &a) - &a;
        let w = solve_witness(&a, &b, &tol()).unwrap();
        assert!(w.witness.is_some());
        assert!(w.residual < 1e-10);
        // C = p(a) itself solves both equations
        let e1 = (&a.matmul(&b).unwrap() - &b.matmul(&a).unwrap()).norm_fro();
        assert!(e1 < 1e-12);
    }

    #[test]
    fn witness_feasibility_matches_exact_oracle_for_shift_pair() {
        // a = [[0,0],[1,0]], b = [[0,1],[0,0]]: feasibility decided by the
        // exact 8x4 stacked system.
        let a = ComplexMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);

        // Exact stacked system in the 4 entries of C (column-major):
        // rows of (A^T kron I) and (I kron A).
        let sys = ExactMatrix::from_int_rows(&[
            // A^T kron I with A = [[0,0],[1,0]] gives [[0,0,1,0],[0,0,0,1],[0,..]]
            &[0, 0, 1, 0],
            &[0, 0, 0, 1],
            &[0, 0, 0, 0],
            &[0, 0, 0, 0],
            // I kron A
            &[0, 0, 0, 0],
            &[1, 0, 0, 0],
            &[0, 0, 0, 0],
            &[0, 0, 1, 0],
        ]);
        let ab = a.matmul(&b).unwrap(); // diag(0,1)
        let ba = b.matmul(&a).unwrap(); // diag(1,0)
        let mut rhs = Vec::new();
        for m in [&ab, &ba] {
            for j in 0..2 {
                for i in 0..2 {
                    let z = m.get(i, j);
                    rhs.push(GaussianRational::from_ints(z.re as i64, z.im as i64));
                }
            }
        }
        let exact_feasible = sys.system_consistent(&rhs);
        let numeric = solve_witness(&a, &b, &tol()).unwrap();
        assert_eq!(numeric.witness.is_some(), exact_feasible);
    }

    #[test]
    fn paper_example_classification_and_asymmetry() {
        let (a, b, _) = paper_pair();
        let class = classify_pair(&a, &b, &tol()).unwrap();
        assert!(class.has(RelationFlag::AWeak));
        assert!(class.has(RelationFlag::SquaredCommuting));
        assert!(!class.has(RelationFlag::BWeak), "Remark 1.7 regression");
        assert!(!class.has(RelationFlag::AbWeak));
        assert!(!class.has(RelationFlag::Commuting));
        assert!(!class.has(RelationFlag::ChenSheibani));
    }

    #[test]
    fn identical_pair_gets_every_flag() {
        let a = ComplexMatrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let class = classify_pair(&a, &a, &tol()).unwrap();
        for flag in [
            RelationFlag::Commuting,
            RelationFlag::AWeak,
            RelationFlag::BWeak,
            RelationFlag::AbWeak,
            RelationFlag::SquaredCommuting,
            RelationFlag::ChenSheibani,
        ] {
            assert!(class.has(flag), "missing {flag:?}");
        }
    }

    #[test]
    fn squared_commuting_nilpotent_shift_pair() {
        let a = ComplexMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let class = classify_pair(&a, &b, &tol()).unwrap();
        assert!(class.has(RelationFlag::SquaredCommuting));
    }

    #[test]
    fn weak_implies_squared_commuting() {
        // squared-commuting identity spot-check on the golden pair plus a commuting pair.
        let (a, b, _) = paper_pair();
        let a2 = a.matmul(&a).unwrap();
        let lhs = a2.matmul(&b).unwrap();
        let rhs = b.matmul(&a2).unwrap();
        assert!((&lhs - &rhs).norm_fro() < 1e-14);
    }

    #[test]
    fn witness_shift_structure() {
        // Invertible A forces a unique witness, so the minimum-norm
        // solution must coincide with the recorded one.
        let (a, b, _) = paper_pair();
        let w = solve_witness(&a, &b, &tol()).unwrap();
        assert_eq!(w.solution_space_dim, 0);
        let c0 = w.witness.unwrap();
        let c_paper = ComplexMatrix::from_real(&[&[0.0, 0.0], &[-1.0, 0.0]]);
        assert!((&c_paper - &c0).norm_fro() < 1e-12);

        // Singular A leaves homogeneous freedom: for the downward shift
        // paired with itself, {H : HA = 0, AH = 0} is one-dimensional.
        let shift = ComplexMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let w = solve_witness(&shift, &shift, &tol()).unwrap();
        assert!(w.witness.is_some());
        assert_eq!(w.solution_space_dim, 1);
    }

    #[test]
    fn witness_is_symmetric_in_b_and_c() {
        // Remark 1.2: if (a,b) is a-weak with witness c, then (a,c) is
        // a-weak with witness b.
        let (a, b, c) = paper_pair();
        let e1 = (&a.matmul(&c).unwrap() - &b.matmul(&a).unwrap()).norm_fro();
        let e2 = (&c.matmul(&a).unwrap() - &a.matmul(&b).unwrap()).norm_fro();
        assert!(e1 < 1e-14 && e2 < 1e-14);
        let w = solve_witness(&a, &c, &tol()).unwrap();
        assert!(w.witness.is_some());
    }

    #[test]
    fn commutation_identities_pass_for_paper_triple() {
        let (a, b, c) = paper_pair();
        let report = commutation_identities(&a, &b, &c, &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn commutation_identities_reject_bad_precondition() {
        let (a, b, _) = paper_pair();
        let bad_c = ComplexMatrix::identity(2);
        let err = commutation_identities(&a, &b, &bad_c, &tol());
        assert!(matches!(err, Err(Error::PreconditionViolated(_))));
    }
}
