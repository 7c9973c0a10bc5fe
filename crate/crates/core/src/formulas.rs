//! Closed-form Drazin representations and hypothesis checks, each verified
//! against the direct decomposition route.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::drazin::{
    block_triangular_drazin, core_nilpotent_split, drazin_inverse, drazin_inverse_scaled,
    nilpotency_index_scaled, spectral_norm, verify_drazin_axioms,
};
use crate::error::{Error, Result};
use crate::linalg::{matrix_power, rank, try_inverse};
use crate::matrix::{deviation, rel_residual, ComplexMatrix, Tolerance};
use crate::report::{Verdict, VerificationReport};
use crate::weakcommute::solve_witness;

/// Entrywise noise scale carried by a computed sum A + B.
fn sum_context(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    spectral_norm(a) + spectral_norm(b)
}

/// Entrywise noise scale carried by a computed product A·B.
fn product_context(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    spectral_norm(a) * spectral_norm(b)
}

/// Identifier for each representation formula under verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulaId {
    #[serde(rename = "SUM_NILPOTENT_RESOLVENT")]
    SumNilpotentResolvent,
    #[serde(rename = "SUM_NILPOTENT_SERIES")]
    SumNilpotentSeries,
    #[serde(rename = "SUM_2_9")]
    Sum29,
    #[serde(rename = "COR_2_10_I")]
    Cor210I,
    #[serde(rename = "COR_2_10_II")]
    Cor210II,
    #[serde(rename = "COR_2_10_III")]
    Cor210III,
    #[serde(rename = "PRODUCT_3_3")]
    Product33,
    #[serde(rename = "INVOLUTORY_4_2")]
    Involutory42,
    #[serde(rename = "CLINE_4_1")]
    Cline41,
    #[serde(rename = "BLOCK_2_2")]
    Block22,
}

impl FormulaId {
    pub const ALL: [FormulaId; 10] = [
        FormulaId::SumNilpotentResolvent,
        FormulaId::SumNilpotentSeries,
        FormulaId::Sum29,
        FormulaId::Cor210I,
        FormulaId::Cor210II,
        FormulaId::Cor210III,
        FormulaId::Product33,
        FormulaId::Involutory42,
        FormulaId::Cline41,
        FormulaId::Block22,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FormulaId::SumNilpotentResolvent => "SUM_NILPOTENT_RESOLVENT",
            FormulaId::SumNilpotentSeries => "SUM_NILPOTENT_SERIES",
            FormulaId::Sum29 => "SUM_2_9",
            FormulaId::Cor210I => "COR_2_10_I",
            FormulaId::Cor210II => "COR_2_10_II",
            FormulaId::Cor210III => "COR_2_10_III",
            FormulaId::Product33 => "PRODUCT_3_3",
            FormulaId::Involutory42 => "INVOLUTORY_4_2",
            FormulaId::Cline41 => "CLINE_4_1",
            FormulaId::Block22 => "BLOCK_2_2",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormulaId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::PreconditionViolated(format!("unknown formula id {s}")))
    }
}

/// Identifier for theorem hypothesis suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HypothesisId {
    #[serde(rename = "THM_2_7")]
    Thm27,
    #[serde(rename = "THM_2_11")]
    Thm211,
    #[serde(rename = "THM_2_12")]
    Thm212,
    #[serde(rename = "COR_3_5")]
    Cor35,
    #[serde(rename = "THM_4_4")]
    Thm44,
    #[serde(rename = "PROP_4_5")]
    Prop45,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 6] = [
        HypothesisId::Thm27,
        HypothesisId::Thm211,
        HypothesisId::Thm212,
        HypothesisId::Cor35,
        HypothesisId::Thm44,
        HypothesisId::Prop45,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HypothesisId::Thm27 => "THM_2_7",
            HypothesisId::Thm211 => "THM_2_11",
            HypothesisId::Thm212 => "THM_2_12",
            HypothesisId::Cor35 => "COR_3_5",
            HypothesisId::Thm44 => "THM_4_4",
            HypothesisId::Prop45 => "PROP_4_5",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            HypothesisId::Thm27 | HypothesisId::Thm212 | HypothesisId::Cor35 => 2,
            HypothesisId::Thm211 | HypothesisId::Thm44 | HypothesisId::Prop45 => 3,
        }
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HypothesisId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HypothesisId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::PreconditionViolated(format!("unknown hypothesis id {s}")))
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

/// Finite series with the cap at dim and an early stop once the term has
/// hit numerical zero (the remaining terms are exactly zero in exact
/// arithmetic, so dropping them only removes roundoff noise).
fn adaptive_sum(
    rows: usize,
    cols: usize,
    cap: usize,
    base: f64,
    pre: f64,
    tol: &Tolerance,
    mut term: impl FnMut(usize) -> ComplexMatrix,
) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(rows, cols);
    for n in 0..cap {
        let t = term(n);
        let floor = tol.rank_rel * pre.max(1.0) * base.max(1.0).powi(n as i32);
        if n > 0 && t.norm_fro() <= floor {
            break;
        }
        acc = &acc + &t;
    }
    acc
}

/// Single combined row for the {A,B}-weak hypothesis: residual is the worse
/// of the two witness residual ratios.
fn ab_weak_row(
    report: &mut VerificationReport,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<bool> {
    let n = a.nrows() as f64;
    let scale = (n * a.norm_fro() * b.norm_fro()).max(f64::MIN_POSITIVE);
    let wa = solve_witness(a, b, tol)?;
    let wb = solve_witness(b, a, tol)?;
    let residual = rel_residual(wa.residual.max(wb.residual), scale);
    let pass = wa.witness.is_some() && wb.witness.is_some();
    report.push_check("ab_weak", residual, pass);
    Ok(pass)
}

fn weak_row(
    report: &mut VerificationReport,
    name: &str,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<bool> {
    let n = a.nrows() as f64;
    let scale = (n * a.norm_fro() * b.norm_fro()).max(f64::MIN_POSITIVE);
    let w = solve_witness(a, b, tol)?;
    let pass = w.witness.is_some();
    report.push_check(name, rel_residual(w.residual, scale), pass);
    Ok(pass)
}

/// `context` is the magnitude of the quantities `m` was computed from; an
/// `m` at that noise floor is an exact zero and counts as nilpotent.
fn nilpotent_row(
    report: &mut VerificationReport,
    name: &str,
    m: &ComplexMatrix,
    context: f64,
    tol: &Tolerance,
) -> Result<bool> {
    let n = m.nrows();
    if m.norm_fro() <= tol.residual_rel * context.max(1.0) {
        report.push_check(name, rel_residual(m.norm_fro(), context.max(1.0)), true);
        return Ok(true);
    }
    let full = matrix_power(m, n)?;
    let residual = rel_residual(full.norm_fro(), m.norm_fro().max(1.0).powi(n as i32));
    let pass = nilpotency_index_scaled(m, context, tol)?.is_some();
    report.push_check(name, residual, pass);
    Ok(pass)
}

fn finish(
    mut report: VerificationReport,
    hyp_ok: bool,
    dev: f64,
    formula_out: Option<ComplexMatrix>,
    oracle_out: Option<ComplexMatrix>,
    tol: &Tolerance,
) -> VerificationReport {
    report.deviation = dev;
    report.formula_output = formula_out;
    report.oracle_output = oracle_out;
    report.verdict = if !hyp_ok {
        Verdict::HypothesesNotMet
    } else if dev <= tol.residual_rel && report.hypotheses_pass() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report
}

/// Series factor: sum over n of (A^D)^{2n} (-AB)^n, suffix applied outside.
fn left_series(
    ad: &ComplexMatrix,
    minus_ab: &ComplexMatrix,
    suffix: &ComplexMatrix,
    tol: &Tolerance,
) -> ComplexMatrix {
    let n = ad.nrows();
    let ad2 = ad * ad;
    let base = (ad2.norm_fro().max(1.0) * minus_ab.norm_fro().max(1.0)).max(1.0);
    adaptive_sum(n, n, n, base, suffix.norm_fro(), tol, |k| {
        let dk = matrix_power(&ad2, k).expect("square");
        let pk = matrix_power(minus_ab, k).expect("square");
        &(&dk * &pk) * suffix
    })
}

/// Series factor: prefix * sum over n of (-AB)^n (B^D)^{2n}.
fn right_series(
    prefix: &ComplexMatrix,
    minus_ab: &ComplexMatrix,
    bd: &ComplexMatrix,
    tol: &Tolerance,
) -> ComplexMatrix {
    let n = bd.nrows();
    let bd2 = bd * bd;
    let base = (bd2.norm_fro().max(1.0) * minus_ab.norm_fro().max(1.0)).max(1.0);
    adaptive_sum(n, n, n, base, prefix.norm_fro(), tol, |k| {
        let pk = matrix_power(minus_ab, k).expect("square");
        let ek = matrix_power(&bd2, k).expect("square");
        &(prefix * &pk) * &ek
    })
}

/// Additive theorem for a Drazin-invertible A plus a weakly commutative
/// nilpotent B: `(A+B)^D = (I + A^D B)^{-1} A^D`, with the equivalent
/// finite-series form checked alongside.
pub fn sum_drazin_nilpotent(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    verify_sum_nilpotent(FormulaId::SumNilpotentResolvent, a, b, tol)
}

fn verify_sum_nilpotent(
    id: FormulaId,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let n = require_same_square(a, b)?;
    let mut report = VerificationReport::new(id.name());
    let nil_ok = nilpotent_row(&mut report, "b_nilpotent", b, b.norm_fro(), tol)?;
    let weak_ok = ab_weak_row(&mut report, a, b, tol)?;
    if !(nil_ok && weak_ok) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let ad = drazin_inverse(a, tol)?;
    let oracle = drazin_inverse_scaled(&(a + b), sum_context(a, b), tol)?.d_inverse;

    let id_n = ComplexMatrix::identity(n);
    let resolvent_arg = &id_n + &(&ad.d_inverse * b);
    let Some(resolvent) = try_inverse(&resolvent_arg) else {
        report.push_check("resolvent_invertible", f64::INFINITY, false);
        return Ok(finish(report, true, f64::INFINITY, None, Some(oracle), tol));
    };
    let resolvent_form = &resolvent * &ad.d_inverse;

    let minus_ab = -&(a * b);
    let series_form = left_series(&ad.d_inverse, &minus_ab, &ad.d_inverse, tol);

    let dev_cross = deviation(&resolvent_form, &series_form);
    report.push_check("resolvent_vs_series", dev_cross, dev_cross <= tol.residual_rel);

    let (primary, secondary) = match id {
        FormulaId::SumNilpotentSeries => (series_form, resolvent_form),
        _ => (resolvent_form, series_form),
    };
    let dev = deviation(&primary, &oracle).max(deviation(&secondary, &oracle));
    Ok(finish(report, true, dev, Some(primary), Some(oracle), tol))
}

/// Representations of `(A+B)^D` for general {A,B}-weakly commutative
/// Drazin-invertible pairs (the resolvent-plus-projection family).
pub fn sum_representation(
    formula: FormulaId,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let n = require_same_square(a, b)?;
    let mut report = VerificationReport::new(formula.name());
    let weak_ok = ab_weak_row(&mut report, a, b, tol)?;
    if !weak_ok {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let ad = drazin_inverse(a, tol)?;
    let bd = drazin_inverse(b, tol)?;
    let id_n = ComplexMatrix::identity(n);
    let aad = a * &ad.d_inverse;
    let bbd = b * &bd.d_inverse;
    let pi_a = &ad.projector;
    let pi_b = &bd.projector;
    let sum = a + b;
    let minus_ab = -&(a * b);

    let correction_right = right_series(&(pi_a * &bd.d_inverse), &minus_ab, &bd.d_inverse, tol);
    let correction_left = left_series(&ad.d_inverse, &minus_ab, &(&ad.d_inverse * pi_b), tol);

    let result = match formula {
        FormulaId::Sum29 => {
            let left_factor = &(a * a) * &ad.d_inverse;
            let right_factor = &id_n + &(&ad.d_inverse * b);
            let core_arg = &left_factor * &right_factor;
            let t1 = drazin_inverse_scaled(
                &core_arg,
                product_context(&left_factor, &right_factor),
                tol,
            )?
            .d_inverse;
            let resolvent_arg = &(&(a * pi_a) * &bd.d_inverse) + &id_n;
            let resolvent = try_inverse(&resolvent_arg).ok_or_else(|| {
                Error::SingularResolvent(
                    "A(I-AA^D)B^D + I is not invertible; a hypothesis genuinely fails".into(),
                )
            })?;
            let t2 = &(pi_a * &bd.d_inverse) * &resolvent;
            // The stated series for this term carries an out-of-range
            // exponent at n = 0; the exponent-n indexing is the candidate
            // that checks out numerically, and its agreement is reported
            // here rather than assumed.
            let dev_series = deviation(&correction_right, &t2);
            report.push_check(
                "thm_2_9_series_exponent_n_consistent",
                dev_series,
                dev_series <= tol.residual_rel,
            );
            &t1 + &t2
        }
        FormulaId::Cor210I => {
            let left_factor = &aad * &sum;
            let core_arg = &left_factor * &bbd;
            let ctx = product_context(&left_factor, &bbd);
            let t1 = drazin_inverse_scaled(&core_arg, ctx, tol)?.d_inverse;
            &(&t1 + &correction_right) + &correction_left
        }
        FormulaId::Cor210II => {
            let core_arg = &aad * &sum;
            let t1 =
                drazin_inverse_scaled(&core_arg, product_context(&aad, &sum), tol)?.d_inverse;
            &t1 + &correction_right
        }
        FormulaId::Cor210III => {
            let core_arg = &sum * &bbd;
            let t1 =
                drazin_inverse_scaled(&core_arg, product_context(&sum, &bbd), tol)?.d_inverse;
            &t1 + &correction_left
        }
        other => {
            return Err(Error::PreconditionViolated(format!(
                "{other} is not a sum representation"
            )))
        }
    };

    let oracle = drazin_inverse_scaled(&sum, sum_context(a, b), tol)?.d_inverse;
    let dev = deviation(&result, &oracle);
    Ok(finish(report, true, dev, Some(result), Some(oracle), tol))
}

/// Multiplicative theorem: `(AB)^D = B^D A^D` for {A,B}-weakly commutative
/// pairs, with the proof-internal nilpotency checks.
pub fn product_drazin(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let _ = require_same_square(a, b)?;
    let mut report = VerificationReport::new(FormulaId::Product33.name());
    let weak_ok = ab_weak_row(&mut report, a, b, tol)?;
    if !weak_ok {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let ad = drazin_inverse(a, tol)?;
    let bd = drazin_inverse(b, tol)?;
    let ab = a * b;
    let candidate = &bd.d_inverse * &ad.d_inverse;
    let oracle = drazin_inverse_scaled(&ab, product_context(a, b), tol)?.d_inverse;
    let dev = deviation(&candidate, &oracle);

    // proof internals: the product defect and both displayed terms are
    // nilpotent, and their ordered product vanishes
    let defect = &ab - &(&(&ab * &candidate) * &ab);
    let defect_scale = ab.norm_fro() * (1.0 + candidate.norm_fro() * ab.norm_fro());
    nilpotent_row(&mut report, "product_defect_nilpotent", &defect, defect_scale, tol)?;

    let a_nil = a - &(&(a * a) * &ad.d_inverse);
    let b_nil = b - &(&(b * b) * &bd.d_inverse);
    let a2ad = &(a * a) * &ad.d_inverse;
    let term1 = &a_nil * b;
    let term2 = &a2ad * &b_nil;
    let factor_scale = (a.norm_fro() + a2ad.norm_fro()) * b.norm_fro().max(1.0);
    nilpotent_row(&mut report, "nilpotent_term_left", &term1, factor_scale, tol)?;
    nilpotent_row(&mut report, "nilpotent_term_right", &term2, factor_scale, tol)?;
    let ordered = &term1 * &term2;
    let scale = term1.norm_fro() * term2.norm_fro();
    let r = rel_residual(ordered.norm_fro(), scale.max(1.0));
    report.push_check("ordered_product_zero", r, r <= tol.residual_rel);

    Ok(finish(report, true, dev, Some(candidate), Some(oracle), tol))
}

/// Involutory sum theorem: if A^2 = B^2 = I and A - B = BAB - ABA then
/// `(A+B)^D = (I + AB)^D A`.
pub fn involutory_sum(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let n = require_same_square(a, b)?;
    let mut report = VerificationReport::new(FormulaId::Involutory42.name());
    let id_n = ComplexMatrix::identity(n);
    let na = a.norm_fro().max(1.0);
    let nb = b.norm_fro().max(1.0);

    let r1 = rel_residual((&(a * a) - &id_n).norm_fro(), na * na);
    report.push_check("a_involutory", r1, r1 <= tol.residual_rel);
    let r2 = rel_residual((&(b * b) - &id_n).norm_fro(), nb * nb);
    report.push_check("b_involutory", r2, r2 <= tol.residual_rel);
    let lhs = a - b;
    let rhs = &(&(b * a) * b) - &(&(a * b) * a);
    let r3 = rel_residual((&lhs - &rhs).norm_fro(), na * nb * na.max(nb));
    report.push_check("difference_identity", r3, r3 <= tol.residual_rel);

    if !report.hypotheses_pass() {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let inner = drazin_inverse_scaled(
        &(&id_n + &(a * b)),
        1.0 + product_context(a, b),
        tol,
    )?;
    let candidate = &inner.d_inverse * a;
    let oracle = drazin_inverse_scaled(&(a + b), sum_context(a, b), tol)?.d_inverse;
    let dev = deviation(&candidate, &oracle);
    Ok(finish(report, true, dev, Some(candidate), Some(oracle), tol))
}

/// Cline's formula `(BA)^D = B ((AB)^D)^2 A`, unconditional; for invertible
/// A the similarity corollary (A+B vs A+C with C = ABA^{-1}) is reported
/// alongside.
pub fn cline_transfer(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let n = require_same_square(a, b)?;
    let mut report = VerificationReport::new(FormulaId::Cline41.name());

    let ab = a * b;
    let ba = b * a;
    let ctx = product_context(a, b);
    let abd = drazin_inverse_scaled(&ab, ctx, tol)?.d_inverse;
    let candidate = &(b * &(&abd * &abd)) * a;
    let oracle = drazin_inverse_scaled(&ba, ctx, tol)?.d_inverse;
    let dev = deviation(&candidate, &oracle);

    if rank(a, tol) == n {
        if let Some(a_inv) = try_inverse(a) {
            let c = &ab * &a_inv;
            let sum_b = drazin_inverse_scaled(&(a + b), sum_context(a, b), tol)?;
            let sum_c = drazin_inverse_scaled(&(a + &c), sum_context(a, &c), tol)?;
            let index_match = sum_b.index == sum_c.index;
            report.push_check(
                "similar_sum_index",
                (sum_b.index as f64 - sum_c.index as f64).abs(),
                index_match,
            );
            let conjugated = &(a * &sum_b.d_inverse) * &a_inv;
            let sim_dev = deviation(&sum_c.d_inverse, &conjugated);
            report.push_check("similar_sum_conjugate", sim_dev, sim_dev <= tol.residual_rel);
        }
    }

    Ok(finish(report, true, dev, Some(candidate), Some(oracle), tol))
}

/// Drazin inverse of `[[A1, 0], [A3, A2]]` read off a partition of an
/// assembled matrix, checked against the direct route.
pub fn block_formula_check(
    m: &ComplexMatrix,
    split: usize,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if split == 0 || split >= n {
        return Err(Error::PreconditionViolated(format!(
            "split {split} must lie strictly inside dimension {n}"
        )));
    }
    let mut report = VerificationReport::new(FormulaId::Block22.name());
    let a1 = m.block(0, 0, split, split);
    let a2 = m.block(split, split, n - split, n - split);
    let a3 = m.block(split, 0, n - split, split);
    let upper = m.block(0, split, split, n - split);
    let r = rel_residual(upper.norm_fro(), m.norm_fro().max(1.0));
    report.push_check("upper_right_block_zero", r, r <= tol.residual_rel);
    if !report.hypotheses_pass() {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let formula = block_triangular_drazin(&a1, &a2, &a3, tol)?;
    let direct = drazin_inverse(m, tol)?;
    let dev = deviation(&formula, &direct.d_inverse);

    // diagonal blocks of the direct inverse reproduce the per-block inverses
    let d1 = drazin_inverse(&a1, tol)?.d_inverse;
    let d2 = drazin_inverse(&a2, tol)?.d_inverse;
    let dev_diag = deviation(&direct.d_inverse.block(0, 0, split, split), &d1)
        .max(deviation(
            &direct.d_inverse.block(split, split, n - split, n - split),
            &d2,
        ));
    report.push_check("diagonal_blocks_match", dev_diag, dev_diag <= tol.residual_rel);

    Ok(finish(report, true, dev, Some(formula), Some(direct.d_inverse), tol))
}

/// Hypothesis-and-conclusion suite for the named theorem.
pub fn check_hypotheses(
    which: HypothesisId,
    inputs: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<VerificationReport> {
    if inputs.len() != which.arity() {
        return Err(Error::Arity {
            expected: which.arity(),
            got: inputs.len(),
        });
    }
    for pair in inputs.windows(2) {
        require_same_square(&pair[0], &pair[1])?;
    }
    match which {
        HypothesisId::Thm27 => thm_2_7(&inputs[0], &inputs[1], tol),
        HypothesisId::Thm211 => thm_2_11(&inputs[0], &inputs[1], &inputs[2], tol),
        HypothesisId::Thm212 => thm_2_12(&inputs[0], &inputs[1], tol),
        HypothesisId::Cor35 => cor_3_5(&inputs[0], &inputs[1], tol),
        HypothesisId::Thm44 => thm_4_4(&inputs[0], &inputs[1], &inputs[2], tol),
        HypothesisId::Prop45 => prop_4_5(&inputs[0], &inputs[1], &inputs[2], tol),
    }
}

fn thm_2_7(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(HypothesisId::Thm27.name());
    let weak_ok = ab_weak_row(&mut report, a, b, tol)?;
    if !weak_ok {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }
    // In finite dimension every operator is Drazin invertible, so the
    // theorem's four-way equivalence is vacuous; what is checked instead is
    // that each representation reconstructs the same inverse.
    report.push_check("finite_dim_existence_vacuous", 0.0, true);
    let mut dev: f64 = 0.0;
    for id in [FormulaId::Cor210I, FormulaId::Cor210II, FormulaId::Cor210III] {
        let sub = sum_representation(id, a, b, tol)?;
        report.push_check(
            format!("representation_{}", id.name()),
            sub.deviation,
            sub.deviation <= tol.residual_rel,
        );
        dev = dev.max(sub.deviation);
    }
    Ok(finish(report, true, dev, None, None, tol))
}

fn projected_blocks(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix, f64)> {
    // (A1, A2, B1, B2, offdiag norm of B) in the core-nilpotent basis of A.
    let n = a.nrows();
    let (split, _) = core_nilpotent_split(a, tol)?;
    let q_inv = try_inverse(&split.basis_change)
        .ok_or_else(|| Error::SingularResolvent("basis change is singular".into()))?;
    let b_t = &(&q_inv * b) * &split.basis_change;
    let r = split.core_block.nrows();
    let b1 = b_t.block(0, 0, r, r);
    let b2 = b_t.block(r, r, n - r, n - r);
    let off =
        b_t.block(0, r, r, n - r).norm_fro() + b_t.block(r, 0, n - r, r).norm_fro();
    Ok((split.core_block, split.nilpotent_block, b1, b2, off))
}

fn thm_2_11(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(HypothesisId::Thm211.name());
    let na = a.norm_fro().max(1.0);
    let nb = b.norm_fro().max(1.0);
    let nc = c.norm_fro().max(1.0);

    let nil_ok = nilpotent_row(&mut report, "b_nilpotent", b, b.norm_fro(), tol)?;
    let weak_ok = weak_row(&mut report, "b_weak", b, a, tol)?;

    let ad = drazin_inverse(a, tol)?;
    let aad = a * &ad.d_inverse;
    let a2 = a * a;
    let comm2 = &(&a2 * b) - &(b * &a2);
    let r1 = rel_residual(aad.matmul(&comm2)?.norm_fro(), na * na * nb);
    report.push_check("aad_squared_comm_left", r1, r1 <= tol.residual_rel);
    let r2 = rel_residual(comm2.matmul(&aad)?.norm_fro(), na * na * nb);
    report.push_check("aad_squared_comm_right", r2, r2 <= tol.residual_rel);
    let e1 = &(a * b) - &(c * a);
    let e2 = &(b * a) - &(a * c);
    let r3 = rel_residual(ad.projector.matmul(&e1)?.norm_fro(), na * nb.max(nc));
    report.push_check("projector_kills_ab_ca", r3, r3 <= tol.residual_rel);
    let r4 = rel_residual(ad.projector.matmul(&e2)?.norm_fro(), na * nb.max(nc));
    report.push_check("projector_kills_ba_ac", r4, r4 <= tol.residual_rel);

    if !(nil_ok && weak_ok && report.hypotheses_pass()) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    // block-split intermediates in the core-nilpotent basis of A
    let (a1, a2_blk, b1, b2, off) = projected_blocks(a, b, tol)?;
    let r_off = rel_residual(off, nb);
    report.push_check("b_block_diagonal", r_off, r_off <= tol.residual_rel * 1e2);
    let core_sum = &a1 + &b1;
    let core_ok = rank(&core_sum, tol) == core_sum.nrows();
    report.push_check("core_sum_invertible", if core_ok { 0.0 } else { 1.0 }, core_ok);
    let nil_sum_ok =
        nilpotency_index_scaled(&(&a2_blk + &b2), sum_context(a, b), tol)?.is_some();
    report.push_check("nilpotent_sum_nilpotent", if nil_sum_ok { 0.0 } else { 1.0 }, nil_sum_ok);

    let sum_d = drazin_inverse_scaled(&(a + b), sum_context(a, b), tol)?;
    let axioms = verify_drazin_axioms(&(a + b), &sum_d.d_inverse, sum_d.index, tol)?;
    report.push_check("sum_drazin_axioms", axioms.deviation, axioms.passed());

    let dev = report
        .hypotheses
        .iter()
        .map(|h| if h.residual.is_finite() { h.residual } else { 1.0 })
        .fold(0.0, f64::max);
    Ok(finish(report, true, dev, None, None, tol))
}

fn thm_2_12(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(HypothesisId::Thm212.name());
    let na = a.norm_fro().max(1.0);
    let nb = b.norm_fro().max(1.0);

    let weak_ok = weak_row(&mut report, "a_weak", a, b, tol)?;
    let ad = drazin_inverse(a, tol)?;
    let proj_a = ad.projector.matmul(a)?;
    let proj_b = ad.projector.matmul(b)?;
    let proj_ok = weak_row(&mut report, "projected_pair_b_weak", &proj_b, &proj_a, tol)?;
    let aad = a * &ad.d_inverse;
    let prod = &(&aad * a) * b;
    let r = rel_residual(prod.norm_fro(), na * na * nb);
    report.push_check("core_product_vanishes", r, r <= tol.residual_rel);

    if !(weak_ok && proj_ok && report.hypotheses_pass()) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let (a1, a2_blk, b1, b2, off) = projected_blocks(a, b, tol)?;
    let r_off = rel_residual(off, nb);
    report.push_check("b_block_diagonal", r_off, r_off <= tol.residual_rel * 1e2);
    let r_core = rel_residual(a1.matmul(&b1)?.norm_fro(), na * nb);
    report.push_check("core_blocks_product_zero", r_core, r_core <= tol.residual_rel);
    let nil_sum = &a2_blk + &b2;
    let nil_d = drazin_inverse_scaled(&nil_sum, sum_context(a, b), tol)?;
    let axioms = verify_drazin_axioms(&nil_sum, &nil_d.d_inverse, nil_d.index, tol)?;
    report.push_check("nilpotent_block_sum_axioms", axioms.deviation, axioms.passed());

    let sum_d = drazin_inverse_scaled(&(a + b), sum_context(a, b), tol)?;
    let sum_axioms = verify_drazin_axioms(&(a + b), &sum_d.d_inverse, sum_d.index, tol)?;
    report.push_check("sum_drazin_axioms", sum_axioms.deviation, sum_axioms.passed());

    let dev = report
        .hypotheses
        .iter()
        .map(|h| h.residual)
        .fold(0.0, f64::max);
    Ok(finish(report, true, dev, None, None, tol))
}

fn cor_3_5(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(HypothesisId::Cor35.name());
    let weak_ok = weak_row(&mut report, "a_weak", a, b, tol)?;
    let ad = drazin_inverse(a, tol)?;
    let aad = a * &ad.d_inverse;
    let core_a = &aad * a;
    let core_b = &aad * b;
    let core_ok = weak_row(&mut report, "core_pair_b_weak", &core_b, &core_a, tol)?;

    if !(weak_ok && core_ok) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let bd = drazin_inverse(b, tol)?;
    let candidate = &bd.d_inverse * &ad.d_inverse;
    let oracle = drazin_inverse_scaled(&(a * b), product_context(a, b), tol)?.d_inverse;
    let dev = deviation(&candidate, &oracle);
    Ok(finish(report, true, dev, Some(candidate), Some(oracle), tol))
}

fn invertible_row(
    report: &mut VerificationReport,
    name: &str,
    m: &ComplexMatrix,
    tol: &Tolerance,
) -> bool {
    let sv = crate::linalg::singular_values(m);
    let ratio = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    };
    let pass = rank(m, tol) == m.nrows();
    report.push_check(name, 1.0 - ratio.min(1.0), pass);
    pass
}

fn thm_4_4(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(HypothesisId::Thm44.name());
    let na = a.norm_fro().max(1.0);
    let nb = b.norm_fro().max(1.0);
    let nc = c.norm_fro().max(1.0);

    let b_inv = invertible_row(&mut report, "b_invertible", b, tol);
    let c_inv = invertible_row(&mut report, "c_invertible", c, tol);
    let r1 = rel_residual((&(a * b) - &(c * a)).norm_fro(), na * nb.max(nc));
    report.push_check("ab_eq_ca", r1, r1 <= tol.residual_rel);
    let r2 = rel_residual((&(b * a) - &(a * c)).norm_fro(), na * nb.max(nc));
    report.push_check("ba_eq_ac", r2, r2 <= tol.residual_rel);
    report.push_check("aad_sum_drazin_vacuous", 0.0, true);

    if !(b_inv && c_inv && report.hypotheses_pass()) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let (_, a2_blk, b1, b2, off) = projected_blocks(a, b, tol)?;
    let r_off = rel_residual(off, nb);
    report.push_check("b_block_diagonal", r_off, r_off <= tol.residual_rel * 1e2);
    let blocks_inv = rank(&b1, tol) == b1.nrows() && rank(&b2, tol) == b2.nrows();
    report.push_check(
        "b_blocks_invertible",
        if blocks_inv { 0.0 } else { 1.0 },
        blocks_inv,
    );
    let nil_sum = &a2_blk + &b2;
    let nil_inv = rank(&nil_sum, tol) == nil_sum.nrows();
    report.push_check(
        "nilpotent_part_sum_invertible",
        if nil_inv { 0.0 } else { 1.0 },
        nil_inv,
    );

    let sum_d = drazin_inverse_scaled(&(a + b), sum_context(a, b), tol)?;
    let axioms = verify_drazin_axioms(&(a + b), &sum_d.d_inverse, sum_d.index, tol)?;
    report.push_check("sum_drazin_axioms", axioms.deviation, axioms.passed());

    let dev = report
        .hypotheses
        .iter()
        .map(|h| h.residual)
        .fold(0.0, f64::max);
    Ok(finish(report, true, dev, None, None, tol))
}

fn prop_4_5(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(HypothesisId::Prop45.name());
    let na = a.norm_fro().max(1.0);
    let nb = b.norm_fro().max(1.0);
    let nc = c.norm_fro().max(1.0);

    let b_inv = invertible_row(&mut report, "b_invertible", b, tol);
    let c_inv = invertible_row(&mut report, "c_invertible", c, tol);
    let r0 = rel_residual((&(b * c) - &(c * b)).norm_fro(), nb * nc);
    report.push_check("bc_commute", r0, r0 <= tol.residual_rel);
    let r1 = rel_residual((&(a * b) - &(c * a)).norm_fro(), na * nb.max(nc));
    report.push_check("ab_eq_ca", r1, r1 <= tol.residual_rel);
    let r2 = rel_residual((&(b * a) - &(a * c)).norm_fro(), na * nb.max(nc));
    report.push_check("ba_eq_ac", r2, r2 <= tol.residual_rel);

    if !(b_inv && c_inv && report.hypotheses_pass()) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let a2 = a * a;
    let aca = &(a * c) * a;
    let aba = &(a * b) * a;
    let m = &a2 * b; // A M with M = AB
    let n_mat = aba.clone(); // A N with N = BA
    let r3 = rel_residual((&m - &aca).norm_fro(), na * na * nb.max(nc));
    report.push_check("a2b_eq_aca", r3, r3 <= tol.residual_rel);
    let r4 = rel_residual((&n_mat - &(&a2 * c)).norm_fro(), na * na * nb.max(nc));
    report.push_check("aba_eq_a2c", r4, r4 <= tol.residual_rel);

    let mut dev: f64 = r3.max(r4);
    for (name, target) in [("am_drazin_axioms", &m), ("an_drazin_axioms", &n_mat)] {
        let d = drazin_inverse(target, tol)?;
        let axioms = verify_drazin_axioms(target, &d.d_inverse, d.index, tol)?;
        report.push_check(name, axioms.deviation, axioms.passed());
        dev = dev.max(axioms.deviation);
    }
    Ok(finish(report, true, dev, None, None, tol))
}

/// Dispatch a formula verification from parsed CLI inputs.
pub fn verify_formula(
    id: FormulaId,
    inputs: &[ComplexMatrix],
    split: Option<usize>,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let need = |k: usize| -> Result<()> {
        if inputs.len() != k {
            Err(Error::Arity {
                expected: k,
                got: inputs.len(),
            })
        } else {
            Ok(())
        }
    };
    match id {
        FormulaId::SumNilpotentResolvent | FormulaId::SumNilpotentSeries => {
            need(2)?;
            verify_sum_nilpotent(id, &inputs[0], &inputs[1], tol)
        }
        FormulaId::Sum29 | FormulaId::Cor210I | FormulaId::Cor210II | FormulaId::Cor210III => {
            need(2)?;
            sum_representation(id, &inputs[0], &inputs[1], tol)
        }
        FormulaId::Product33 => {
            need(2)?;
            product_drazin(&inputs[0], &inputs[1], tol)
        }
        FormulaId::Involutory42 => {
            need(2)?;
            involutory_sum(&inputs[0], &inputs[1], tol)
        }
        FormulaId::Cline41 => {
            need(2)?;
            cline_transfer(&inputs[0], &inputs[1], tol)
        }
        FormulaId::Block22 => {
            need(1)?;
            let split = split.ok_or_else(|| {
                Error::PreconditionViolated("BLOCK_2_2 requires a --split index".into())
            })?;
            block_formula_check(&inputs[0], split, tol)
        }
    }
}

/// Lemma 2.5 check: A invertible, B nilpotent, b-weak, A^2B = BA^2 force
/// A+B invertible, with the finite Neumann sum reproducing the resolvent.
pub fn inverse_sum_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let n = require_same_square(a, b)?;
    let mut report = VerificationReport::new("LEMMA_2_5");
    let na = a.norm_fro().max(1.0);
    let nb = b.norm_fro().max(1.0);

    let a_inv_ok = invertible_row(&mut report, "a_invertible", a, tol);
    let nil_ok = nilpotent_row(&mut report, "b_nilpotent", b, b.norm_fro(), tol)?;
    let weak_ok = weak_row(&mut report, "b_weak", b, a, tol)?;
    let a2 = a * a;
    let r = rel_residual((&(&a2 * b) - &(b * &a2)).norm_fro(), na * na * nb);
    report.push_check("squared_commuting", r, r <= tol.residual_rel);
    if !(a_inv_ok && nil_ok && weak_ok && report.hypotheses_pass()) {
        return Ok(finish(report, false, 0.0, None, None, tol));
    }

    let sum = a + b;
    let sum_invertible = rank(&sum, tol) == n;
    report.push_check(
        "sum_invertible",
        if sum_invertible { 0.0 } else { 1.0 },
        sum_invertible,
    );
    if !sum_invertible {
        return Ok(finish(report, true, 1.0, None, None, tol));
    }

    let a_inv = try_inverse(a)
        .ok_or_else(|| Error::SingularResolvent("A passed rank check but LU failed".into()))?;
    // (I + A^{-1}B)^{-1} as the finite alternating sum of (A^{-2} AB)^k
    let ab = a * b;
    let am2 = &a_inv * &a_inv;
    let step = &am2 * &ab;
    let base = step.norm_fro().max(1.0);
    let neumann = adaptive_sum(n, n, n, base, 1.0, tol, |k| {
        let p = matrix_power(&step, k).expect("square");
        if k % 2 == 0 {
            p
        } else {
            -&p
        }
    });
    let resolvent = try_inverse(&(&ComplexMatrix::identity(n) + &(&a_inv * b)))
        .ok_or_else(|| Error::SingularResolvent("I + A^{-1}B singular".into()))?;
    let dev = deviation(&neumann, &resolvent);
    Ok(finish(report, true, dev, Some(neumann), Some(resolvent), tol))
}

/// Lemma 2.3 checks for weakly commutative pairs with a nilpotent member.
pub fn nilpotent_propagation(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(Option<usize>, Option<usize>)> {
    let n = require_same_square(a, b)?;
    let ab = a.matmul(b)?;
    let prod_idx = nilpotency_index_scaled(&ab, product_context(a, b), tol)?;
    // A+B nilpotency is checked out to 3n steps, matching the proof's bound
    let sum = a.checked_add(b)?;
    let mut power = ComplexMatrix::identity(n);
    let mut sum_idx = None;
    for k in 1..=3 * n {
        power = &power * &sum;
        if rank(&power, tol) == 0 {
            sum_idx = Some(k);
            break;
        }
    }
    Ok((prod_idx, sum_idx))
}
