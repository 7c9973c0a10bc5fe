//! Batch verification over seed and dimension ranges, covering every
//! formula family with a deterministic schedule.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formulas::{cline_transfer, verify_formula, FormulaId};
use crate::generators::{generate, random_matrix, Family, FamilySpec};
use crate::matrix::Tolerance;
use crate::report::{Verdict, VerificationReport};

/// What a suite run should sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed_lo: u64,
    /// Inclusive.
    pub seed_hi: u64,
    pub dim_lo: usize,
    /// Inclusive.
    pub dim_hi: usize,
    pub tol: Tolerance,
}

impl SuiteConfig {
    pub fn new(seed_lo: u64, seed_hi: u64, dim_lo: usize, dim_hi: usize, tol: Tolerance) -> Self {
        Self {
            seed_lo,
            seed_hi,
            dim_lo,
            dim_hi,
            tol,
        }
    }
}

/// Aggregated suite outcome; reports are ordered by (family, seed).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub hypotheses_not_met: usize,
    pub reports: Vec<VerificationReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn dim_for(cfg: &SuiteConfig, seed: u64) -> usize {
    let span = cfg.dim_hi.saturating_sub(cfg.dim_lo) + 1;
    cfg.dim_lo + (seed as usize) % span
}

/// Run the full schedule: each seed exercises the nilpotent-sum pair, the
/// singular-sum representations, the product formula, Cline's formula on
/// an unstructured pair, and the involutory construction.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut reports = Vec::new();
    for seed in cfg.seed_lo..=cfg.seed_hi {
        let dim = dim_for(cfg, seed).max(2);

        let nil = generate(&FamilySpec {
            family: Family::BlockSplit,
            dim,
            seed,
            params: vec![0.0],
        })?;
        for id in [FormulaId::SumNilpotentResolvent, FormulaId::SumNilpotentSeries] {
            let r = verify_formula(id, &[nil.a.clone(), nil.b.clone()], None, &cfg.tol)?
                .with_provenance(Family::BlockSplit.name(), seed);
            reports.push(r);
        }

        let singular = generate(&FamilySpec {
            family: Family::BlockSplit,
            dim,
            seed,
            params: vec![1.0],
        })?;
        for id in [
            FormulaId::Sum29,
            FormulaId::Cor210I,
            FormulaId::Cor210II,
            FormulaId::Cor210III,
        ] {
            let r = verify_formula(id, &[singular.a.clone(), singular.b.clone()], None, &cfg.tol)?
                .with_provenance(Family::BlockSplit.name(), seed);
            reports.push(r);
        }

        let general = generate(&FamilySpec {
            family: Family::BlockSplit,
            dim,
            seed,
            params: vec![2.0],
        })?;
        let r = verify_formula(
            FormulaId::Product33,
            &[general.a.clone(), general.b.clone()],
            None,
            &cfg.tol,
        )?
        .with_provenance(Family::BlockSplit.name(), seed);
        reports.push(r);

        let x = random_matrix(dim, seed.wrapping_mul(2).wrapping_add(1));
        let y = random_matrix(dim, seed.wrapping_mul(2).wrapping_add(2));
        let r = cline_transfer(&x, &y, &cfg.tol)?.with_provenance("RANDOM_DENSE", seed);
        reports.push(r);

        let invol = generate(&FamilySpec {
            family: Family::InvolutorySim,
            dim: 0,
            seed,
            params: vec![],
        })?;
        let r = verify_formula(
            FormulaId::Involutory42,
            &[invol.a.clone(), invol.b.clone()],
            None,
            &cfg.tol,
        )?
        .with_provenance(Family::InvolutorySim.name(), seed);
        reports.push(r);
    }

    reports.sort_by(|a, b| {
        (a.family.as_deref(), a.seed, a.formula.as_str()).cmp(&(
            b.family.as_deref(),
            b.seed,
            b.formula.as_str(),
        ))
    });

    let total = reports.len();
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    let failed = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let hnm = total - passed - failed;
    Ok(SuiteReport {
        total,
        passed,
        failed,
        hypotheses_not_met: hnm,
        reports,
    })
}
