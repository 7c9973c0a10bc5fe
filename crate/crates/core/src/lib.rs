//! Dense complex-matrix toolkit for Drazin inverses under weak
//! commutativity: witness solving, classification, closed-form
//! verification against a decomposition oracle, and seeded instance
//! generation.
//!
//! The central relation: a pair (A, B) is *A-weakly commutative* when some
//! C satisfies `AB = CA` and `BA = AC`; *{A,B}-weakly commutative* when the
//! relation holds in both roles. Every additive and multiplicative
//! representation verified here assumes some slice of that structure, and
//! each verification compares a closed form against the inverse computed
//! directly from the core-nilpotent decomposition.

pub mod drazin;
pub mod error;
pub mod exact;
pub mod formulas;
pub mod generators;
pub mod linalg;
pub mod matrix;
pub mod report;
pub mod suite;
pub mod weakcommute;

pub use drazin::{
    block_triangular_drazin, core_nilpotent_split, core_nilpotent_split_scaled, drazin_index,
    drazin_index_scaled, drazin_inverse, drazin_inverse_scaled, drazin_oracle, nilpotency_index,
    nilpotency_index_scaled, spectral_norm, verify_drazin_axioms, CoreNilpotentSplit, DrazinResult,
};
pub use error::{Error, Result};
pub use formulas::{
    check_hypotheses, cline_transfer, involutory_sum, product_drazin, sum_drazin_nilpotent,
    sum_representation, verify_formula, FormulaId, HypothesisId,
};
pub use generators::{
    generate, random_drazin_matrix, random_matrix, self_check, Family, FamilySpec,
    GeneratedInstance,
};
pub use matrix::{deviation, ComplexMatrix, Tolerance};
pub use report::{HypothesisCheck, Verdict, VerificationReport};
pub use suite::{run_suite, SuiteConfig, SuiteReport};
pub use weakcommute::{
    classify_pair, commutation_identities, solve_witness, RelationClass, RelationFlag,
    WitnessResult,
};
