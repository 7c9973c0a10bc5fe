//! Seeded instance families: fixed textbook pairs, structured random
//! constructions with known relation class, and perturbed negative controls.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{verify_formula, FormulaId};
use crate::linalg::{rank, singular_values, try_inverse};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::report::Verdict;
use crate::weakcommute::{classify_pair, RelationFlag};

const MAX_DRAWS: usize = 100;

/// Instance families addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "PAPER_EX_1_6")]
    PaperEx16,
    #[serde(rename = "PAPER_EX_2_4")]
    PaperEx24,
    #[serde(rename = "PAPER_EX_2_6")]
    PaperEx26,
    #[serde(rename = "PAPER_EX_3_4")]
    PaperEx34,
    #[serde(rename = "PAPER_EX_4_3_BLOCK")]
    PaperEx43Block,
    #[serde(rename = "CONJUGATION")]
    Conjugation,
    #[serde(rename = "BLOCK_SPLIT")]
    BlockSplit,
    #[serde(rename = "INVOLUTORY_SIM")]
    InvolutorySim,
    #[serde(rename = "NEGATIVE_CONTROL")]
    NegativeControl,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::PaperEx16,
        Family::PaperEx24,
        Family::PaperEx26,
        Family::PaperEx34,
        Family::PaperEx43Block,
        Family::Conjugation,
        Family::BlockSplit,
        Family::InvolutorySim,
        Family::NegativeControl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::PaperEx16 => "PAPER_EX_1_6",
            Family::PaperEx24 => "PAPER_EX_2_4",
            Family::PaperEx26 => "PAPER_EX_2_6",
            Family::PaperEx34 => "PAPER_EX_3_4",
            Family::PaperEx43Block => "PAPER_EX_4_3_BLOCK",
            Family::Conjugation => "CONJUGATION",
            Family::BlockSplit => "BLOCK_SPLIT",
            Family::InvolutorySim => "INVOLUTORY_SIM",
            Family::NegativeControl => "NEGATIVE_CONTROL",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::PreconditionViolated(format!("unknown family {s}")))
    }
}

/// Which structured pair a BLOCK_SPLIT draw targets (params[0]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockVariant {
    /// A invertible-plus-nilpotent, B nilpotent: additive-nilpotent setting.
    BNilpotent,
    /// Both A and B singular with positive index.
    BothSingular,
    /// Generic mix; both Drazin invertible.
    General,
}

impl BlockVariant {
    fn from_param(p: f64) -> Self {
        match p as i64 {
            1 => BlockVariant::BothSingular,
            2 => BlockVariant::General,
            _ => BlockVariant::BNilpotent,
        }
    }
}

/// JSON-addressable generator request.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    /// 0 means "family default".
    #[serde(default)]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    /// Family-specific knobs; see each constructor.
    #[serde(default)]
    pub params: Vec<f64>,
}

/// A generated pair with its promised relation class and formula outcomes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratedInstance {
    pub family: Family,
    pub seed: u64,
    pub dim: usize,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    /// A known witness for the a-weak relation, when the construction
    /// provides one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<ComplexMatrix>,
    pub expected_present: Vec<RelationFlag>,
    pub expected_absent: Vec<RelationFlag>,
    /// Formula name -> promised verdict.
    pub expected_outcomes: BTreeMap<String, Verdict>,
    /// For NEGATIVE_CONTROL: the hypothesis row the perturbation breaks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perturbed_hypothesis: Option<String>,
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2f64.sqrt()
}

fn random_square(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..n * n).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(n, n, data).expect("shape by construction")
}

fn sv_ratio(m: &ComplexMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Invertible matrix with `sv_ratio >= min_ratio` by construction: the
/// unitary factor of a Gaussian draw times `I + N` with `N` strictly upper
/// triangular and `||N||_2 <= s < 1`, so the singular values of the product
/// lie in `[1 - s, 1 + s]`. Plain rejection sampling on the ratio is not
/// viable: for 6x6 Gaussian draws, `sv_ratio >= 0.2` already has only ~2%
/// acceptance, and 100 straight rejections become routine by dim 7.
fn random_invertible(rng: &mut ChaCha8Rng, n: usize, min_ratio: f64) -> Result<ComplexMatrix> {
    let q = random_square(rng, n).into_dmatrix().qr().q();
    let target = 0.9 * (1.0 - min_ratio) / (1.0 + min_ratio);
    let mut upper = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            upper.set(i, j, gaussian(rng));
        }
    }
    let norm = upper.norm_fro();
    if norm > 0.0 {
        upper = upper.scale(Complex64::new(target / norm, 0.0));
    }
    let factor = &ComplexMatrix::identity(n) + &upper;
    let m = ComplexMatrix::from_dmatrix(q * factor.as_dmatrix());
    if sv_ratio(&m) >= min_ratio {
        Ok(m)
    } else {
        Err(Error::DegenerateDraw { attempts: 1 })
    }
}

fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let p = random_invertible(rng, n, 0.1)?;
    let p_inv = try_inverse(&p).ok_or(Error::DegenerateDraw { attempts: MAX_DRAWS })?;
    Ok((p, p_inv))
}

/// Invertible r x r block with eigenvalue moduli confined to [0.8, 1.25],
/// so high matrix powers stay well scaled.
fn controlled_core(rng: &mut ChaCha8Rng, r: usize) -> Result<ComplexMatrix> {
    let mut d = ComplexMatrix::zeros(r, r);
    for i in 0..r {
        let rho = 0.8 + 0.45 * rng.gen::<f64>();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        d.set(i, i, Complex64::from_polar(rho, theta));
    }
    let v = random_invertible(rng, r, 0.2)?;
    let v_inv = try_inverse(&v).ok_or(Error::DegenerateDraw { attempts: MAX_DRAWS })?;
    Ok(&(&v * &d) * &v_inv)
}

/// Single nilpotent Jordan-like block with random nonzero superdiagonal.
fn jordan_nilpotent(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        let mut z = gaussian(rng);
        if z.norm() < 0.3 {
            z = Complex64::new(1.0, 0.0);
        }
        m.set(i, i + 1, z);
    }
    m
}

struct Primitive {
    a: ComplexMatrix,
    b: ComplexMatrix,
    /// Witness for a-weak: AB = C A, BA = A C.
    c: ComplexMatrix,
}

/// Commuting polynomial pair: B = p(A), witnessed by C = B itself.
fn commuting_pair(rng: &mut ChaCha8Rng, n: usize, nilpotent: bool) -> Result<Primitive> {
    for _ in 0..MAX_DRAWS {
        let a = if nilpotent {
            jordan_nilpotent(rng, n)
        } else {
            controlled_core(rng, n)?
        };
        let c0 = if nilpotent {
            Complex64::new(0.0, 0.0)
        } else {
            gaussian(rng) + Complex64::new(1.0, 0.0)
        };
        let mut c1 = gaussian(rng);
        if c1.norm() < 0.3 {
            c1 = Complex64::new(1.0, 0.0);
        }
        let c2 = gaussian(rng) * 0.5;
        let a2 = &a * &a;
        let b = &(&ComplexMatrix::identity(n).scale(c0) + &a.scale(c1)) + &a2.scale(c2);
        if nilpotent || rank(&b, &Tolerance::default()) == n {
            let c = b.clone();
            return Ok(Primitive { a, b, c });
        }
    }
    Err(Error::DegenerateDraw { attempts: MAX_DRAWS })
}

/// Anticommuting pair of size 2m: A = diag(M, -M), B = [[0, X], [0, 0]]
/// with X a polynomial in M; then AB = -BA and C = -B is an a-weak
/// witness while -A witnesses b-weak.
fn anticommuting_pair(rng: &mut ChaCha8Rng, m: usize, invertible: bool) -> Result<Primitive> {
    let core = if invertible {
        controlled_core(rng, m)?
    } else {
        jordan_nilpotent(rng, m)
    };
    let mut c0 = gaussian(rng);
    if c0.norm() < 0.3 {
        c0 = Complex64::new(1.0, 0.0);
    }
    let mut c1 = gaussian(rng);
    if c1.norm() < 0.3 {
        c1 = Complex64::new(0.0, 1.0);
    }
    let x = &ComplexMatrix::identity(m).scale(c0) + &core.scale(c1);

    let n = 2 * m;
    let mut a = ComplexMatrix::zeros(n, n);
    let mut b = ComplexMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            a.set(i, j, core.get(i, j));
            a.set(m + i, m + j, -core.get(i, j));
            b.set(i, m + j, x.get(i, j));
        }
    }
    let c = -&b;
    Ok(Primitive { a, b, c })
}

/// Scalar 1x1 filler block.
fn scalar_block(rng: &mut ChaCha8Rng, b_zero: bool) -> Primitive {
    let alpha = Complex64::from_polar(0.8 + 0.45 * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>());
    let beta = if b_zero {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::from_polar(0.8 + 0.45 * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>())
    };
    Primitive {
        a: ComplexMatrix::new(1, 1, vec![alpha]).expect("1x1"),
        b: ComplexMatrix::new(1, 1, vec![beta]).expect("1x1"),
        c: ComplexMatrix::new(1, 1, vec![beta]).expect("1x1"),
    }
}

fn assemble(parts: Vec<Primitive>) -> Primitive {
    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("at least one block");
    for p in iter {
        acc = Primitive {
            a: acc.a.direct_sum(&p.a),
            b: acc.b.direct_sum(&p.b),
            c: acc.c.direct_sum(&p.c),
        };
    }
    acc
}

fn conjugate(p: Primitive, sim: &ComplexMatrix, sim_inv: &ComplexMatrix) -> Primitive {
    Primitive {
        a: &(sim * &p.a) * sim_inv,
        b: &(sim * &p.b) * sim_inv,
        c: &(sim * &p.c) * sim_inv,
    }
}

fn block_split_primitive(
    rng: &mut ChaCha8Rng,
    dim: usize,
    variant: BlockVariant,
) -> Result<Primitive> {
    if dim < 2 {
        return Err(Error::InvalidDim {
            family: Family::BlockSplit.name().into(),
            dim,
        });
    }
    let mut parts: Vec<Primitive> = Vec::new();
    match variant {
        BlockVariant::BNilpotent => {
            // anticommuting block (A invertible there, B nilpotent), then
            // nilpotent commuting filler; B stays globally nilpotent
            let m = 1 + rng.gen_range(0..dim / 2);
            let m = m.min(dim / 2);
            parts.push(anticommuting_pair(rng, m, true)?);
            let mut rem = dim - 2 * m;
            if rem == 1 {
                parts.push(scalar_block(rng, true));
                rem = 0;
            }
            if rem >= 2 {
                parts.push(commuting_pair(rng, rem, true)?);
            }
        }
        BlockVariant::BothSingular => {
            let nil = if dim >= 5 && rng.gen_bool(0.5) { 3 } else { 2 };
            let nil = nil.min(dim);
            parts.push(commuting_pair(rng, nil, true)?);
            let rem = dim - nil;
            if rem == 1 {
                parts.push(scalar_block(rng, false));
            } else if rem >= 2 {
                parts.push(commuting_pair(rng, rem, false)?);
            }
        }
        BlockVariant::General => {
            let mut rem = dim;
            while rem > 0 {
                if rem >= 2 && rng.gen_bool(0.5) {
                    let take = 2 + rng.gen_range(0..=(rem - 2).min(2));
                    let coin = rng.gen_bool(0.4);
                    let invertible = rng.gen_bool(0.7);
                    let nilpotent = rng.gen_bool(0.3);
                    if take % 2 == 0 && coin {
                        parts.push(anticommuting_pair(rng, take / 2, invertible)?);
                    } else {
                        parts.push(commuting_pair(rng, take, nilpotent)?);
                    }
                    rem -= take;
                } else {
                    let b_zero = rng.gen_bool(0.2);
                    parts.push(scalar_block(rng, b_zero));
                    rem -= 1;
                }
            }
        }
    }
    let assembled = assemble(parts);
    let (sim, sim_inv) = random_similarity(rng, dim)?;
    Ok(conjugate(assembled, &sim, &sim_inv))
}

fn paper_ex_1_6() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let b = ComplexMatrix::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]);
    let c = ComplexMatrix::from_real(&[&[0.0, 0.0], &[-1.0, 0.0]]);
    (a, b, c)
}

fn paper_ex_2_4() -> (ComplexMatrix, ComplexMatrix) {
    let a = ComplexMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]);
    let b = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
    (a, b)
}

fn paper_ex_3_4(x: Complex64, y: Complex64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let z = Complex64::new(0.0, 0.0);
    let a = ComplexMatrix::new(3, 3, vec![z, x, z, x, z, x, z, x, z]).expect("3x3");
    let b = ComplexMatrix::new(3, 3, vec![y, z, z, z, -y, z, z, z, y]).expect("3x3");
    let c1 = -&b;
    (a, b, c1)
}

/// The two 3x3 involutory blocks acting on each coordinate triple.
pub fn paper_ex_4_3_blocks() -> (ComplexMatrix, ComplexMatrix) {
    let t = ComplexMatrix::from_real(&[
        &[-1.0, 0.0, 0.0],
        &[0.0, 1.0, -10.0],
        &[0.0, 0.0, -1.0],
    ]);
    let s = ComplexMatrix::from_real(&[
        &[-1.0, 0.0, 2.0],
        &[0.0, -1.0, -10.0],
        &[0.0, 0.0, 1.0],
    ]);
    (t, s)
}

/// Random matrix with a prescribed core/nilpotent structure: invertible
/// core of the given rank with controlled spectrum, nilpotent remainder,
/// conjugated by a well-conditioned similarity.
pub fn random_drazin_matrix(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDim {
            family: "random_drazin_matrix".into(),
            dim,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = rng.gen_range(0..=dim);
    let mut m = ComplexMatrix::zeros(dim, dim);
    if r > 0 {
        let core = controlled_core(&mut rng, r)?;
        for i in 0..r {
            for j in 0..r {
                m.set(i, j, core.get(i, j));
            }
        }
    }
    if dim - r > 0 {
        let nil = jordan_nilpotent(&mut rng, dim - r);
        for i in 0..dim - r {
            for j in 0..dim - r {
                m.set(r + i, r + j, nil.get(i, j));
            }
        }
    }
    let (sim, sim_inv) = random_similarity(&mut rng, dim)?;
    Ok(&(&sim * &m) * &sim_inv)
}

/// Unstructured dense draw (for the unconditional formulas).
pub fn random_matrix(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_square(&mut rng, dim)
}

fn rank_one_bump(rng: &mut ChaCha8Rng, target: &ComplexMatrix, rel: f64) -> ComplexMatrix {
    let n = target.nrows();
    let u = ComplexMatrix::new(n, 1, (0..n).map(|_| gaussian(rng)).collect()).expect("col");
    let v = ComplexMatrix::new(1, n, (0..n).map(|_| gaussian(rng)).collect()).expect("row");
    let bump = &u * &v;
    let scale = rel * target.norm_fro().max(1.0) / bump.norm_fro().max(f64::MIN_POSITIVE);
    bump.scale(Complex64::new(scale, 0.0))
}

fn default_dim(family: Family, dim: usize) -> Result<usize> {
    let d = match family {
        Family::PaperEx16 | Family::PaperEx24 | Family::PaperEx26 => 2,
        Family::PaperEx34 => 3,
        Family::PaperEx43Block | Family::InvolutorySim => 3,
        Family::Conjugation | Family::BlockSplit => {
            if dim == 0 {
                4
            } else {
                dim
            }
        }
        Family::NegativeControl => dim, // checked per base family
    };
    match family {
        Family::Conjugation | Family::BlockSplit => {
            if d < 2 {
                return Err(Error::InvalidDim {
                    family: family.name().into(),
                    dim: d,
                });
            }
            Ok(d)
        }
        Family::NegativeControl => Ok(d),
        _ => {
            if dim != 0 && dim != d {
                return Err(Error::InvalidDim {
                    family: family.name().into(),
                    dim,
                });
            }
            Ok(d)
        }
    }
}

/// Build the instance a spec describes. Deterministic in (family, dim,
/// seed, params).
pub fn generate(spec: &FamilySpec) -> Result<GeneratedInstance> {
    let dim = default_dim(spec.family, spec.dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = GeneratedInstance {
        family: spec.family,
        seed: spec.seed,
        dim,
        a: ComplexMatrix::zeros(dim, dim),
        b: ComplexMatrix::zeros(dim, dim),
        witness: None,
        expected_present: Vec::new(),
        expected_absent: Vec::new(),
        expected_outcomes: BTreeMap::new(),
        perturbed_hypothesis: None,
    };

    match spec.family {
        Family::PaperEx16 | Family::PaperEx26 => {
            let (a, b, c) = paper_ex_1_6();
            out.a = a;
            out.b = b;
            out.witness = Some(c);
            out.expected_present = vec![RelationFlag::AWeak, RelationFlag::SquaredCommuting];
            out.expected_absent = vec![
                RelationFlag::Commuting,
                RelationFlag::BWeak,
                RelationFlag::AbWeak,
                RelationFlag::ChenSheibani,
            ];
            out.expected_outcomes
                .insert(FormulaId::SumNilpotentResolvent.name().into(), Verdict::HypothesesNotMet);
            out.expected_outcomes
                .insert(FormulaId::Product33.name().into(), Verdict::HypothesesNotMet);
        }
        Family::PaperEx24 => {
            let (a, b) = paper_ex_2_4();
            out.a = a;
            out.b = b;
            out.expected_present = vec![RelationFlag::SquaredCommuting];
            out.expected_absent = vec![
                RelationFlag::Commuting,
                RelationFlag::AWeak,
                RelationFlag::BWeak,
                RelationFlag::AbWeak,
                RelationFlag::ChenSheibani,
            ];
            out.expected_outcomes
                .insert(FormulaId::SumNilpotentResolvent.name().into(), Verdict::HypothesesNotMet);
        }
        Family::PaperEx34 => {
            let (x, y) = match spec.params.len() {
                0 => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
                2 => (
                    Complex64::new(spec.params[0], 0.0),
                    Complex64::new(spec.params[1], 0.0),
                ),
                4 => (
                    Complex64::new(spec.params[0], spec.params[1]),
                    Complex64::new(spec.params[2], spec.params[3]),
                ),
                _ => {
                    return Err(Error::PreconditionViolated(
                        "PAPER_EX_3_4 takes params [x, y] or [xr, xi, yr, yi]".into(),
                    ))
                }
            };
            if x.norm() == 0.0 || y.norm() == 0.0 {
                return Err(Error::PreconditionViolated(
                    "PAPER_EX_3_4 requires nonzero x and y".into(),
                ));
            }
            let (a, b, c) = paper_ex_3_4(x, y);
            out.a = a;
            out.b = b;
            out.witness = Some(c);
            out.expected_present = vec![
                RelationFlag::AWeak,
                RelationFlag::BWeak,
                RelationFlag::AbWeak,
                RelationFlag::SquaredCommuting,
                RelationFlag::ChenSheibani,
            ];
            out.expected_absent = vec![RelationFlag::Commuting];
            out.expected_outcomes
                .insert(FormulaId::Product33.name().into(), Verdict::Pass);
            out.expected_outcomes
                .insert(FormulaId::Cor210I.name().into(), Verdict::Pass);
        }
        Family::PaperEx43Block => {
            let (t, s) = paper_ex_4_3_blocks();
            out.a = t;
            out.b = s;
            out.expected_present = vec![RelationFlag::SquaredCommuting];
            out.expected_outcomes
                .insert(FormulaId::Involutory42.name().into(), Verdict::Pass);
        }
        Family::Conjugation => {
            let (a, b, c) = conjugation_pair(&mut rng, dim)?;
            out.a = a;
            out.b = b;
            out.witness = Some(c);
            out.expected_present = vec![RelationFlag::AWeak, RelationFlag::SquaredCommuting];
        }
        Family::BlockSplit => {
            let variant = BlockVariant::from_param(spec.params.first().copied().unwrap_or(0.0));
            let p = block_split_primitive(&mut rng, dim, variant)?;
            out.a = p.a;
            out.b = p.b;
            out.witness = Some(p.c);
            out.expected_present = vec![
                RelationFlag::AWeak,
                RelationFlag::BWeak,
                RelationFlag::AbWeak,
                RelationFlag::SquaredCommuting,
            ];
            match variant {
                BlockVariant::BNilpotent => {
                    out.expected_outcomes.insert(
                        FormulaId::SumNilpotentResolvent.name().into(),
                        Verdict::Pass,
                    );
                    out.expected_outcomes
                        .insert(FormulaId::SumNilpotentSeries.name().into(), Verdict::Pass);
                }
                BlockVariant::BothSingular => {
                    for id in [
                        FormulaId::Sum29,
                        FormulaId::Cor210I,
                        FormulaId::Cor210II,
                        FormulaId::Cor210III,
                    ] {
                        out.expected_outcomes.insert(id.name().into(), Verdict::Pass);
                    }
                }
                BlockVariant::General => {
                    out.expected_outcomes
                        .insert(FormulaId::Product33.name().into(), Verdict::Pass);
                }
            }
        }
        Family::InvolutorySim => {
            let (t, s) = paper_ex_4_3_blocks();
            let (sim, sim_inv) = random_similarity(&mut rng, 3)?;
            out.a = &(&sim * &t) * &sim_inv;
            out.b = &(&sim * &s) * &sim_inv;
            out.expected_present = vec![RelationFlag::SquaredCommuting];
            out.expected_outcomes
                .insert(FormulaId::Involutory42.name().into(), Verdict::Pass);
        }
        Family::NegativeControl => {
            return negative_control(spec, &mut rng);
        }
    }
    Ok(out)
}

/// A structured weakly commutative pair drawn from this family's stream,
/// exposing only the a-weak promise (the conservative subset of what the
/// construction guarantees).
fn conjugation_pair(
    rng: &mut ChaCha8Rng,
    dim: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let p = block_split_primitive(rng, dim, BlockVariant::General)?;
    Ok((p.a, p.b, p.c))
}

fn negative_control(spec: &FamilySpec, rng: &mut ChaCha8Rng) -> Result<GeneratedInstance> {
    let base = spec.params.first().copied().unwrap_or(0.0) as i64;
    match base {
        // weakly-commutative pair with B bumped: only the ab_weak row flips
        0 => {
            let (a, b, _) = paper_ex_3_4(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            let bump = rank_one_bump(rng, &b, 0.1);
            let b = &b + &bump;
            let mut out = base_instance(spec, 3, a, b);
            out.expected_absent = vec![RelationFlag::AWeak, RelationFlag::BWeak, RelationFlag::AbWeak];
            out.expected_outcomes
                .insert(FormulaId::Product33.name().into(), Verdict::HypothesesNotMet);
            out.perturbed_hypothesis = Some("ab_weak".into());
            Ok(out)
        }
        // involutory pair with S replaced by a different involution:
        // a^2 = I and b^2 = I still hold, the difference identity breaks
        1 => {
            let (t, s) = paper_ex_4_3_blocks();
            let (r, r_inv) = random_similarity(rng, 3)?;
            let s = &(&r * &s) * &r_inv;
            let mut out = base_instance(spec, 3, t, s);
            out.expected_outcomes
                .insert(FormulaId::Involutory42.name().into(), Verdict::HypothesesNotMet);
            out.perturbed_hypothesis = Some("difference_identity".into());
            Ok(out)
        }
        // nilpotent-sum pair with the coupling block bumped inside its
        // strictly-triangular support: B stays nilpotent, ab_weak breaks
        2 => {
            let dim = if spec.dim == 0 { 4 } else { spec.dim };
            if dim < 4 || dim % 2 != 0 {
                return Err(Error::InvalidDim {
                    family: Family::NegativeControl.name().into(),
                    dim,
                });
            }
            let m = dim / 2;
            let prim = anticommuting_pair(rng, m, true)?;
            // additive twist in the (0, m) block that does not commute
            // with the core: kills every witness candidate while B^2 = 0
            let mut b = prim.b.clone();
            let bump = rank_one_bump(rng, &prim.b, 0.1);
            for i in 0..m {
                for j in 0..m {
                    b.set(i, m + j, b.get(i, m + j) + bump.get(i, j));
                }
            }
            let (sim, sim_inv) = random_similarity(rng, dim)?;
            let a = &(&sim * &prim.a) * &sim_inv;
            let b = &(&sim * &b) * &sim_inv;
            let mut out = base_instance(spec, dim, a, b);
            out.expected_outcomes.insert(
                FormulaId::SumNilpotentResolvent.name().into(),
                Verdict::HypothesesNotMet,
            );
            out.perturbed_hypothesis = Some("ab_weak".into());
            Ok(out)
        }
        other => Err(Error::PreconditionViolated(format!(
            "NEGATIVE_CONTROL params[0] selects the base (0, 1, or 2), got {other}"
        ))),
    }
}

fn base_instance(
    spec: &FamilySpec,
    dim: usize,
    a: ComplexMatrix,
    b: ComplexMatrix,
) -> GeneratedInstance {
    GeneratedInstance {
        family: spec.family,
        seed: spec.seed,
        dim,
        a,
        b,
        witness: None,
        expected_present: Vec::new(),
        expected_absent: Vec::new(),
        expected_outcomes: BTreeMap::new(),
        perturbed_hypothesis: None,
    }
}

/// Re-derive every promise an instance carries; errors name the first
/// violated promise.
pub fn self_check(instance: &GeneratedInstance, tol: &Tolerance) -> Result<()> {
    let class = classify_pair(&instance.a, &instance.b, tol)?;
    for flag in &instance.expected_present {
        if !class.flags.contains(flag) {
            return Err(Error::PreconditionViolated(format!(
                "{}/{}: expected flag {flag:?} missing",
                instance.family, instance.seed
            )));
        }
    }
    for flag in &instance.expected_absent {
        if class.flags.contains(flag) {
            return Err(Error::PreconditionViolated(format!(
                "{}/{}: flag {flag:?} unexpectedly present",
                instance.family, instance.seed
            )));
        }
    }
    if let Some(c) = &instance.witness {
        let r1 = (&(&instance.a * &instance.b) - &(c * &instance.a)).norm_fro();
        let r2 = (&(&instance.b * &instance.a) - &(&instance.a * c)).norm_fro();
        let scale = (instance.a.norm_fro() * instance.b.norm_fro()).max(1.0);
        if (r1 + r2) / scale > tol.residual_rel {
            return Err(Error::PreconditionViolated(format!(
                "{}/{}: recorded witness fails its equations",
                instance.family, instance.seed
            )));
        }
    }
    for (name, expected) in &instance.expected_outcomes {
        let id: FormulaId = name.parse()?;
        let report = verify_formula(id, &[instance.a.clone(), instance.b.clone()], None, tol)?;
        if report.verdict != *expected {
            return Err(Error::PreconditionViolated(format!(
                "{}/{}: {name} expected {expected:?}, got {:?} (deviation {:.3e})",
                instance.family, instance.seed, report.verdict, report.deviation
            )));
        }
        if let Some(broken) = &instance.perturbed_hypothesis {
            let mut flipped = Vec::new();
            for h in &report.hypotheses {
                if !h.pass {
                    flipped.push(h.name.clone());
                }
            }
            if flipped != vec![broken.clone()] {
                return Err(Error::PreconditionViolated(format!(
                    "{}/{}: expected only hypothesis {broken} to fail, got {flipped:?}",
                    instance.family, instance.seed
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drazin::{drazin_inverse, nilpotency_index, verify_drazin_axioms};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn fixed_families_keep_their_promises() {
        for family in [
            Family::PaperEx16,
            Family::PaperEx24,
            Family::PaperEx26,
            Family::PaperEx34,
            Family::PaperEx43Block,
        ] {
            let inst = generate(&FamilySpec {
                family,
                dim: 0,
                seed: 7,
                params: vec![],
            })
            .unwrap();
            self_check(&inst, &tol()).unwrap();
        }
    }

    #[test]
    fn block_split_variants_self_check() {
        for variant in 0..3 {
            for seed in 0..4u64 {
                for dim in [2usize, 3, 5, 6] {
                    if variant == 1 && dim == 2 {
                        // both-singular at dim 2 is purely nilpotent; the
                        // sum representations still apply
                    }
                    let inst = generate(&FamilySpec {
                        family: Family::BlockSplit,
                        dim,
                        seed: seed + 100 * variant as u64,
                        params: vec![variant as f64],
                    })
                    .unwrap();
                    self_check(&inst, &tol()).unwrap_or_else(|e| {
                        panic!("variant {variant} seed {seed} dim {dim}: {e}")
                    });
                }
            }
        }
    }

    #[test]
    fn involutory_similarity_self_checks() {
        for seed in 0..6u64 {
            let inst = generate(&FamilySpec {
                family: Family::InvolutorySim,
                dim: 0,
                seed,
                params: vec![],
            })
            .unwrap();
            self_check(&inst, &tol()).unwrap();
        }
    }

    #[test]
    fn negative_controls_flip_exactly_the_recorded_hypothesis() {
        for base in 0..3 {
            for seed in 0..4u64 {
                let inst = generate(&FamilySpec {
                    family: Family::NegativeControl,
                    dim: 0,
                    seed,
                    params: vec![base as f64],
                })
                .unwrap();
                assert!(inst.perturbed_hypothesis.is_some());
                self_check(&inst, &tol())
                    .unwrap_or_else(|e| panic!("base {base} seed {seed}: {e}"));
            }
        }
    }

    #[test]
    fn random_drazin_matrix_satisfies_axioms() {
        for seed in 0..8u64 {
            let m = random_drazin_matrix(5, seed).unwrap();
            let d = drazin_inverse(&m, &tol()).unwrap();
            let axioms = verify_drazin_axioms(&m, &d.d_inverse, d.index, &tol()).unwrap();
            assert!(axioms.passed(), "seed {seed}: {:?}", axioms);
        }
    }

    #[test]
    fn b_nilpotent_variant_really_is_nilpotent() {
        for seed in 0..6u64 {
            let inst = generate(&FamilySpec {
                family: Family::BlockSplit,
                dim: 5,
                seed,
                params: vec![0.0],
            })
            .unwrap();
            assert!(nilpotency_index(&inst.b, &tol()).unwrap().is_some());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = FamilySpec {
            family: Family::BlockSplit,
            dim: 4,
            seed: 42,
            params: vec![2.0],
        };
        let one = generate(&spec).unwrap();
        let two = generate(&spec).unwrap();
        assert_eq!(one.a.row_major_data(), two.a.row_major_data());
        assert_eq!(one.b.row_major_data(), two.b.row_major_data());
    }

    #[test]
    fn paper_dim_mismatch_is_rejected() {
        let err = generate(&FamilySpec {
            family: Family::PaperEx16,
            dim: 5,
            seed: 0,
            params: vec![],
        });
        assert!(matches!(err, Err(Error::InvalidDim { .. })));
    }
}
