//! Command-line front end: load matrices from JSON, run computations and
//! verifications, and emit machine-readable reports.
//!
//! Exit codes: 0 when every requested check passes, 1 when a verification
//! fails, 2 on usage or parse errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use drazin_lab::{
    classify_pair, drazin_inverse, generate, run_suite, solve_witness, verify_formula,
    ComplexMatrix, Family, FamilySpec, FormulaId, SuiteConfig, Tolerance, Verdict,
};

#[derive(Parser)]
#[command(
    name = "drazin-lab",
    about = "Drazin inverses, weak-commutativity witnesses, and formula verification",
    version
)]
struct Cli {
    #[command(flatten)]
    tolerances: TolArgs,

    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Relative cutoff for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rank_tol: f64,

    /// Relative cutoff for residual checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    resid_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Drazin inverse, index, and spectral idempotent of a square matrix.
    Drazin {
        /// Matrix JSON file: {"rows", "cols", "data": [[re, im], ...]} row-major.
        matrix: PathBuf,
    },
    /// Minimum-norm witness C with AB = CA and BA = AC, when one exists.
    Witness { a: PathBuf, b: PathBuf },
    /// Relation taxonomy of a pair: commuting, a/b/{a,b}-weak, and friends.
    Classify { a: PathBuf, b: PathBuf },
    /// Check one closed-form representation against the direct route.
    Verify {
        /// Formula name, e.g. PRODUCT_3_3 or SUM_NILPOTENT_RESOLVENT.
        #[arg(long)]
        formula: String,
        /// Row index of the block partition (BLOCK_2_2 only).
        #[arg(long)]
        split: Option<usize>,
        /// Input matrix files (one for BLOCK_2_2, two otherwise).
        inputs: Vec<PathBuf>,
    },
    /// Emit a seeded instance of one generator family.
    Generate {
        /// Family name, e.g. PAPER_EX_3_4 or BLOCK_SPLIT.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated family parameters, e.g. --params 1,1.
        #[arg(long, value_delimiter = ',')]
        params: Vec<f64>,
    },
    /// Run the full verification schedule over seed and dimension ranges.
    Suite {
        /// Inclusive seed range, e.g. 0..499. Defaults to BASE..BASE+99
        /// with BASE from DRAZIN_LAB_SEED (0 when unset).
        #[arg(long)]
        seeds: Option<String>,
        /// Inclusive dimension range, e.g. 2..8.
        #[arg(long, default_value = "2..6")]
        dims: String,
    },
}

fn load_matrix(path: &PathBuf) -> Result<ComplexMatrix, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

/// Parse an inclusive "lo..hi" range; a bare number means a single value.
fn parse_range(text: &str, what: &str) -> Result<(u64, u64), String> {
    let parse_end = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|e| format!("bad {what} range {text:?}: {e}"))
    };
    match text.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse_end(lo)?, parse_end(hi)?);
            if lo > hi {
                return Err(format!("bad {what} range {text:?}: {lo} > {hi}"));
            }
            Ok((lo, hi))
        }
        None => {
            let v = parse_end(text)?;
            Ok((v, v))
        }
    }
}

fn emit(output: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("report serialization");
    match output {
        Some(path) => fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Run one command; Ok(true) means every check passed.
fn run(cli: &Cli, tol: &Tolerance) -> Result<bool, String> {
    match &cli.command {
        Command::Drazin { matrix } => {
            let a = load_matrix(matrix)?;
            let result = drazin_inverse(&a, tol).map_err(|e| e.to_string())?;
            emit(
                &cli.output,
                &json!({
                    "d_inverse": result.d_inverse,
                    "index": result.index,
                    "projector": result.projector,
                    "core_dim": result.core_dim,
                    "core_condition": result.core_condition,
                    "ill_conditioned": result.ill_conditioned,
                }),
            )?;
            Ok(true)
        }
        Command::Witness { a, b } => {
            let (a, b) = (load_matrix(a)?, load_matrix(b)?);
            let result = solve_witness(&a, &b, tol).map_err(|e| e.to_string())?;
            emit(&cli.output, &serde_json::to_value(&result).unwrap())?;
            Ok(true)
        }
        Command::Classify { a, b } => {
            let (a, b) = (load_matrix(a)?, load_matrix(b)?);
            let class = classify_pair(&a, &b, tol).map_err(|e| e.to_string())?;
            emit(&cli.output, &serde_json::to_value(&class).unwrap())?;
            Ok(true)
        }
        Command::Verify {
            formula,
            split,
            inputs,
        } => {
            let id = FormulaId::from_str(formula).map_err(|e| e.to_string())?;
            let matrices = inputs
                .iter()
                .map(load_matrix)
                .collect::<Result<Vec<_>, _>>()?;
            let report =
                verify_formula(id, &matrices, *split, tol).map_err(|e| e.to_string())?;
            let passed = report.verdict == Verdict::Pass;
            emit(&cli.output, &serde_json::to_value(&report).unwrap())?;
            Ok(passed)
        }
        Command::Generate {
            family,
            dim,
            seed,
            params,
        } => {
            let family = Family::from_str(family).map_err(|e| e.to_string())?;
            let spec = FamilySpec {
                family,
                dim: *dim,
                seed: *seed,
                params: params.clone(),
            };
            let instance = generate(&spec).map_err(|e| e.to_string())?;
            emit(&cli.output, &serde_json::to_value(&instance).unwrap())?;
            Ok(true)
        }
        Command::Suite { seeds, dims } => {
            let (seed_lo, seed_hi) = match seeds {
                Some(text) => parse_range(text, "seed")?,
                None => {
                    let base = std::env::var("DRAZIN_LAB_SEED")
                        .ok()
                        .map(|v| {
                            v.parse::<u64>()
                                .map_err(|e| format!("bad DRAZIN_LAB_SEED {v:?}: {e}"))
                        })
                        .transpose()?
                        .unwrap_or(0);
                    (base, base + 99)
                }
            };
            let (dim_lo, dim_hi) = parse_range(dims, "dim")?;
            let cfg = SuiteConfig::new(seed_lo, seed_hi, dim_lo as usize, dim_hi as usize, *tol);
            let report = run_suite(&cfg).map_err(|e| e.to_string())?;
            let passed = report.passed == report.total;
            emit(&cli.output, &serde_json::to_value(&report).unwrap())?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match Tolerance::new(cli.tolerances.rank_tol, cli.tolerances.resid_tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &tol) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
