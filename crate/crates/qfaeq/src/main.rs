//! Command-line front end.
//!
//! Exit codes: 0 success (or Equivalent / exhausted-clean), 1 automata are
//! not equivalent, 2 usage or input error, 3 numerical-tolerance
//! escalation (a span basis outgrew its hard cap).

use clap::{Parser, Subcommand, ValueEnum};
use qfaeq::equivalence::{self, Method, OracleOutcome};
use qfaeq::io::{parse_qfa_with, serialize_qfa, serialize_sum};
use qfaeq::model::Word;
use qfaeq::{Alphabet, EquivError, EquivalenceVerdict, MultiLetterQFA, Tolerances};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qfaeq", version, about = "Simulate and compare multi-letter quantum finite automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit one machine-readable JSON record on stdout
    #[arg(long, global = true)]
    json: bool,

    /// Probability difference above which automata differ
    #[arg(long, global = true, env = "QFAEQ_TOL_PROB")]
    tol_prob: Option<f64>,

    /// Relative residual threshold for span-basis rank decisions
    #[arg(long, global = true, env = "QFAEQ_TOL_RANK")]
    tol_rank: Option<f64>,

    /// Allowed max-abs deviation of U†U from the identity
    #[arg(long, global = true, env = "QFAEQ_TOL_UNITARY")]
    tol_unitary: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document against the format and the automaton constraints
    Validate { file: PathBuf },
    /// Print the acceptance probability of a word (pass "" for the empty word)
    Prob { file: PathBuf, word: String },
    /// Decide whether two automata accept every word with equal probability
    Equiv {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Write the diagonal-sum composite of two automata
    Sum {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a random automaton with Haar-distributed transitions
    Gen {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare probabilities on every word up to a length cap
    Oracle {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long)]
        max_len: usize,
        /// Abort if the sweep would evaluate more words than this
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    UnaryBound,
    Span,
}

impl From<MethodArg> for Method {
    fn from(arg: MethodArg) -> Method {
        match arg {
            MethodArg::Auto => Method::Auto,
            MethodArg::UnaryBound => Method::UnaryBound,
            MethodArg::Span => Method::SpanClosure,
        }
    }
}

/// Outcome of a subcommand: text for humans, a JSON record for machines,
/// and the process exit code.
struct Outcome {
    text: String,
    record: serde_json::Value,
    code: u8,
}

struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { message, code: 2 }
    }
}

impl From<EquivError> for Failure {
    fn from(err: EquivError) -> Self {
        let code = match err {
            EquivError::ToleranceEscalation { .. } => 3,
            _ => 2,
        };
        Failure {
            message: err.to_string(),
            code,
        }
    }
}

fn tolerances(cli: &Cli) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(p) = cli.tol_prob {
        tol.prob = p;
    }
    if let Some(r) = cli.tol_rank {
        tol.rank = r;
    }
    if let Some(u) = cli.tol_unitary {
        tol.unitary = u;
    }
    tol
}

fn load(path: &Path, tol: &Tolerances) -> Result<MultiLetterQFA, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_qfa_with(&text, tol)
        .map(|(qfa, _)| qfa)
        .map_err(|e| Failure::input(format!("{}:\n{e}", path.display())))
}

#[derive(Serialize)]
struct ValidateRecord {
    command: &'static str,
    file: String,
    valid: bool,
    violations: Vec<String>,
}

fn cmd_validate(cli: &Cli, file: &Path) -> Result<Outcome, Failure> {
    let tol = tolerances(cli);
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::input(format!("{}: {e}", file.display())))?;
    match parse_qfa_with(&text, &tol) {
        Ok(_) => Ok(Outcome {
            text: "valid".into(),
            record: serde_json::to_value(ValidateRecord {
                command: "validate",
                file: file.display().to_string(),
                valid: true,
                violations: Vec::new(),
            })
            .unwrap(),
            code: 0,
        }),
        Err(errors) => Ok(Outcome {
            text: errors.to_string(),
            record: serde_json::to_value(ValidateRecord {
                command: "validate",
                file: file.display().to_string(),
                valid: false,
                violations: errors.issues.iter().map(|i| i.to_string()).collect(),
            })
            .unwrap(),
            code: 2,
        }),
    }
}

#[derive(Serialize)]
struct ProbRecord {
    command: &'static str,
    file: String,
    word: String,
    probability: f64,
}

fn cmd_prob(cli: &Cli, file: &Path, word: &str) -> Result<Outcome, Failure> {
    let tol = tolerances(cli);
    let qfa = load(file, &tol)?;
    let word = Word::parse(word, &qfa.alphabet).map_err(|e| Failure::input(e.to_string()))?;
    let raw = qfa
        .acceptance_probability(&word)
        .map_err(|e| Failure::input(e.to_string()))?;
    Ok(Outcome {
        text: format!("{:.12}", raw.clamp(0.0, 1.0)),
        record: serde_json::to_value(ProbRecord {
            command: "prob",
            file: file.display().to_string(),
            word: word.to_string(),
            probability: raw,
        })
        .unwrap(),
        code: 0,
    })
}

#[derive(Serialize)]
struct EquivRecord {
    command: &'static str,
    verdict: &'static str,
    witness: Option<String>,
    p1: Option<f64>,
    p2: Option<f64>,
    method: &'static str,
    effective_z: usize,
    words_evaluated: usize,
    classes_touched: usize,
    total_insertions: usize,
    insertion_cap: usize,
    class_count: u64,
    bound_unary: Option<usize>,
    bound_general: u64,
}

fn cmd_equiv(cli: &Cli, file_a: &Path, file_b: &Path, method: MethodArg) -> Result<Outcome, Failure> {
    let tol = tolerances(cli);
    let a = load(file_a, &tol)?;
    let b = load(file_b, &tol)?;
    let verdict = equivalence::decide_equivalence(&a, &b, method.into(), &tol)?;
    let stats = verdict.stats().clone();
    let (text, record, code) = match &verdict {
        EquivalenceVerdict::Equivalent { .. } => (
            format!(
                "equivalent (method {}, {} words evaluated, effective z {})",
                stats.method, stats.words_evaluated, stats.max_len_examined
            ),
            EquivRecord {
                command: "equiv",
                verdict: "equivalent",
                witness: None,
                p1: None,
                p2: None,
                method: stats.method.as_str(),
                effective_z: stats.max_len_examined,
                words_evaluated: stats.words_evaluated,
                classes_touched: stats.classes_touched,
                total_insertions: stats.total_insertions,
                insertion_cap: stats.insertion_cap,
                class_count: stats.class_count,
                bound_unary: stats.bound_unary,
                bound_general: stats.bound_general,
            },
            0,
        ),
        EquivalenceVerdict::NotEquivalent { witness, p1, p2, .. } => (
            format!(
                "not equivalent: witness {:?} (length {}), p1={:.12}, p2={:.12}",
                witness.to_string(),
                witness.len(),
                p1,
                p2
            ),
            EquivRecord {
                command: "equiv",
                verdict: "not-equivalent",
                witness: Some(witness.to_string()),
                p1: Some(*p1),
                p2: Some(*p2),
                method: stats.method.as_str(),
                effective_z: stats.max_len_examined,
                words_evaluated: stats.words_evaluated,
                classes_touched: stats.classes_touched,
                total_insertions: stats.total_insertions,
                insertion_cap: stats.insertion_cap,
                class_count: stats.class_count,
                bound_unary: stats.bound_unary,
                bound_general: stats.bound_general,
            },
            1,
        ),
    };
    Ok(Outcome {
        text,
        record: serde_json::to_value(record).unwrap(),
        code,
    })
}

#[derive(Serialize)]
struct SumRecord {
    command: &'static str,
    output: String,
    states: usize,
    k: usize,
}

fn cmd_sum(cli: &Cli, file_a: &Path, file_b: &Path, output: &Path) -> Result<Outcome, Failure> {
    let tol = tolerances(cli);
    let a = load(file_a, &tol)?;
    let b = load(file_b, &tol)?;
    let sum = equivalence::diagonal_sum(&a, &b)?;
    std::fs::write(output, serialize_sum(&sum))
        .map_err(|e| Failure::input(format!("{}: {e}", output.display())))?;
    Ok(Outcome {
        text: format!(
            "wrote diagonal sum ({} states, k={}) to {}",
            sum.qfa.n,
            sum.k(),
            output.display()
        ),
        record: serde_json::to_value(SumRecord {
            command: "sum",
            output: output.display().to_string(),
            states: sum.qfa.n,
            k: sum.k(),
        })
        .unwrap(),
        code: 0,
    })
}

#[derive(Serialize)]
struct GenRecord {
    command: &'static str,
    output: String,
    states: usize,
    k: usize,
    alphabet: String,
    seed: u64,
}

fn cmd_gen(
    states: usize,
    k: usize,
    alphabet: &str,
    seed: u64,
    output: &Path,
) -> Result<Outcome, Failure> {
    let alphabet = Alphabet::new(alphabet).map_err(|e| Failure::input(e.to_string()))?;
    let qfa = qfaeq::gen::gen_random_qfa(states, k, &alphabet, seed)
        .map_err(|e| Failure::input(e.to_string()))?;
    std::fs::write(output, serialize_qfa(&qfa))
        .map_err(|e| Failure::input(format!("{}: {e}", output.display())))?;
    Ok(Outcome {
        text: format!(
            "wrote random automaton (seed {seed}, {states} states, k={k}) to {}",
            output.display()
        ),
        record: serde_json::to_value(GenRecord {
            command: "gen",
            output: output.display().to_string(),
            states,
            k,
            alphabet: alphabet.as_string(),
            seed,
        })
        .unwrap(),
        code: 0,
    })
}

#[derive(Serialize)]
struct OracleRecord {
    command: &'static str,
    outcome: &'static str,
    max_len: usize,
    witness: Option<String>,
    p1: Option<f64>,
    p2: Option<f64>,
}

fn cmd_oracle(
    cli: &Cli,
    file_a: &Path,
    file_b: &Path,
    max_len: usize,
    budget: u64,
) -> Result<Outcome, Failure> {
    let tol = tolerances(cli);
    let a = load(file_a, &tol)?;
    let b = load(file_b, &tol)?;
    let outcome = equivalence::exhaustive_check(&a, &b, max_len, tol.prob, budget)?;
    Ok(match outcome {
        OracleOutcome::ExhaustedClean { max_len } => Outcome {
            text: format!("exhausted-clean to length {max_len}"),
            record: serde_json::to_value(OracleRecord {
                command: "oracle",
                outcome: "exhausted-clean",
                max_len,
                witness: None,
                p1: None,
                p2: None,
            })
            .unwrap(),
            code: 0,
        },
        OracleOutcome::Violation { witness, p1, p2 } => Outcome {
            text: format!(
                "not equivalent: witness {:?} (length {}), p1={:.12}, p2={:.12}",
                witness.to_string(),
                witness.len(),
                p1,
                p2
            ),
            record: serde_json::to_value(OracleRecord {
                command: "oracle",
                outcome: "not-equivalent",
                max_len,
                witness: Some(witness.to_string()),
                p1: Some(p1),
                p2: Some(p2),
            })
            .unwrap(),
            code: 1,
        },
    })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Validate { file } => cmd_validate(cli, file),
        Command::Prob { file, word } => cmd_prob(cli, file, word),
        Command::Equiv {
            file_a,
            file_b,
            method,
        } => cmd_equiv(cli, file_a, file_b, *method),
        Command::Sum {
            file_a,
            file_b,
            output,
        } => cmd_sum(cli, file_a, file_b, output),
        Command::Gen {
            states,
            k,
            alphabet,
            seed,
            output,
        } => cmd_gen(*states, *k, alphabet, *seed, output),
        Command::Oracle {
            file_a,
            file_b,
            max_len,
            budget,
        } => cmd_oracle(cli, file_a, file_b, *max_len, *budget),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!("{}", outcome.record);
            } else {
                println!("{}", outcome.text);
            }
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            if cli.json {
                let record = serde_json::json!({ "error": failure.message });
                println!("{record}");
            } else {
                eprintln!("error: {}", failure.message);
            }
            ExitCode::from(failure.code)
        }
    }
}
