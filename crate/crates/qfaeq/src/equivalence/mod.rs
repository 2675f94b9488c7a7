//! Equivalence checking for multi-letter automata.
//!
//! Two automata are equivalent when they accept every word with the same
//! probability. Over a one-letter alphabet a finite prefix of word lengths
//! suffices ([`decide::unary_equivalence_bound`]); over larger alphabets
//! the decider closes a span of forward observables per suffix class and
//! stops when no word adds a new direction.

mod decide;
mod sum;

pub use decide::{
    Method, decide_equivalence, decide_span_closure, decide_unary_bound, exhaustive_check,
    general_comparison_bound, unary_equivalence_bound,
};
pub use sum::{
    DensityPair, DiagonalSumQFA, SuffixClass, class_count, diagonal_sum, forward_density_step,
};

use crate::linalg::CMatrix;
use crate::model::{ModelError, MultiLetterQFA, Word};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EquivError {
    #[error("alphabets differ: {left:?} vs {right:?}")]
    AlphabetMismatch { left: String, right: String },
    #[error("the unary-bound decider needs a one-letter alphabet, got {size} symbols")]
    AlphabetNotUnary { size: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "suffix class {class:?} needed more than {cap} basis insertions; \
         the rank tolerance {tau_rank:.3e} is too tight for this instance"
    )]
    ToleranceEscalation {
        class: String,
        cap: usize,
        tau_rank: f64,
    },
    #[error("densities drifted off Hermitian form: {0}")]
    NumericalDrift(String),
    #[error("enumerating all words would take {required} evaluations, over the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

/// Which decision procedure produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodUsed {
    UnaryBound,
    SpanClosure,
}

impl MethodUsed {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodUsed::UnaryBound => "unary-bound",
            MethodUsed::SpanClosure => "span-closure",
        }
    }
}

impl fmt::Display for MethodUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Counters reported by a decider run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeciderStats {
    pub method: MethodUsed,
    /// Words whose probabilities were compared.
    pub words_evaluated: usize,
    /// Longest word examined; for span closure this is the effective
    /// depth after which the search closed.
    pub max_len_examined: usize,
    /// Suffix classes that received at least one basis member.
    pub classes_touched: usize,
    /// Basis insertions per class key, in canonical key order.
    pub insertions_per_class: Vec<(String, usize)>,
    pub total_insertions: usize,
    /// Hard per-class cap, `n1² + n2²`.
    pub insertion_cap: usize,
    /// Number of reachable suffix classes.
    pub class_count: u64,
    /// Length bound driving the unary decider, when the alphabet is unary.
    pub bound_unary: Option<usize>,
    /// Coarse a-priori length cap, for comparison only.
    pub bound_general: u64,
}

/// Outcome of a decider: equivalence, or a witness word on which the
/// acceptance probabilities differ by more than the tolerance.
#[derive(Debug, Clone)]
pub enum EquivalenceVerdict {
    Equivalent {
        stats: DeciderStats,
    },
    NotEquivalent {
        /// Shortest differing word found, lexicographically first within
        /// its length layer by alphabet order.
        witness: Word,
        p1: f64,
        p2: f64,
        stats: DeciderStats,
    },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::Equivalent { .. })
    }

    pub fn stats(&self) -> &DeciderStats {
        match self {
            EquivalenceVerdict::Equivalent { stats } => stats,
            EquivalenceVerdict::NotEquivalent { stats, .. } => stats,
        }
    }

    pub fn witness(&self) -> Option<&Word> {
        match self {
            EquivalenceVerdict::Equivalent { .. } => None,
            EquivalenceVerdict::NotEquivalent { witness, .. } => Some(witness),
        }
    }
}

/// Outcome of [`exhaustive_check`]: either a concrete violation or a clean
/// sweep up to the length cap (which proves nothing beyond it).
#[derive(Debug, Clone)]
pub enum OracleOutcome {
    Violation { witness: Word, p1: f64, p2: f64 },
    ExhaustedClean { max_len: usize },
}

impl OracleOutcome {
    pub fn is_clean(&self) -> bool {
        matches!(self, OracleOutcome::ExhaustedClean { .. })
    }

    pub fn witness(&self) -> Option<&Word> {
        match self {
            OracleOutcome::Violation { witness, .. } => Some(witness),
            OracleOutcome::ExhaustedClean { .. } => None,
        }
    }
}

/// Backward-propagated observable `μ̄(ω)† P_acc μ̄(ω)`. Its expectation in
/// the initial state is the acceptance probability of `ω`.
pub fn observable(a: &MultiLetterQFA, word: &Word) -> Result<CMatrix, ModelError> {
    let u = a.word_unitary(word)?;
    Ok(a.projector().matrix().conjugate_by(&u.dagger()))
}
