//! Simulation and equivalence checking for multi-letter quantum finite
//! automata.
//!
//! A multi-letter automaton applies, at each step, a unitary selected by
//! the window of the last `k` letters read (left-padded with `Λ`, written
//! `_`, until `k` letters have arrived), and accepts with the squared norm
//! of the final state's projection onto the accepting subspace.
//!
//! The crate provides:
//!
//! - the automaton model and its run semantics ([`model`]),
//! - dense complex matrices and an incremental span basis ([`linalg`]),
//! - equivalence deciders and an exhaustive oracle ([`equivalence`]):
//!   over unary alphabets, words up to length `(n1² + n2² − 1) + k`
//!   settle equivalence; over general alphabets a breadth-first search
//!   closes a span of forward observables per suffix class,
//! - a canonical text format plus seeded generators ([`io`], [`gen`]),
//! - the `qfaeq` command-line tool wrapping all of the above.

pub mod equivalence;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod model;
pub mod tolerance;

pub use equivalence::{
    DeciderStats, EquivError, EquivalenceVerdict, Method, MethodUsed, OracleOutcome,
    decide_equivalence, exhaustive_check,
};
pub use model::{Alphabet, KGram, ModelError, MultiLetterQFA, Symbol, ValidationReport, Word};
pub use tolerance::Tolerances;
