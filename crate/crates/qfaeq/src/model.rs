//! Multi-letter quantum finite automata and their run semantics.
//!
//! A `k`-letter automaton reads a word one letter at a time; the unitary
//! applied at each step is selected by the window of the last `k` letters,
//! left-padded with the placeholder `Λ` (written `_`) while fewer than `k`
//! letters have arrived. Acceptance is the squared norm of the projection
//! of the final state onto the accepting subspace.

use crate::linalg::{C64, CMatrix, CVector};
use crate::tolerance::Tolerances;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// Placeholder filling the leading window positions before `k` letters
/// have been read. Reserved: it cannot appear in an alphabet.
pub const PADDING_CHAR: char = '_';

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("symbol {0:?} is not allowed in an alphabet")]
    BadSymbol(char),
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,
    #[error("alphabet has duplicate symbol {0:?}")]
    DuplicateSymbol(char),
    #[error("symbol {0:?} is not in the alphabet {1}")]
    SymbolNotInAlphabet(char, String),
    #[error("step {step} is out of range for a word of length {len}")]
    StepOutOfRange { step: usize, len: usize },
    #[error("gram {0:?} is not a usable window key for k={1}")]
    BadGram(String, usize),
    #[error("no transition matrix for gram {0:?}")]
    MissingGram(String),
    #[error("word of length {len} is shorter than the window k={k}")]
    WordTooShort { len: usize, k: usize },
}

/// Single input letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(char);

impl Symbol {
    /// Accepts any printable, non-whitespace character except the padding
    /// placeholder `_`.
    pub fn new(ch: char) -> Result<Self, ModelError> {
        if ch == PADDING_CHAR || ch.is_whitespace() || ch.is_control() {
            return Err(ModelError::BadSymbol(ch));
        }
        Ok(Symbol(ch))
    }

    pub fn as_char(&self) -> char {
        self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered set of input symbols. The order is canonical: it defines
/// lexicographic tie-breaking for witness search and gram-key sorting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
}

impl Alphabet {
    pub fn new(chars: &str) -> Result<Self, ModelError> {
        let mut symbols = Vec::new();
        for ch in chars.chars() {
            let sym = Symbol::new(ch)?;
            if symbols.contains(&sym) {
                return Err(ModelError::DuplicateSymbol(ch));
            }
            symbols.push(sym);
        }
        if symbols.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_unary(&self) -> bool {
        self.symbols.len() == 1
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.symbols.contains(&sym)
    }

    pub fn index_of(&self, ch: char) -> Option<usize> {
        self.symbols.iter().position(|s| s.as_char() == ch)
    }

    /// Sort rank of a gram-key character: the padding placeholder sorts
    /// before every alphabet symbol, symbols in alphabet order after it.
    pub fn gram_rank(&self, ch: char) -> Option<usize> {
        if ch == PADDING_CHAR {
            Some(0)
        } else {
            self.index_of(ch).map(|i| i + 1)
        }
    }

    /// Canonical ordering of gram keys (`_` first, then alphabet order,
    /// position by position).
    pub fn cmp_gram_keys(&self, a: &str, b: &str) -> std::cmp::Ordering {
        let rank = |s: &str| -> Vec<usize> {
            s.chars().map(|ch| self.gram_rank(ch).unwrap_or(usize::MAX)).collect()
        };
        rank(a).cmp(&rank(b))
    }

    pub fn as_string(&self) -> String {
        self.symbols.iter().map(|s| s.as_char()).collect()
    }
}

/// Finite input word; possibly empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Symbol>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Parses a bare string of symbols against an alphabet.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, ModelError> {
        let mut letters = Vec::with_capacity(text.chars().count());
        for ch in text.chars() {
            match alphabet.index_of(ch) {
                Some(i) => letters.push(alphabet.symbols()[i]),
                None => {
                    return Err(ModelError::SymbolNotInAlphabet(ch, alphabet.as_string()));
                }
            }
        }
        Ok(Word { letters })
    }

    pub fn from_symbols(letters: Vec<Symbol>) -> Self {
        Word { letters }
    }

    /// The word `σ^n` over a unary alphabet.
    pub fn repeated(sym: Symbol, n: usize) -> Self {
        Word {
            letters: vec![sym; n],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.letters
    }

    pub fn extended(&self, sym: Symbol) -> Word {
        let mut letters = self.letters.clone();
        letters.push(sym);
        Word { letters }
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word {
            letters: self.letters[..len].to_vec(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sym in &self.letters {
            write!(f, "{}", sym.as_char())?;
        }
        Ok(())
    }
}

/// Length-`k` window over `{Λ} ∪ Σ`: all `Λ` occurrences form a (possibly
/// empty) prefix and the final character is an alphabet symbol. These are
/// the only windows the run semantics ever consults.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KGram {
    chars: String,
}

impl KGram {
    /// Parses and checks a gram key against a window length and alphabet.
    pub fn parse(text: &str, k: usize, alphabet: &Alphabet) -> Result<Self, ModelError> {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() != k {
            return Err(ModelError::BadGram(text.to_string(), k));
        }
        let pad_len = chars.iter().take_while(|&&c| c == PADDING_CHAR).count();
        if pad_len == k {
            return Err(ModelError::BadGram(text.to_string(), k));
        }
        for &ch in &chars[pad_len..] {
            if alphabet.index_of(ch).is_none() {
                return Err(ModelError::BadGram(text.to_string(), k));
            }
        }
        Ok(KGram {
            chars: text.to_string(),
        })
    }

    /// Builds a gram from a string the caller already knows to be a usable
    /// window key.
    pub(crate) fn from_raw(chars: String) -> Self {
        debug_assert!(matches!(chars.chars().last(), Some(c) if c != PADDING_CHAR));
        KGram { chars }
    }

    /// Builds `Λ^pad · tail` without re-validation; `tail` must be nonempty.
    pub(crate) fn from_padded(pad: usize, tail: &[Symbol]) -> Self {
        debug_assert!(!tail.is_empty());
        let mut chars = String::with_capacity(pad + tail.len());
        for _ in 0..pad {
            chars.push(PADDING_CHAR);
        }
        for sym in tail {
            chars.push(sym.as_char());
        }
        KGram { chars }
    }

    pub fn as_str(&self) -> &str {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Number of leading padding placeholders.
    pub fn pad_len(&self) -> usize {
        self.chars.chars().take_while(|&c| c == PADDING_CHAR).count()
    }

    /// The last `len` characters, as a window for a shorter-memory
    /// automaton. Padding still forms a prefix of the suffix, so the
    /// result is again a usable gram.
    pub fn suffix(&self, len: usize) -> KGram {
        let chars: Vec<char> = self.chars.chars().collect();
        assert!(len >= 1 && len <= chars.len());
        KGram {
            chars: chars[chars.len() - len..].iter().collect(),
        }
    }
}

impl fmt::Display for KGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.chars)
    }
}

/// All usable grams for window length `k`: `Λ^{k−j}·u` for `u ∈ Σ^j`,
/// `1 ≤ j ≤ k`, in canonical sort order. The count is `m + m² + … + m^k`.
pub fn usable_grams(k: usize, alphabet: &Alphabet) -> Vec<KGram> {
    let mut grams = Vec::new();
    for j in 1..=k {
        let mut stack: Vec<Vec<Symbol>> = vec![Vec::new()];
        for _ in 0..j {
            let mut next = Vec::new();
            for partial in &stack {
                for &sym in alphabet.symbols() {
                    let mut ext = partial.clone();
                    ext.push(sym);
                    next.push(ext);
                }
            }
            stack = next;
        }
        for tail in stack {
            grams.push(KGram::from_padded(k - j, &tail));
        }
    }
    grams.sort_by(|a, b| alphabet.cmp_gram_keys(a.as_str(), b.as_str()));
    grams
}

/// Number of usable grams, `m + m² + … + m^k`, saturating on overflow.
pub fn usable_gram_count(k: usize, m: usize) -> u64 {
    let m = m as u64;
    let mut total: u64 = 0;
    let mut power: u64 = 1;
    for _ in 0..k {
        power = power.saturating_mul(m);
        total = total.saturating_add(power);
    }
    total
}

/// Window selecting the step-`j` transition (1-based): `Λ^{k−j}·x_1…x_j`
/// while fewer than `k` letters have arrived, else the last `k` letters.
pub fn gram_for_step(k: usize, word: &Word, step: usize) -> Result<KGram, ModelError> {
    if step == 0 || step > word.len() {
        return Err(ModelError::StepOutOfRange {
            step,
            len: word.len(),
        });
    }
    if step < k {
        Ok(KGram::from_padded(k - step, &word.letters()[..step]))
    } else {
        Ok(KGram::from_padded(0, &word.letters()[step - k..step]))
    }
}

/// Diagonal 0/1 projector onto the accepting subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorAcc {
    diag: Vec<f64>,
}

impl ProjectorAcc {
    pub fn new(n: usize, accepting: &BTreeSet<usize>) -> Self {
        let mut diag = vec![0.0; n];
        for &q in accepting {
            if q < n {
                diag[q] = 1.0;
            }
        }
        ProjectorAcc { diag }
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.diag.len(), |i, j| {
            if i == j {
                C64::new(self.diag[i], 0.0)
            } else {
                C64::ZERO
            }
        })
    }

    /// `‖P ψ‖²`.
    pub fn probability(&self, state: &CVector) -> f64 {
        assert_eq!(state.dim(), self.diag.len());
        state
            .amps()
            .iter()
            .zip(&self.diag)
            .map(|(amp, &d)| d * amp.norm_sqr())
            .sum()
    }

    /// `tr(P ρ)` for a density matrix `ρ`.
    pub fn expectation(&self, density: &CMatrix) -> f64 {
        assert_eq!(density.dim(), self.diag.len());
        (0..self.diag.len())
            .map(|i| self.diag[i] * density[(i, i)].re)
            .sum()
    }
}

/// A `k`-letter quantum finite automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLetterQFA {
    /// Window length, `k ≥ 1`.
    pub k: usize,
    pub alphabet: Alphabet,
    /// State count, `n ≥ 1`.
    pub n: usize,
    /// Accepting state indices, 0-based.
    pub accepting: BTreeSet<usize>,
    /// Initial unit state.
    pub initial: CVector,
    /// Transition table over the usable grams.
    pub table: HashMap<KGram, CMatrix>,
}

/// Single validation failure; the report collects all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadWindow(usize),
    BadStateCount(usize),
    MissingGram(String),
    ExtraGram(String),
    WrongEntryDim { gram: String, dim: usize, expected: usize },
    NonFiniteEntry { gram: String },
    NonUnitary { gram: String, deviation: f64 },
    InitialDim { dim: usize, expected: usize },
    InitialNonFinite,
    InitialNormDefect { norm: f64 },
    AcceptingOutOfRange { index: usize, n: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadWindow(k) => write!(f, "window length k={k} must be at least 1"),
            Violation::BadStateCount(n) => write!(f, "state count n={n} must be at least 1"),
            Violation::MissingGram(g) => write!(f, "missing usable gram {g}"),
            Violation::ExtraGram(g) => write!(f, "gram {g} is not a usable window key"),
            Violation::WrongEntryDim { gram, dim, expected } => {
                write!(f, "gram {gram}: matrix is {dim}x{dim}, expected {expected}x{expected}")
            }
            Violation::NonFiniteEntry { gram } => {
                write!(f, "gram {gram}: matrix has a non-finite entry")
            }
            Violation::NonUnitary { gram, deviation } => {
                write!(f, "gram {gram}: ‖U†U−I‖_max = {deviation:.3e} exceeds the unitarity tolerance")
            }
            Violation::InitialDim { dim, expected } => {
                write!(f, "initial vector has dimension {dim}, expected {expected}")
            }
            Violation::InitialNonFinite => write!(f, "initial vector has a non-finite entry"),
            Violation::InitialNormDefect { norm } => {
                write!(f, "initial vector norm {norm:.12} is not 1 within tolerance")
            }
            Violation::AcceptingOutOfRange { index, n } => {
                write!(f, "accepting index {index} out of range for {n} states")
            }
        }
    }
}

/// Outcome of [`MultiLetterQFA::validate`]; valid iff no violations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl MultiLetterQFA {
    /// Checks every definitional constraint and reports all failures.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.k == 0 {
            report.violations.push(Violation::BadWindow(self.k));
        }
        if self.n == 0 {
            report.violations.push(Violation::BadStateCount(self.n));
        }
        if self.k >= 1 {
            let expected = usable_grams(self.k, &self.alphabet);
            for gram in &expected {
                if !self.table.contains_key(gram) {
                    report
                        .violations
                        .push(Violation::MissingGram(gram.as_str().to_string()));
                }
            }
            let mut extra: Vec<&KGram> = self
                .table
                .keys()
                .filter(|g| KGram::parse(g.as_str(), self.k, &self.alphabet).is_err())
                .collect();
            extra.sort_by(|a, b| a.as_str().cmp(b.as_str()));
            for gram in extra {
                report
                    .violations
                    .push(Violation::ExtraGram(gram.as_str().to_string()));
            }
            let mut keys: Vec<&KGram> = self.table.keys().collect();
            keys.sort_by(|a, b| self.alphabet.cmp_gram_keys(a.as_str(), b.as_str()));
            for gram in keys {
                let entry = &self.table[gram];
                if entry.dim() != self.n {
                    report.violations.push(Violation::WrongEntryDim {
                        gram: gram.as_str().to_string(),
                        dim: entry.dim(),
                        expected: self.n,
                    });
                    continue;
                }
                if !entry.has_finite_entries() {
                    report.violations.push(Violation::NonFiniteEntry {
                        gram: gram.as_str().to_string(),
                    });
                    continue;
                }
                let deviation = entry.unitarity_deviation();
                if deviation > tol.unitary {
                    report.violations.push(Violation::NonUnitary {
                        gram: gram.as_str().to_string(),
                        deviation,
                    });
                }
            }
        }
        if self.initial.dim() != self.n {
            report.violations.push(Violation::InitialDim {
                dim: self.initial.dim(),
                expected: self.n,
            });
        } else if !self.initial.has_finite_entries() {
            report.violations.push(Violation::InitialNonFinite);
        } else {
            let norm = self.initial.norm();
            if (norm - 1.0).abs() > tol.norm {
                report
                    .violations
                    .push(Violation::InitialNormDefect { norm });
            }
        }
        for &q in &self.accepting {
            if q >= self.n {
                report
                    .violations
                    .push(Violation::AcceptingOutOfRange { index: q, n: self.n });
            }
        }
        report
    }

    fn check_word(&self, word: &Word) -> Result<(), ModelError> {
        for sym in word.letters() {
            if !self.alphabet.contains(*sym) {
                return Err(ModelError::SymbolNotInAlphabet(
                    sym.as_char(),
                    self.alphabet.as_string(),
                ));
            }
        }
        Ok(())
    }

    fn entry(&self, gram: &KGram) -> Result<&CMatrix, ModelError> {
        self.table
            .get(gram)
            .ok_or_else(|| ModelError::MissingGram(gram.as_str().to_string()))
    }

    /// Accumulated word unitary: the ordered product of step transitions,
    /// later steps to the left. The empty word maps to the identity.
    pub fn word_unitary(&self, word: &Word) -> Result<CMatrix, ModelError> {
        self.check_word(word)?;
        let mut u = CMatrix::identity(self.n);
        for step in 1..=word.len() {
            let gram = gram_for_step(self.k, word, step)?;
            u = self.entry(&gram)?.mul(&u);
        }
        Ok(u)
    }

    /// Product over the full (un-padded) windows only; defined for
    /// `|ω| ≥ k`.
    pub fn eta_unitary(&self, word: &Word) -> Result<CMatrix, ModelError> {
        self.check_word(word)?;
        if word.len() < self.k {
            return Err(ModelError::WordTooShort {
                len: word.len(),
                k: self.k,
            });
        }
        let mut u = CMatrix::identity(self.n);
        for step in self.k..=word.len() {
            let gram = gram_for_step(self.k, word, step)?;
            u = self.entry(&gram)?.mul(&u);
        }
        Ok(u)
    }

    /// Steps an arbitrary start vector through the word's transitions.
    pub fn propagate(&self, start: &CVector, word: &Word) -> Result<CVector, ModelError> {
        self.check_word(word)?;
        let mut state = start.clone();
        for step in 1..=word.len() {
            let gram = gram_for_step(self.k, word, step)?;
            state = self.entry(&gram)?.mat_vec(&state);
        }
        Ok(state)
    }

    /// Final state after reading `word`, computed by stepping the initial
    /// state through each window transition.
    pub fn final_state(&self, word: &Word) -> Result<CVector, ModelError> {
        self.propagate(&self.initial, word)
    }

    /// `‖P_acc ψ_final‖²`. The raw value is returned; callers clamp for
    /// display only.
    pub fn acceptance_probability(&self, word: &Word) -> Result<f64, ModelError> {
        let state = self.final_state(word)?;
        Ok(self.projector().probability(&state))
    }

    pub fn projector(&self) -> ProjectorAcc {
        ProjectorAcc::new(self.n, &self.accepting)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// 1-state automaton over `{a}` with `μ(a) = [scale]`.
    pub fn one_state(scale: f64, accepting: bool) -> MultiLetterQFA {
        let alphabet = Alphabet::new("a").unwrap();
        let mut table = HashMap::new();
        table.insert(
            KGram::parse("a", 1, &alphabet).unwrap(),
            CMatrix::from_rows(&[&[c(scale, 0.0)]]),
        );
        MultiLetterQFA {
            k: 1,
            alphabet,
            n: 1,
            accepting: if accepting {
                [0].into_iter().collect()
            } else {
                BTreeSet::new()
            },
            initial: CVector::basis(1, 0),
            table,
        }
    }

    /// 2-state automaton over `{a}` with `μ(a) = H`, start `e0`, accept `{1}`.
    pub fn hadamard_qfa() -> MultiLetterQFA {
        let h = 1.0 / 2.0_f64.sqrt();
        let alphabet = Alphabet::new("a").unwrap();
        let mut table = HashMap::new();
        table.insert(
            KGram::parse("a", 1, &alphabet).unwrap(),
            CMatrix::from_rows(&[&[c(h, 0.0), c(h, 0.0)], &[c(h, 0.0), c(-h, 0.0)]]),
        );
        MultiLetterQFA {
            k: 1,
            alphabet,
            n: 2,
            accepting: [1].into_iter().collect(),
            initial: CVector::basis(2, 0),
            table,
        }
    }

    /// 2-state automaton over `{a}` rotating by a quarter of π per letter,
    /// start `e0`, accept `{1}`.
    pub fn quarter_turn_qfa() -> MultiLetterQFA {
        let s = 1.0 / 2.0_f64.sqrt();
        let alphabet = Alphabet::new("a").unwrap();
        let mut table = HashMap::new();
        table.insert(
            KGram::parse("a", 1, &alphabet).unwrap(),
            CMatrix::from_rows(&[&[c(s, 0.0), c(-s, 0.0)], &[c(s, 0.0), c(s, 0.0)]]),
        );
        MultiLetterQFA {
            k: 1,
            alphabet,
            n: 2,
            accepting: [1].into_iter().collect(),
            initial: CVector::basis(2, 0),
            table,
        }
    }

    /// The 2-letter automaton recognizing words that end in `b`:
    /// state 1 holds exactly after a `b`.
    pub fn ends_in_b_qfa() -> MultiLetterQFA {
        let alphabet = Alphabet::new("ab").unwrap();
        let id = CMatrix::identity(2);
        let x = CMatrix::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]]);
        let mut table = HashMap::new();
        for (key, m) in [
            ("_a", &id),
            ("aa", &id),
            ("bb", &id),
            ("_b", &x),
            ("ab", &x),
            ("ba", &x),
        ] {
            table.insert(KGram::parse(key, 2, &alphabet).unwrap(), m.clone());
        }
        MultiLetterQFA {
            k: 2,
            alphabet,
            n: 2,
            accepting: [1].into_iter().collect(),
            initial: CVector::basis(2, 0),
            table,
        }
    }

    /// 1-state automaton over `{a, b}` that rejects everything.
    pub fn always_reject_qfa() -> MultiLetterQFA {
        let alphabet = Alphabet::new("ab").unwrap();
        let mut table = HashMap::new();
        for key in ["a", "b"] {
            table.insert(
                KGram::parse(key, 1, &alphabet).unwrap(),
                CMatrix::identity(1),
            );
        }
        MultiLetterQFA {
            k: 1,
            alphabet,
            n: 1,
            accepting: BTreeSet::new(),
            initial: CVector::basis(1, 0),
            table,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_one_state_automaton_is_valid() {
        let a = one_state(1.0, true);
        assert!(a.validate(&Tolerances::default()).is_valid());
    }

    #[test]
    fn scaled_entry_reports_unitarity_deviation() {
        let a = one_state(2.0, true);
        let report = a.validate(&Tolerances::default());
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::NonUnitary { gram, deviation } => {
                assert_eq!(gram, "a");
                assert!((deviation - 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn missing_gram_is_reported() {
        let mut a = ends_in_b_qfa();
        let key = KGram::parse("ab", 2, &a.alphabet).unwrap();
        a.table.remove(&key);
        let report = a.validate(&Tolerances::default());
        assert!(report
            .violations
            .contains(&Violation::MissingGram("ab".to_string())));
    }

    #[test]
    fn usable_gram_sets_match_their_count_formula() {
        for (chars, k) in [("a", 3), ("ab", 2), ("abc", 2)] {
            let alphabet = Alphabet::new(chars).unwrap();
            let grams = usable_grams(k, &alphabet);
            assert_eq!(grams.len() as u64, usable_gram_count(k, alphabet.len()));
            // Canonical order and pairwise distinctness.
            for pair in grams.windows(2) {
                assert_eq!(
                    alphabet.cmp_gram_keys(pair[0].as_str(), pair[1].as_str()),
                    std::cmp::Ordering::Less
                );
            }
        }
    }

    #[test]
    fn gram_for_step_pads_early_steps() {
        let alphabet = Alphabet::new("abc").unwrap();
        let w = Word::parse("ab", &alphabet).unwrap();
        assert_eq!(gram_for_step(3, &w, 1).unwrap().as_str(), "__a");
        let w = Word::parse("abba", &alphabet).unwrap();
        assert_eq!(gram_for_step(2, &w, 3).unwrap().as_str(), "bb");
        let w = Word::parse("abc", &alphabet).unwrap();
        assert_eq!(gram_for_step(1, &w, 2).unwrap().as_str(), "b");
    }

    #[test]
    fn gram_for_step_rejects_out_of_range_steps() {
        let alphabet = Alphabet::new("a").unwrap();
        let w = Word::parse("aa", &alphabet).unwrap();
        assert!(gram_for_step(1, &w, 0).is_err());
        assert!(gram_for_step(1, &w, 3).is_err());
    }

    /// Both window branches written out directly, as a check against the
    /// incremental construction used by `gram_for_step`.
    #[test]
    fn gram_for_step_matches_direct_window_formula() {
        let alphabet = Alphabet::new("ab").unwrap();
        for k in 1..=4usize {
            for len in 0..=6usize {
                for bits in 0..(1u32 << len) {
                    let text: String = (0..len)
                        .map(|i| if bits >> i & 1 == 0 { 'a' } else { 'b' })
                        .collect();
                    let w = Word::parse(&text, &alphabet).unwrap();
                    for step in 1..=len {
                        let got = gram_for_step(k, &w, step).unwrap();
                        let expected: String = if step < k {
                            let mut s = PADDING_CHAR.to_string().repeat(k - step);
                            s.push_str(&text[..step]);
                            s
                        } else {
                            text[step - k..step].to_string()
                        };
                        assert_eq!(got.as_str(), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_word_unitary_is_identity() {
        let a = ends_in_b_qfa();
        let u = a.word_unitary(&Word::empty()).unwrap();
        assert_eq!(u, CMatrix::identity(2));
    }

    #[test]
    fn hadamard_squares_to_identity() {
        let a = hadamard_qfa();
        let w = Word::parse("aa", &a.alphabet).unwrap();
        let u = a.word_unitary(&w).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn ends_in_b_word_ba_composes_to_identity() {
        let a = ends_in_b_qfa();
        let w = Word::parse("ba", &a.alphabet).unwrap();
        let u = a.word_unitary(&w).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn final_states_match_hand_simulation() {
        let a = hadamard_qfa();
        let w = Word::parse("a", &a.alphabet).unwrap();
        let state = a.final_state(&w).unwrap();
        let h = 1.0 / 2.0_f64.sqrt();
        assert!((state[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((state[1] - c(h, 0.0)).norm() < 1e-15);

        let b = ends_in_b_qfa();
        let w = Word::parse("ab", &b.alphabet).unwrap();
        let state = b.final_state(&w).unwrap();
        assert!((state[1] - c(1.0, 0.0)).norm() < 1e-15);

        let ident = one_state(1.0, true);
        let w = Word::parse("aaa", &ident.alphabet).unwrap();
        assert_eq!(ident.final_state(&w).unwrap(), ident.initial);
    }

    #[test]
    fn acceptance_probabilities_match_hand_values() {
        let ident = one_state(1.0, true);
        for text in ["", "a", "aaaa"] {
            let w = Word::parse(text, &ident.alphabet).unwrap();
            assert!((ident.acceptance_probability(&w).unwrap() - 1.0).abs() < 1e-15);
        }

        let h = hadamard_qfa();
        let wa = Word::parse("a", &h.alphabet).unwrap();
        let waa = Word::parse("aa", &h.alphabet).unwrap();
        assert!((h.acceptance_probability(&wa).unwrap() - 0.5).abs() < 1e-15);
        assert!(h.acceptance_probability(&waa).unwrap() < 1e-15);

        let e = ends_in_b_qfa();
        for (text, expect) in [("ab", 1.0), ("ba", 0.0), ("", 0.0)] {
            let w = Word::parse(text, &e.alphabet).unwrap();
            assert!((e.acceptance_probability(&w).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn foreign_symbols_are_rejected() {
        let a = hadamard_qfa();
        assert!(matches!(
            Word::parse("ab", &a.alphabet),
            Err(ModelError::SymbolNotInAlphabet('b', _))
        ));
    }

    #[test]
    fn eta_equals_word_unitary_for_single_letter_windows() {
        let a = hadamard_qfa();
        for len in 1..=5 {
            let w = Word::parse(&"a".repeat(len), &a.alphabet).unwrap();
            let eta = a.eta_unitary(&w).unwrap();
            let full = a.word_unitary(&w).unwrap();
            assert!(eta.max_abs_diff(&full) < 1e-15);
        }
    }

    #[test]
    fn eta_of_shortest_word_is_the_single_full_window() {
        let a = ends_in_b_qfa();
        let w = Word::parse("ab", &a.alphabet).unwrap();
        let eta = a.eta_unitary(&w).unwrap();
        let x = &a.table[&KGram::parse("ab", 2, &a.alphabet).unwrap()];
        assert_eq!(&eta, x);
        assert!(a.eta_unitary(&Word::parse("a", &a.alphabet).unwrap()).is_err());

        // Unary analogue: for |ω| = k the product has a single factor.
        let alphabet = Alphabet::new("a").unwrap();
        let u = crate::gen::gen_random_qfa(2, 3, &alphabet, 9).unwrap();
        let w = Word::repeated(alphabet.symbols()[0], 3);
        let eta = u.eta_unitary(&w).unwrap();
        assert_eq!(eta, u.table[&KGram::parse("aaa", 3, &alphabet).unwrap()]);
    }

    #[test]
    fn validate_flags_bad_indices_and_norm_defects() {
        let mut a = hadamard_qfa();
        a.accepting.insert(5);
        a.initial = CVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.0)]);
        let report = a.validate(&Tolerances::default());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::AcceptingOutOfRange { index: 5, n: 2 })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InitialNormDefect { .. })));
    }

    proptest! {
        /// Products of unitaries preserve the state norm.
        #[test]
        fn final_state_norm_is_one(seed in any::<u64>(), len in 0usize..8) {
            let alphabet = Alphabet::new("ab").unwrap();
            let a = crate::gen::gen_random_qfa(3, 2, &alphabet, seed).unwrap();
            let mut letters = Vec::new();
            let mut bits = seed;
            for _ in 0..len {
                letters.push(alphabet.symbols()[(bits & 1) as usize]);
                bits >>= 1;
            }
            let w = Word::from_symbols(letters);
            let state = a.final_state(&w).unwrap();
            prop_assert!((state.norm() - 1.0).abs() <= 1e-9);
            let p = a.acceptance_probability(&w).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&p));
        }

        /// The accumulated unitary factors through the padded prefix:
        /// `μ̄(ω) = η(ω)·μ̄(x₁…x_{k−1})` whenever `|ω| ≥ k`.
        #[test]
        fn word_unitary_factors_through_padding_prefix(seed in any::<u64>(), len in 2usize..7) {
            let alphabet = Alphabet::new("ab").unwrap();
            let a = crate::gen::gen_random_qfa(2, 2, &alphabet, seed).unwrap();
            let mut letters = Vec::new();
            let mut bits = seed.rotate_left(17);
            for _ in 0..len {
                letters.push(alphabet.symbols()[(bits & 1) as usize]);
                bits >>= 1;
            }
            let w = Word::from_symbols(letters);
            let full = a.word_unitary(&w).unwrap();
            let eta = a.eta_unitary(&w).unwrap();
            let prefix = a.word_unitary(&w.prefix(a.k - 1)).unwrap();
            prop_assert!(full.max_abs_diff(&eta.mul(&prefix)) <= 1e-10);
        }

        /// Multiplying a single table entry by a phase leaves every
        /// acceptance probability unchanged.
        #[test]
        fn acceptance_is_phase_invariant(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
            let alphabet = Alphabet::new("ab").unwrap();
            let a = crate::gen::gen_random_qfa(2, 2, &alphabet, seed).unwrap();
            let mut b = a.clone();
            let key = KGram::parse("ab", 2, &alphabet).unwrap();
            let phase = C64::new(theta.cos(), theta.sin());
            let rotated = b.table[&key].scale(phase);
            b.table.insert(key, rotated);
            for text in ["", "a", "b", "ab", "ba", "abab", "bbab"] {
                let w = Word::parse(text, &alphabet).unwrap();
                let pa = a.acceptance_probability(&w).unwrap();
                let pb = b.acceptance_probability(&w).unwrap();
                prop_assert!((pa - pb).abs() <= 1e-10);
            }
        }
    }
}
