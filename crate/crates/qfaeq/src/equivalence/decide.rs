//! The equivalence deciders and the exhaustive oracle.

use super::sum::{
    DensityPair, SuffixClass, check_same_alphabet, class_count, diagonal_sum, forward_density_step,
};
use super::{DeciderStats, EquivError, EquivalenceVerdict, MethodUsed, OracleOutcome};
use crate::linalg::{HermitianVec, SpanBasis, vectorize_hermitian};
use crate::model::{KGram, MultiLetterQFA, Word, gram_for_step};
use crate::tolerance::Tolerances;
use std::collections::{HashMap, VecDeque};

/// Method selection for [`super::decide_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Unary bound for one-letter alphabets, span closure otherwise.
    #[default]
    Auto,
    UnaryBound,
    SpanClosure,
}

/// Words up to this length decide equivalence over a one-letter alphabet:
/// `(n1² + n2² − 1) + k` with `k = max(k1, k2)`.
pub fn unary_equivalence_bound(n1: usize, n2: usize, k: usize) -> usize {
    assert!(n1 >= 1 && n2 >= 1 && k >= 1, "automaton sizes must be at least 1");
    (n1 * n1 + n2 * n2 - 1) + k
}

/// Coarse a-priori cap on the word lengths that can matter over an
/// `m`-letter alphabet, `(n1+n2)²·m^{k−1} − m^{k−1} + k`. Reported next to
/// the measured closure depth for comparison; never drives a loop.
pub fn general_comparison_bound(n1: usize, n2: usize, m: usize, k: usize) -> u64 {
    assert!(k >= 1, "window length must be at least 1");
    let n = (n1 + n2) as u64;
    let mut m_pow: u64 = 1;
    for _ in 0..(k - 1) {
        m_pow = m_pow.saturating_mul(m as u64);
    }
    (n * n)
        .saturating_mul(m_pow)
        .saturating_sub(m_pow)
        .saturating_add(k as u64)
}

struct StatsBuilder {
    method: MethodUsed,
    words_evaluated: usize,
    max_len_examined: usize,
    insertions: HashMap<String, usize>,
    insertion_cap: usize,
    class_count: u64,
    bound_unary: Option<usize>,
    bound_general: u64,
}

impl StatsBuilder {
    fn new(a1: &MultiLetterQFA, a2: &MultiLetterQFA, method: MethodUsed) -> Self {
        let k = a1.k.max(a2.k);
        let m = a1.alphabet.len();
        StatsBuilder {
            method,
            words_evaluated: 0,
            max_len_examined: 0,
            insertions: HashMap::new(),
            insertion_cap: a1.n * a1.n + a2.n * a2.n,
            class_count: class_count(k, m),
            bound_unary: if m == 1 {
                Some(unary_equivalence_bound(a1.n, a2.n, k))
            } else {
                None
            },
            bound_general: general_comparison_bound(a1.n, a2.n, m, k),
        }
    }

    fn finish(self, a1: &MultiLetterQFA) -> DeciderStats {
        let mut insertions_per_class: Vec<(String, usize)> = self.insertions.into_iter().collect();
        insertions_per_class.sort_by(|a, b| a1.alphabet.cmp_gram_keys(&a.0, &b.0));
        let total_insertions = insertions_per_class.iter().map(|(_, c)| c).sum();
        DeciderStats {
            method: self.method,
            words_evaluated: self.words_evaluated,
            max_len_examined: self.max_len_examined,
            classes_touched: insertions_per_class.len(),
            insertions_per_class,
            total_insertions,
            insertion_cap: self.insertion_cap,
            class_count: self.class_count,
            bound_unary: self.bound_unary,
            bound_general: self.bound_general,
        }
    }
}

/// Decides equivalence over a one-letter alphabet by direct comparison of
/// acceptance probabilities on every word up to the unary bound.
pub fn decide_unary_bound(
    a1: &MultiLetterQFA,
    a2: &MultiLetterQFA,
    tol: &Tolerances,
) -> Result<EquivalenceVerdict, EquivError> {
    check_same_alphabet(a1, a2)?;
    if !a1.alphabet.is_unary() {
        return Err(EquivError::AlphabetNotUnary {
            size: a1.alphabet.len(),
        });
    }
    let sym = a1.alphabet.symbols()[0];
    let bound = unary_equivalence_bound(a1.n, a2.n, a1.k.max(a2.k));
    let proj1 = a1.projector();
    let proj2 = a2.projector();
    let mut state1 = a1.initial.clone();
    let mut state2 = a2.initial.clone();
    let mut stats = StatsBuilder::new(a1, a2, MethodUsed::UnaryBound);
    for len in 0..=bound {
        stats.words_evaluated += 1;
        stats.max_len_examined = len;
        let p1 = proj1.probability(&state1);
        let p2 = proj2.probability(&state2);
        if (p1 - p2).abs() > tol.prob {
            return Ok(EquivalenceVerdict::NotEquivalent {
                witness: Word::repeated(sym, len),
                p1,
                p2,
                stats: stats.finish(a1),
            });
        }
        if len < bound {
            let step = len + 1;
            for (a, state) in [(a1, &mut state1), (a2, &mut state2)] {
                let pad = a.k.saturating_sub(step);
                let gram = KGram::from_padded(pad, &vec![sym; a.k - pad]);
                let u = a
                    .table
                    .get(&gram)
                    .ok_or_else(|| crate::model::ModelError::MissingGram(gram.as_str().into()))?;
                *state = u.mat_vec(state);
            }
        }
    }
    Ok(EquivalenceVerdict::Equivalent {
        stats: stats.finish(a1),
    })
}

/// Decides equivalence over any alphabet by a breadth-first search of
/// words, pruned per suffix class by a span basis over the pairs of
/// forward densities.
///
/// Each dequeued word is compared first; its density pair is then offered
/// to the basis of its class. Only words that add a new direction are
/// extended, one child per alphabet symbol in order, so the search visits
/// words in layer-then-lexicographic order and terminates after at most
/// `n1² + n2²` insertions per class. Extending a word multiplies each
/// density block by a matrix that depends only on the class and the
/// letter, so probability differences of the pruned word's continuations
/// are linear combinations of differences already scheduled for
/// comparison; pruning therefore never hides a shortest counterexample.
pub fn decide_span_closure(
    a1: &MultiLetterQFA,
    a2: &MultiLetterQFA,
    tol: &Tolerances,
) -> Result<EquivalenceVerdict, EquivError> {
    check_same_alphabet(a1, a2)?;
    let sum = diagonal_sum(a1, a2)?;
    let k = sum.k();
    let ambient = a1.n * a1.n + a2.n * a2.n;
    let proj1 = a1.projector();
    let proj2 = a2.projector();
    let mut stats = StatsBuilder::new(a1, a2, MethodUsed::SpanClosure);
    let mut bases: HashMap<SuffixClass, SpanBasis> = HashMap::new();
    let mut queue: VecDeque<(Word, DensityPair, SuffixClass)> = VecDeque::new();
    queue.push_back((
        Word::empty(),
        DensityPair::initial(a1, a2),
        SuffixClass::initial(k),
    ));
    while let Some((word, density, class)) = queue.pop_front() {
        stats.words_evaluated += 1;
        stats.max_len_examined = stats.max_len_examined.max(word.len());
        let p1 = proj1.expectation(&density.d1);
        let p2 = proj2.expectation(&density.d2);
        if (p1 - p2).abs() > tol.prob {
            return Ok(EquivalenceVerdict::NotEquivalent {
                witness: word,
                p1,
                p2,
                stats: stats.finish(a1),
            });
        }
        let v1 = vectorize_hermitian(&density.d1)
            .map_err(|e| EquivError::NumericalDrift(e.to_string()))?;
        let v2 = vectorize_hermitian(&density.d2)
            .map_err(|e| EquivError::NumericalDrift(e.to_string()))?;
        let candidate = HermitianVec::concat(&[&v1, &v2]);
        let basis = bases
            .entry(class.clone())
            .or_insert_with(|| SpanBasis::new(ambient, tol.rank));
        let inserted = basis
            .try_insert(&candidate)
            .map_err(|e| EquivError::ToleranceEscalation {
                class: class.key().to_string(),
                cap: e.dim_ambient,
                tau_rank: e.tau_rank,
            })?;
        if !inserted {
            continue;
        }
        *stats.insertions.entry(class.key().to_string()).or_default() += 1;
        for &sym in a1.alphabet.symbols() {
            let gram = class.gram_with(sym);
            let next = forward_density_step(&density, &sum, &gram)?;
            queue.push_back((word.extended(sym), next, class.advanced(sym)));
        }
    }
    Ok(EquivalenceVerdict::Equivalent {
        stats: stats.finish(a1),
    })
}

/// Dispatches to a decider: `Auto` picks the unary bound for one-letter
/// alphabets and span closure otherwise.
pub fn decide_equivalence(
    a1: &MultiLetterQFA,
    a2: &MultiLetterQFA,
    method: Method,
    tol: &Tolerances,
) -> Result<EquivalenceVerdict, EquivError> {
    match method {
        Method::Auto => {
            if a1.alphabet.is_unary() && a2.alphabet.is_unary() {
                decide_unary_bound(a1, a2, tol)
            } else {
                decide_span_closure(a1, a2, tol)
            }
        }
        Method::UnaryBound => decide_unary_bound(a1, a2, tol),
        Method::SpanClosure => decide_span_closure(a1, a2, tol),
    }
}

/// Compares acceptance probabilities on every word of length at most
/// `max_len`, in layer-then-lexicographic order. A clean sweep is evidence,
/// not proof, of equivalence.
pub fn exhaustive_check(
    a1: &MultiLetterQFA,
    a2: &MultiLetterQFA,
    max_len: usize,
    tol_prob: f64,
    budget: u64,
) -> Result<OracleOutcome, EquivError> {
    check_same_alphabet(a1, a2)?;
    let m = a1.alphabet.len() as u128;
    let mut required: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..=max_len {
        required = required.saturating_add(power);
        power = power.saturating_mul(m);
    }
    if required > budget as u128 {
        return Err(EquivError::BudgetExceeded {
            required,
            budget: budget as u128,
        });
    }
    let proj1 = a1.projector();
    let proj2 = a2.projector();
    let mut layer = vec![(Word::empty(), a1.initial.clone(), a2.initial.clone())];
    for len in 0..=max_len {
        for (word, s1, s2) in &layer {
            let p1 = proj1.probability(s1);
            let p2 = proj2.probability(s2);
            if (p1 - p2).abs() > tol_prob {
                return Ok(OracleOutcome::Violation {
                    witness: word.clone(),
                    p1,
                    p2,
                });
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * a1.alphabet.len());
        for (word, s1, s2) in &layer {
            for &sym in a1.alphabet.symbols() {
                let child = word.extended(sym);
                let step = child.len();
                let g1 = gram_for_step(a1.k, &child, step)?;
                let g2 = gram_for_step(a2.k, &child, step)?;
                let u1 = a1
                    .table
                    .get(&g1)
                    .ok_or_else(|| crate::model::ModelError::MissingGram(g1.as_str().into()))?;
                let u2 = a2
                    .table
                    .get(&g2)
                    .ok_or_else(|| crate::model::ModelError::MissingGram(g2.as_str().into()))?;
                next.push((child, u1.mat_vec(s1), u2.mat_vec(s2)));
            }
        }
        layer = next;
    }
    Ok(OracleOutcome::ExhaustedClean { max_len })
}
