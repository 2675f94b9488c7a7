//! Diagonal-sum composite of two automata and the forward observables
//! propagated over it.

use super::EquivError;
use crate::linalg::{CMatrix, CVector};
use crate::model::{KGram, MultiLetterQFA, Symbol, Word, usable_grams};
use std::collections::HashMap;

/// Block composite of two automata over a shared alphabet.
///
/// The composite is itself a `k`-letter automaton with `k = max(k1, k2)`
/// and `n1 + n2` states; each transition is `diag(U1, U2)` where the block
/// of the shorter-memory automaton is selected by the trailing characters
/// of the window. The two embedded unit vectors `rho` and `pi` carry the
/// component initial states; the composite's own initial vector is `rho`.
#[derive(Debug, Clone)]
pub struct DiagonalSumQFA {
    pub qfa: MultiLetterQFA,
    pub n1: usize,
    pub n2: usize,
    pub k1: usize,
    pub k2: usize,
    /// `(ψ0⁽¹⁾; 0)`.
    pub rho: CVector,
    /// `(0; ψ0⁽²⁾)`.
    pub pi: CVector,
    blocks: HashMap<KGram, (CMatrix, CMatrix)>,
}

pub(crate) fn check_same_alphabet(
    a1: &MultiLetterQFA,
    a2: &MultiLetterQFA,
) -> Result<(), EquivError> {
    if a1.alphabet != a2.alphabet {
        return Err(EquivError::AlphabetMismatch {
            left: a1.alphabet.as_string(),
            right: a2.alphabet.as_string(),
        });
    }
    Ok(())
}

/// Builds the diagonal sum of two automata over the same alphabet.
pub fn diagonal_sum(
    a1: &MultiLetterQFA,
    a2: &MultiLetterQFA,
) -> Result<DiagonalSumQFA, EquivError> {
    check_same_alphabet(a1, a2)?;
    let k = a1.k.max(a2.k);
    let n = a1.n + a2.n;
    let mut blocks = HashMap::new();
    let mut table = HashMap::new();
    for gram in usable_grams(k, &a1.alphabet) {
        // The window length is the max of the two memories, so the block
        // of the shorter automaton reads its own suffix of the window.
        let g1 = gram.suffix(a1.k);
        let g2 = gram.suffix(a2.k);
        let u1 = a1
            .table
            .get(&g1)
            .ok_or_else(|| EquivError::Model(crate::model::ModelError::MissingGram(
                g1.as_str().to_string(),
            )))?;
        let u2 = a2
            .table
            .get(&g2)
            .ok_or_else(|| EquivError::Model(crate::model::ModelError::MissingGram(
                g2.as_str().to_string(),
            )))?;
        table.insert(gram.clone(), CMatrix::block_diag(u1, u2));
        blocks.insert(gram, (u1.clone(), u2.clone()));
    }
    let zero1 = CVector::zeros(a1.n);
    let zero2 = CVector::zeros(a2.n);
    let rho = CVector::concat(&a1.initial, &zero2);
    let pi = CVector::concat(&zero1, &a2.initial);
    let accepting = a1
        .accepting
        .iter()
        .copied()
        .chain(a2.accepting.iter().map(|&q| a1.n + q))
        .collect();
    let qfa = MultiLetterQFA {
        k,
        alphabet: a1.alphabet.clone(),
        n,
        accepting,
        initial: rho.clone(),
        table,
    };
    Ok(DiagonalSumQFA {
        qfa,
        n1: a1.n,
        n2: a2.n,
        k1: a1.k,
        k2: a2.k,
        rho,
        pi,
        blocks,
    })
}

impl DiagonalSumQFA {
    pub fn k(&self) -> usize {
        self.qfa.k
    }

    /// Component blocks of the transition selected by `gram`.
    pub fn blocks_for(&self, gram: &KGram) -> Result<&(CMatrix, CMatrix), EquivError> {
        self.blocks.get(gram).ok_or_else(|| {
            EquivError::Model(crate::model::ModelError::MissingGram(
                gram.as_str().to_string(),
            ))
        })
    }

    /// `‖P_acc μ̄(ω) v‖²` for an embedded start vector (`rho` or `pi`).
    pub fn embedded_probability(&self, start: &CVector, word: &Word) -> Result<f64, EquivError> {
        let state = self.qfa.propagate(start, word)?;
        Ok(self.qfa.projector().probability(&state))
    }
}

/// Pair of forward densities, one block per component automaton:
/// `d_i = μ̄_i(ω) ψ0⁽ⁱ⁾ ψ0⁽ⁱ⁾† μ̄_i(ω)†`.
#[derive(Debug, Clone)]
pub struct DensityPair {
    pub d1: CMatrix,
    pub d2: CMatrix,
}

impl DensityPair {
    /// Densities of the two initial states (the empty word).
    pub fn initial(a1: &MultiLetterQFA, a2: &MultiLetterQFA) -> Self {
        DensityPair {
            d1: a1.initial.outer(),
            d2: a2.initial.outer(),
        }
    }
}

/// Advances both densities by one letter: `d_i ← U_i d_i U_i†` with the
/// blocks selected by `gram`. Conjugation preserves trace, rank, and
/// positive semidefiniteness.
pub fn forward_density_step(
    density: &DensityPair,
    sum: &DiagonalSumQFA,
    gram: &KGram,
) -> Result<DensityPair, EquivError> {
    let (u1, u2) = sum.blocks_for(gram)?;
    Ok(DensityPair {
        d1: density.d1.conjugate_by(u1),
        d2: density.d2.conjugate_by(u2),
    })
}

/// Equivalence class of words that select the same future transitions:
/// the padded window of the last `k − 1` letters. For `k = 1` there is a
/// single class with the empty key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuffixClass {
    key: String,
}

impl SuffixClass {
    /// Class of the empty word: all padding.
    pub fn initial(k: usize) -> Self {
        assert!(k >= 1, "window length must be at least 1");
        SuffixClass {
            key: crate::model::PADDING_CHAR.to_string().repeat(k - 1),
        }
    }

    /// Class of an arbitrary word.
    pub fn of_word(k: usize, word: &Word) -> Self {
        let mut class = SuffixClass::initial(k);
        for &sym in word.letters() {
            class = class.advanced(sym);
        }
        class
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    /// The window selecting the transition that extends this class by
    /// `sym`: the class key with `sym` appended.
    pub fn gram_with(&self, sym: Symbol) -> KGram {
        let mut chars = self.key.clone();
        chars.push(sym.as_char());
        KGram::from_raw(chars)
    }

    /// Class reached after reading one more letter.
    pub fn advanced(&self, sym: Symbol) -> SuffixClass {
        if self.key.is_empty() {
            return self.clone();
        }
        let mut chars: Vec<char> = self.key.chars().collect();
        chars.remove(0);
        chars.push(sym.as_char());
        SuffixClass {
            key: chars.into_iter().collect(),
        }
    }
}

/// Number of reachable suffix classes: `m^{k−1}` full windows plus one
/// padded window per word shorter than `k − 1`.
pub fn class_count(k: usize, m: usize) -> u64 {
    assert!(k >= 1, "window length must be at least 1");
    let m = m as u64;
    let mut total: u64 = 0;
    let mut power: u64 = 1;
    for _ in 0..(k - 1) {
        total = total.saturating_add(power);
        power = power.saturating_mul(m);
    }
    total.saturating_add(power)
}
