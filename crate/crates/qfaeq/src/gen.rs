//! Seeded instance generators.
//!
//! All randomness flows through a ChaCha8 stream cipher seeded from a
//! caller-provided `u64`, so a given seed reproduces the same automaton
//! byte for byte on every run of this crate. Unitaries are Haar-distributed:
//! a matrix of independent standard complex Gaussians is QR-factored and
//! the Q factor is corrected by the phases of the R diagonal.

use crate::linalg::{C64, CMatrix, CVector};
use crate::model::{Alphabet, MultiLetterQFA, usable_grams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("automaton sizes must satisfy n ≥ 1 and k ≥ 1 (got n={n}, k={k})")]
    InvalidSize { n: usize, k: usize },
    #[error("{0:?} is not a permutation of 0..{1}")]
    InvalidPermutation(Vec<usize>, usize),
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / 2.0_f64.sqrt()
}

/// QR by modified Gram-Schmidt over columns, re-orthogonalized once.
/// Returns `(q, r_diag)`; only the R diagonal is needed for the phase fix.
fn mgs_qr(a: &CMatrix) -> (CMatrix, Vec<C64>) {
    let n = a.dim();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    let mut r_diag = vec![C64::ZERO; n];
    let mut q_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (j, col) in cols.iter_mut().enumerate() {
        for _ in 0..2 {
            for q in &q_cols {
                let coef: C64 = q.iter().zip(col.iter()).map(|(qi, ci)| qi.conj() * ci).sum();
                for (ci, qi) in col.iter_mut().zip(q) {
                    *ci -= coef * qi;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        r_diag[j] = C64::new(norm, 0.0);
        for ci in col.iter_mut() {
            *ci /= norm;
        }
        q_cols.push(col.clone());
    }
    let q = CMatrix::from_fn(n, |i, j| q_cols[j][i]);
    (q, r_diag)
}

/// Haar-distributed random unitary.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let ginibre = CMatrix::from_fn(n, |_, _| complex_gaussian(rng));
    let (q, r_diag) = mgs_qr(&ginibre);
    // Phase correction keeps the distribution uniform regardless of the
    // QR sign convention.
    CMatrix::from_fn(n, |i, j| {
        let phase = r_diag[j] / r_diag[j].norm();
        q[(i, j)] * phase
    })
}

/// Normalized vector of independent standard complex Gaussians.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> CVector {
    let raw: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CVector::from_vec(raw.into_iter().map(|z| z / norm).collect())
}

/// Uniformly random nonempty proper subset of `0..n` for `n ≥ 2`;
/// a fair coin between `{}` and `{0}` for `n = 1`.
pub fn random_accepting<R: Rng>(n: usize, rng: &mut R) -> BTreeSet<usize> {
    if n == 1 {
        return if rng.random::<bool>() {
            [0].into_iter().collect()
        } else {
            BTreeSet::new()
        };
    }
    loop {
        let mask: u64 = rng.random_range(0..(1u64 << n));
        if mask != 0 && mask != (1u64 << n) - 1 {
            return (0..n).filter(|i| mask >> i & 1 == 1).collect();
        }
    }
}

/// Random `k`-letter automaton with Haar transition matrices, deterministic
/// in `seed`.
pub fn gen_random_qfa(
    n: usize,
    k: usize,
    alphabet: &Alphabet,
    seed: u64,
) -> Result<MultiLetterQFA, GenError> {
    if n == 0 || k == 0 {
        return Err(GenError::InvalidSize { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Grams are filled in canonical order so the table is a pure function
    // of the seed.
    let mut table = HashMap::new();
    for gram in usable_grams(k, alphabet) {
        table.insert(gram, haar_unitary(n, &mut rng));
    }
    let initial = random_state(n, &mut rng);
    let accepting = random_accepting(n, &mut rng);
    Ok(MultiLetterQFA {
        k,
        alphabet: alphabet.clone(),
        n,
        accepting,
        initial,
        table,
    })
}

/// Relabels the states of `a` by `perm`: every transition matrix is
/// conjugated by the permutation, and the initial vector and accepting set
/// are permuted to match. The result accepts every word with the same
/// probability as `a`.
pub fn gen_permutation_variant(
    a: &MultiLetterQFA,
    perm: &[usize],
) -> Result<MultiLetterQFA, GenError> {
    let n = a.n;
    let mut seen = vec![false; n];
    let valid = perm.len() == n
        && perm.iter().all(|&p| {
            if p >= n || seen[p] {
                false
            } else {
                seen[p] = true;
                true
            }
        });
    if !valid {
        return Err(GenError::InvalidPermutation(perm.to_vec(), n));
    }
    let table = a
        .table
        .iter()
        .map(|(gram, u)| {
            let conjugated = CMatrix::from_fn(n, |i, j| {
                // (P U P†)[perm[i]][perm[j]] = U[i][j]
                let i_src = perm.iter().position(|&p| p == i).unwrap();
                let j_src = perm.iter().position(|&p| p == j).unwrap();
                u[(i_src, j_src)]
            });
            (gram.clone(), conjugated)
        })
        .collect();
    let mut initial = vec![C64::ZERO; n];
    for (i, &target) in perm.iter().enumerate() {
        initial[target] = a.initial[i];
    }
    Ok(MultiLetterQFA {
        k: a.k,
        alphabet: a.alphabet.clone(),
        n,
        accepting: a.accepting.iter().map(|&q| perm[q]).collect(),
        initial: CVector::from_vec(initial),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Word;
    use crate::model::testutil::ends_in_b_qfa;
    use crate::tolerance::Tolerances;

    #[test]
    fn haar_unitaries_pass_the_tight_unitarity_check() {
        let alphabet = Alphabet::new("ab").unwrap();
        for seed in 0..100 {
            let a = gen_random_qfa(3, 2, &alphabet, seed).unwrap();
            for (gram, u) in &a.table {
                assert!(
                    u.unitarity_deviation() <= 1e-10,
                    "seed {seed} gram {gram} deviates by {}",
                    u.unitarity_deviation()
                );
            }
        }
    }

    #[test]
    fn generated_automata_validate() {
        let alphabet = Alphabet::new("abc").unwrap();
        for seed in [0, 1, 42] {
            for (n, k) in [(1, 1), (2, 2), (3, 1), (3, 3)] {
                let a = gen_random_qfa(n, k, &alphabet, seed).unwrap();
                let report = a.validate(&Tolerances::default());
                assert!(report.is_valid(), "n={n} k={k}: {report}");
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_automaton() {
        let alphabet = Alphabet::new("ab").unwrap();
        let a = gen_random_qfa(3, 2, &alphabet, 7).unwrap();
        let b = gen_random_qfa(3, 2, &alphabet, 7).unwrap();
        assert_eq!(a, b);
        let c = gen_random_qfa(3, 2, &alphabet, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_sizes_are_rejected() {
        let alphabet = Alphabet::new("a").unwrap();
        assert!(gen_random_qfa(0, 1, &alphabet, 0).is_err());
        assert!(gen_random_qfa(1, 0, &alphabet, 0).is_err());
    }

    #[test]
    fn identity_permutation_is_a_noop() {
        let a = ends_in_b_qfa();
        let same = gen_permutation_variant(&a, &[0, 1]).unwrap();
        assert_eq!(a, same);
    }

    #[test]
    fn swapping_states_moves_the_accepting_set() {
        let a = ends_in_b_qfa();
        let swapped = gen_permutation_variant(&a, &[1, 0]).unwrap();
        assert_eq!(swapped.accepting, [0].into_iter().collect());
        for text in ["", "a", "b", "ab", "ba", "abba", "bab"] {
            let w = Word::parse(text, &a.alphabet).unwrap();
            let pa = a.acceptance_probability(&w).unwrap();
            let pb = swapped.acceptance_probability(&w).unwrap();
            assert!((pa - pb).abs() < 1e-12);
        }
    }

    #[test]
    fn malformed_permutations_are_rejected() {
        let a = ends_in_b_qfa();
        assert!(gen_permutation_variant(&a, &[0]).is_err());
        assert!(gen_permutation_variant(&a, &[0, 0]).is_err());
        assert!(gen_permutation_variant(&a, &[0, 2]).is_err());
    }
}
