//! Real vectorization of Hermitian matrices and an incremental
//! orthonormal span basis with a numerical rank decision.

use super::CMatrix;
use crate::tolerance::HERMITIAN_TOL;
use thiserror::Error;

/// Real encoding of a Hermitian `n×n` matrix as an `n²`-vector.
///
/// Diagonal entries are stored as-is; each strict upper-triangle entry
/// `(i, j)` contributes the pair `(√2·re, √2·im)`. The scaling makes the
/// encoding an isometry: the Euclidean dot product of two encodings equals
/// the Frobenius inner product `Re tr(A†B)` of the matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianVec {
    coords: Vec<f64>,
}

#[derive(Debug, Error)]
#[error("matrix is not Hermitian: max |A - A†| entry {deviation:.3e} exceeds {tol:.3e}")]
pub struct NotHermitian {
    pub deviation: f64,
    pub tol: f64,
}

/// Encodes a Hermitian matrix; rejects inputs whose deviation from
/// `H == H†` exceeds [`HERMITIAN_TOL`].
pub fn vectorize_hermitian(h: &CMatrix) -> Result<HermitianVec, NotHermitian> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(NotHermitian {
            deviation,
            tol: HERMITIAN_TOL,
        });
    }
    let n = h.dim();
    let sqrt2 = 2.0_f64.sqrt();
    let mut coords = Vec::with_capacity(n * n);
    for i in 0..n {
        coords.push(h[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // Average the two off-diagonal images so tiny asymmetries
            // within tolerance do not leak into the encoding.
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            coords.push(sqrt2 * z.re);
            coords.push(sqrt2 * z.im);
        }
    }
    Ok(HermitianVec { coords })
}

impl HermitianVec {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Concatenates the encodings of several blocks into one ambient vector.
    pub fn concat(parts: &[&HermitianVec]) -> Vec<f64> {
        let mut out = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            out.extend_from_slice(&p.coords);
        }
        out
    }
}

/// Raised when a basis would grow past its ambient dimension. With exact
/// arithmetic this cannot happen; numerically it signals that the rank
/// tolerance is too small for the instance at hand.
#[derive(Debug, Error)]
#[error("span basis exceeded its ambient dimension {dim_ambient}: rank tolerance {tau_rank:.3e} is too tight")]
pub struct SpanCapError {
    pub dim_ambient: usize,
    pub tau_rank: f64,
}

/// Incrementally grown orthonormal basis of a real subspace.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    dim_ambient: usize,
    tau_rank: f64,
    members: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl SpanBasis {
    pub fn new(dim_ambient: usize, tau_rank: f64) -> Self {
        SpanBasis {
            dim_ambient,
            tau_rank,
            members: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    /// Inserts `v` if it adds a new direction to the span.
    ///
    /// The candidate is projected out of the current members with a modified
    /// Gram-Schmidt pass applied twice; the vector is accepted when the
    /// residual norm exceeds `tau_rank · (1 + ‖v‖)`. Returns `Ok(true)` and
    /// appends the normalized residual on acceptance, `Ok(false)` (basis
    /// untouched) when `v` already lies in the span, and [`SpanCapError`]
    /// if acceptance would push the basis past the ambient dimension.
    pub fn try_insert(&mut self, v: &[f64]) -> Result<bool, SpanCapError> {
        assert_eq!(
            v.len(),
            self.dim_ambient,
            "span candidate has dimension {} but ambient is {}",
            v.len(),
            self.dim_ambient
        );
        let scale = norm(v);
        let mut residual = v.to_vec();
        for _ in 0..2 {
            for m in &self.members {
                let c = dot(&residual, m);
                for (r, mi) in residual.iter_mut().zip(m) {
                    *r -= c * mi;
                }
            }
        }
        let res_norm = norm(&residual);
        if res_norm <= self.tau_rank * (1.0 + scale) {
            return Ok(false);
        }
        if self.members.len() >= self.dim_ambient {
            return Err(SpanCapError {
                dim_ambient: self.dim_ambient,
                tau_rank: self.tau_rank,
            });
        }
        for r in &mut residual {
            *r /= res_norm;
        }
        self.members.push(residual);
        Ok(true)
    }

    /// Largest deviation of `members·membersᵀ` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.members.iter().enumerate() {
            for (j, b) in self.members.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - expect).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, CMatrix};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_matrix_encodes_to_zero() {
        let v = vectorize_hermitian(&CMatrix::zeros(3)).unwrap();
        assert!(v.coords().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity_encoding_has_unit_diagonal_coords() {
        let v = vectorize_hermitian(&CMatrix::identity(2)).unwrap();
        assert_eq!(v.coords(), &[1.0, 1.0, 0.0, 0.0]);
        let total: f64 = v.coords().iter().map(|x| x * x).sum();
        assert!((total.sqrt() - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_encoding_is_a_single_scaled_pair() {
        let x = CMatrix::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]]);
        let v = vectorize_hermitian(&x).unwrap();
        assert_eq!(v.coords(), &[0.0, 0.0, 2.0_f64.sqrt(), 0.0]);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = CMatrix::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.5, 0.0), c(0.0, 0.0)]]);
        assert!(vectorize_hermitian(&m).is_err());
    }

    #[test]
    fn first_nonzero_vector_is_inserted() {
        let mut b = SpanBasis::new(3, 1e-7);
        assert!(b.try_insert(&[0.0, 2.0, 0.0]).unwrap());
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn reinserting_the_same_vector_is_rejected() {
        let mut b = SpanBasis::new(3, 1e-7);
        let v = [1.0, 2.0, -0.5];
        assert!(b.try_insert(&v).unwrap());
        assert!(!b.try_insert(&v).unwrap());
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn linear_combination_of_members_is_rejected() {
        let mut b = SpanBasis::new(3, 1e-7);
        assert!(b.try_insert(&[1.0, 0.0, 0.0]).unwrap());
        assert!(b.try_insert(&[0.0, 1.0, 0.0]).unwrap());
        let s = 1.0 / 2.0_f64.sqrt();
        assert!(!b.try_insert(&[s, s, 0.0]).unwrap());
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn cap_error_reports_ambient_dimension() {
        let mut b = SpanBasis::new(2, 0.0);
        b.try_insert(&[1.0, 0.3]).unwrap();
        b.try_insert(&[0.2, 1.0]).unwrap();
        // With a zero tolerance any rounding residue forces an insert.
        let err = b.try_insert(&[0.37, 0.91]).unwrap_err();
        assert_eq!(err.dim_ambient, 2);
    }

    proptest! {
        #[test]
        fn encoding_preserves_frobenius_inner_product(
            seed_a in proptest::collection::vec(-3.0f64..3.0, 36),
            seed_b in proptest::collection::vec(-3.0f64..3.0, 36),
            n in 1usize..=6,
        ) {
            let hermitian = |seed: &[f64]| {
                let raw = CMatrix::from_fn(n, |i, j| c(seed[i * n + j], seed[j * n + i] / 2.0));
                raw.add(&raw.dagger()).scale(c(0.5, 0.0))
            };
            let a = hermitian(&seed_a);
            let b = hermitian(&seed_b);
            let va = vectorize_hermitian(&a).unwrap();
            let vb = vectorize_hermitian(&b).unwrap();
            let lhs: f64 = va.coords().iter().zip(vb.coords()).map(|(x, y)| x * y).sum();
            let rhs = a.frob_inner(&b).re;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn members_stay_orthonormal_and_capped(
            vecs in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 4), 1..20),
        ) {
            let mut b = SpanBasis::new(4, 1e-7);
            let mut inserted = 0;
            for v in &vecs {
                if b.try_insert(v).unwrap() {
                    inserted += 1;
                }
            }
            prop_assert!(inserted <= 4);
            prop_assert_eq!(inserted, b.len());
            prop_assert!(b.orthonormality_defect() <= 1e-10);
        }

        #[test]
        fn full_basis_absorbs_everything(
            v in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            let mut b = SpanBasis::new(3, 1e-7);
            b.try_insert(&[1.0, 0.0, 0.0]).unwrap();
            b.try_insert(&[0.0, 1.0, 0.0]).unwrap();
            b.try_insert(&[0.0, 0.0, 1.0]).unwrap();
            prop_assert!(!b.try_insert(&v).unwrap());
        }
    }
}
