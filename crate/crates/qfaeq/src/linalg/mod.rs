//! Dense complex matrices and vectors.
//!
//! Everything in this crate works on small dense matrices (automaton state
//! counts are in the single digits), so the representation is a plain
//! row-major `Vec<Complex64>`. Operations panic on dimension mismatch; the
//! callers construct conformable operands by design.

mod span;

pub use span::{HermitianVec, NotHermitian, SpanBasis, SpanCapError, vectorize_hermitian};

use num_complex::Complex64;
use std::fmt;
use std::ops::{Index, IndexMut};

pub type C64 = Complex64;

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from a row-major list of entries; panics unless `data.len()`
    /// is a perfect square matching `n²` for some `n`.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must hold n² entries");
        CMatrix { n, data }
    }

    /// Convenience for literal 2x2 / 3x3 matrices in tests and fixtures.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let mut m = CMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix rows must all have length n");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matrix product needs equal dimensions");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn mat_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.n, v.dim(), "matrix-vector product needs equal dimensions");
        let mut out = vec![C64::ZERO; self.n];
        for i in 0..self.n {
            let mut acc = C64::ZERO;
            for j in 0..self.n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        CVector::from_vec(out)
    }

    /// Frobenius inner product `tr(A†B)`, conjugate-linear in `self`.
    pub fn frob_inner(&self, rhs: &CMatrix) -> C64 {
        assert_eq!(self.n, rhs.n, "Frobenius inner product needs equal dimensions");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix::from_fn(self.n, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix::from_fn(self.n, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, factor: C64) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(i, j)] * factor)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs entry of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!(self.n, rhs.n);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-abs entry of `U†U − I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.dagger().mul(self);
        gram.max_abs_diff(&CMatrix::identity(self.n))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Max-abs entry of `A − A†`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// `U self U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        u.mul(self).mul(&u.dagger())
    }

    /// Block-diagonal composite `diag(a, b)`.
    pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let n = a.n + b.n;
        let mut m = CMatrix::zeros(n);
        for i in 0..a.n {
            for j in 0..a.n {
                m[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..b.n {
            for j in 0..b.n {
                m[(a.n + i, a.n + j)] = b[(i, j)];
            }
        }
        m
    }

    /// Extracts the square block starting at `(offset, offset)`.
    pub fn block(&self, offset: usize, size: usize) -> CMatrix {
        assert!(offset + size <= self.n);
        CMatrix::from_fn(size, |i, j| self[(offset + i, offset + j)])
    }

    pub fn has_finite_entries(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Complex column vector.
#[derive(Clone, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector {
            data: vec![C64::ZERO; n],
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = CVector::zeros(n);
        v.data[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_vec(data: Vec<C64>) -> Self {
        CVector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|rhs⟩`, conjugate-linear in `self`.
    pub fn dot(&self, rhs: &CVector) -> C64 {
        assert_eq!(self.dim(), rhs.dim());
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, factor: C64) -> CVector {
        CVector::from_vec(self.data.iter().map(|z| z * factor).collect())
    }

    /// Rank-one projector `|self⟩⟨self|`.
    pub fn outer(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, |i, j| self.data[i] * self.data[j].conj())
    }

    /// Stacks `a` on top of `b`.
    pub fn concat(a: &CVector, b: &CVector) -> CVector {
        let mut data = a.data.clone();
        data.extend_from_slice(&b.data);
        CVector::from_vec(data)
    }

    pub fn has_finite_entries(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CVector [")?;
        for z in &self.data {
            write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn hadamard() -> CMatrix {
        let h = 1.0 / 2.0_f64.sqrt();
        CMatrix::from_rows(&[&[c(h, 0.0), c(h, 0.0)], &[c(h, 0.0), c(-h, 0.0)]])
    }

    #[test]
    fn identity_is_left_neutral() {
        let a = CMatrix::from_rows(&[&[c(1.0, 2.0), c(0.5, 0.0)], &[c(0.0, -1.0), c(3.0, 0.0)]]);
        assert_eq!(CMatrix::identity(2).mul(&a), a);
    }

    #[test]
    fn dagger_is_involutive() {
        let a = CMatrix::from_rows(&[&[c(1.0, 2.0), c(0.5, -0.25)], &[c(0.0, -1.0), c(3.0, 4.0)]]);
        assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn frob_inner_of_identities_is_dimension() {
        for n in 1..=4 {
            let id = CMatrix::identity(n);
            let v = id.frob_inner(&id);
            assert_eq!(v, c(n as f64, 0.0));
        }
    }

    #[test]
    fn hadamard_is_unitary_to_machine_precision() {
        assert!(hadamard().unitarity_deviation() <= 1e-15);
    }

    #[test]
    fn stretched_diagonal_is_not_unitary() {
        let d = CMatrix::from_rows(&[&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(2.0, 0.0)]]);
        assert!(!d.is_unitary(1e-8));
        assert!((d.unitarity_deviation() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_matrices_are_unitary() {
        let p = CMatrix::from_rows(&[
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        assert!(p.is_unitary(0.0));
    }

    #[test]
    fn block_diag_roundtrips_blocks() {
        let a = hadamard();
        let b = CMatrix::identity(3);
        let s = CMatrix::block_diag(&a, &b);
        assert_eq!(s.dim(), 5);
        assert_eq!(s.block(0, 2), a);
        assert_eq!(s.block(2, 3), b);
    }

    #[test]
    fn outer_product_has_unit_trace_for_unit_vectors() {
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let d = v.outer();
        assert!((d.trace().re - 1.0).abs() < 1e-15);
        assert!(d.hermitian_deviation() < 1e-15);
    }
}
