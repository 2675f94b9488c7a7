//! Numerical tolerances used across validation and the deciders.

/// Tolerance bundle threaded through validation and equivalence checking.
///
/// All fields are absolute thresholds on IEEE-754 double arithmetic. The
/// defaults allow for rounding over a few hundred matrix multiplications,
/// which is the deepest product any decider in this crate performs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max-abs entry of `U†U − I` allowed for a transition matrix.
    pub unitary: f64,
    /// Allowed deviation of the initial state norm from 1.
    pub norm: f64,
    /// Relative residual threshold for span-basis rank decisions.
    pub rank: f64,
    /// Probability difference above which two automata are declared
    /// not equivalent.
    pub prob: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitary: 1e-8,
            norm: 1e-8,
            rank: 1e-7,
            prob: 1e-7,
        }
    }
}

/// Max-abs deviation from `H == H†` accepted when vectorizing a matrix
/// that the caller claims is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;
