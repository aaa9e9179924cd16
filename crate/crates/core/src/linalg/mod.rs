//! Basis conventions and the operator substrate.
//!
//! A chain of `n` sites carries the basis `V_n ⊗ ⋯ ⊗ V_2 ⊗ V_1` with
//! `V = ℂv₊ ⊕ ℂv₋`. Basis states are indexed by an integer whose bit `i-1`
//! holds site `i` (0 for `v₊`, 1 for `v₋`), so site 1 is the least
//! significant bit and `kron(a, b)` places `a` on the high-numbered sites.

mod decomp;
pub mod elem;
mod op;
mod state;

pub use decomp::{
    eig_hermitian, rank, rank_dense, rank_nullspace, rank_nullspace_dense, singular_values, singular_values_dense, Eigen,
};
pub use op::{comm_norm, embed_pair, kron, LinOp};
pub use state::{SpinConfig, StateVec};

pub use num_complex::Complex64 as C64;

/// Relative singular-value cutoff used for ranks and null spaces.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit & 1 == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    /// Eigenvalue of σᶻ.
    pub fn sz(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

/// Shorthand for a real number as a complex scalar.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
