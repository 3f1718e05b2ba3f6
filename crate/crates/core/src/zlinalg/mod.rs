//! Exact linear algebra over Z and Q, and finitely generated abelian groups.

mod abgroup;
mod discover;
mod hnf;
mod lattice;
mod matrix;
pub mod modular;
mod scalar;
mod snf;

use thiserror::Error;

pub use abgroup::{AbGroup, AbHom, FiniteGroup};
pub use discover::{ab_discover, Discovered};
pub use hnf::{hnf, hnf_rows};
pub use lattice::{cokernel, rational_kernel, rational_kernel_small, sparse_kernel, subquotient_torsion, Lattice};
pub use matrix::IntMatrix;
pub use snf::{determinant, invariant_factors, rank, snf, Snf, VERIFY_DIMENSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed matrix text: {0}")]
    Parse(String),
    #[error("lattice is not contained in the ambient lattice")]
    NotSubLattice,
    #[error("generators span {found} elements, expected {expected}")]
    GeneratorsInsufficient { found: u64, expected: u64 },
    #[error("homomorphism does not respect the relations of its domain")]
    NotWellDefined,
}
