//! Exact rational linear algebra.
//!
//! Everything downstream reduces to the operations in this module. Two
//! conventions are fixed here once and inherited by the whole crate:
//!
//! * vectors are **rows** and linear maps act on the right, `v · M`;
//! * the canonical form of a subspace is the reduced row echelon form of a
//!   basis matrix, so equal subspaces have bit-identical bases.

mod matrix;
mod quotient;
mod scalar;
mod subspace;

pub use matrix::{row_times_matrix, Matrix, Rref};
pub use quotient::{induced_map, QuotientPresentation};
pub use scalar::{format_scalar, frac, int, parse_scalar, Scalar};
pub use subspace::{intersect, preimage, sum, Subspace};

use thiserror::Error;

/// Errors raised by the subspace lattice operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LinError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("dimension mismatch: map has {map_cols} columns, space is {ambient}-dimensional")]
    DimensionMismatch { map_cols: usize, ambient: usize },
    #[error("divisor is not contained in total; witness {witness:?}")]
    NotContained { witness: Vec<Scalar> },
    #[error("map does not send source total into target total; witness {witness:?}")]
    NotIntoTotal { witness: Vec<Scalar> },
    #[error("induced map is not well-defined: divisor escapes; witness {witness:?}")]
    NotWellDefined { witness: Vec<Scalar> },
    #[error("malformed rational `{text}`: {reason}")]
    BadScalar { text: String, reason: String },
}
