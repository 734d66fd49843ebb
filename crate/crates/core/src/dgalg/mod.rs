//! Differential graded algebras with a finite sector decomposition.
//!
//! A sector DGA is graded by a finite window of a (partial) group: every
//! homogeneous element is a sum of `sector · frame-form` terms, the
//! differential never mixes sectors, and the wedge of two sectors lands in
//! their product sector with the left frame factor conjugated past the right
//! sector. That factorisation — an invariant-frame wedge table plus one
//! conjugation matrix per sector and degree — is the whole multiplication
//! law, and every axiom check quantifies over it exhaustively.

mod connection;
mod dga;
mod element;
mod frame;
mod morphism;
mod sector;

pub use connection::{ConnectionModule, CurvatureReport, SheafCohomology};
pub use dga::{AxiomFailure, AxiomReport, SectorDga};
pub use element::{AlgElement, ModElement};
pub use frame::{signed_subset_label, FrameWedge, SignedSubset};
pub use morphism::DgaMorphism;
pub use sector::{SectorId, SectorSet};

use thiserror::Error;

use crate::complexes::ComplexDefect;
use crate::exactlin::LinError;

#[derive(Debug, Clone, Error)]
pub enum DgaError {
    #[error("sector product {left} · {right} is out of window")]
    OutOfWindow { left: String, right: String },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("module is not flat; curvature witness: {witness}")]
    NotFlat { witness: String },
    #[error("operation requires a sector-diagonal connection")]
    NotSectorDiagonal,
    #[error("degree {0} out of range (top degree {1})")]
    DegreeOutOfRange(usize, usize),
    #[error(transparent)]
    Complex(#[from] ComplexDefect),
    #[error(transparent)]
    Lin(#[from] LinError),
}
