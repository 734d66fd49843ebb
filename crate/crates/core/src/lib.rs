//! Exact-arithmetic homological algebra over the rationals.
//!
//! The crate is organised in layers:
//!
//! * [`exactlin`] — rational matrices, canonical subspaces and the lattice
//!   operations (sum, intersection, preimage, quotient, induced maps) that
//!   every page formula reduces to;
//! * [`complexes`] — cochain complexes, their cohomology, and filtrations;
//! * [`specseq`] — the spectral sequence of a filtration: pages, differentials,
//!   stabilisation and the convergence check;
//! * [`dgalg`] — sector-decomposed differential graded algebras, morphisms,
//!   modules with covariant derivative, curvature and sheaf cohomology;
//! * [`fibration`] — differential fibrations, the induced filtration, fiber
//!   cohomology, the flat base connection and the second page, with a
//!   cross-check against the generic engine;
//! * [`models`] — concrete calculi: the Heisenberg group algebra, Laurent
//!   circle, 2-torus, twisted modules and degenerate fibrations;
//! * [`formats`] — the `complex.v1` / `dga.v1` JSON file formats;
//! * [`report`] — deterministic dimension-grid reports (markdown and JSON).
//!
//! All arithmetic is exact: scalars are arbitrary-precision rationals and no
//! operation ever rounds.

pub mod complexes;
pub mod dgalg;
pub mod exactlin;
pub mod fibration;
pub mod formats;
pub mod models;
pub mod randgen;
pub mod report;
pub mod specseq;

pub use exactlin::{Matrix, QuotientPresentation, Scalar, Subspace};
