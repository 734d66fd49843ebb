use std::fmt;

use super::matrix::{reduce_against, Matrix};
use super::scalar::Scalar;
use super::LinError;

/// A linear subspace of `ℚ^ambient`, stored as the reduced row echelon basis.
/// The representation is canonical: equal subspaces compare equal bitwise.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} of {}, basis {:?})",
            self.dim(),
            self.ambient,
            self.basis
        )
    }
}

impl Subspace {
    /// Canonicalise the row space of `m` as a subspace of `ℚ^ambient`.
    pub fn from_matrix(ambient: usize, m: Matrix) -> Self {
        assert_eq!(m.cols(), ambient, "spanning rows have wrong length");
        let r = m.rref();
        Subspace {
            ambient,
            basis: r.reduced,
            pivots: r.pivots,
        }
    }

    pub fn from_rows(ambient: usize, rows: Vec<Vec<Scalar>>) -> Self {
        Subspace::from_matrix(ambient, Matrix::from_rows(ambient, rows))
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace::from_matrix(ambient, Matrix::zero(0, ambient))
    }

    pub fn full(ambient: usize) -> Self {
        Subspace::from_matrix(ambient, Matrix::identity(ambient))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector has wrong length");
        reduce_against(&self.basis, &self.pivots, v).is_some()
    }

    /// Coordinates of `v` over the canonical basis, if it lies in the space.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        reduce_against(&self.basis, &self.pivots, v)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_rows().all(|row| self.contains(row))
    }

    /// First basis row of `other` outside `self`, if any.
    pub fn containment_witness(&self, other: &Subspace) -> Option<Vec<Scalar>> {
        other
            .basis_rows()
            .find(|row| !self.contains(row))
            .map(|r| r.to_vec())
    }

    pub fn basis_rows(&self) -> impl Iterator<Item = &[Scalar]> {
        (0..self.basis.rows()).map(move |r| self.basis.row(r))
    }

    /// Image of this subspace under the map `m` (acting as `v · m`).
    pub fn map(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.rows(), self.ambient, "map domain mismatch");
        Subspace::from_matrix(m.cols(), self.basis.mul(m))
    }
}

/// Smallest subspace containing both summands.
pub fn sum(a: &Subspace, b: &Subspace) -> Result<Subspace, LinError> {
    if a.ambient != b.ambient {
        return Err(LinError::AmbientMismatch {
            left: a.ambient,
            right: b.ambient,
        });
    }
    Ok(Subspace::from_matrix(
        a.ambient,
        a.basis.vstack(&b.basis),
    ))
}

/// Largest subspace contained in both.
///
/// Rows `(x, y)` of the kernel of the stacked basis satisfy `x·A = −y·B`,
/// so the `x·A` span the intersection.
pub fn intersect(a: &Subspace, b: &Subspace) -> Result<Subspace, LinError> {
    if a.ambient != b.ambient {
        return Err(LinError::AmbientMismatch {
            left: a.ambient,
            right: b.ambient,
        });
    }
    if a.is_full() {
        return Ok(b.clone());
    }
    if b.is_full() {
        return Ok(a.clone());
    }
    let stacked = a.basis.vstack(&b.basis);
    let k = stacked.kernel();
    let x_part = k.basis().columns(0, a.dim());
    Ok(Subspace::from_matrix(a.ambient, x_part.mul(&a.basis)))
}

/// `{v : v·f ∈ w}`. Rows `(v, y)` of the kernel of `[f; W]` satisfy
/// `v·f = −y·W ∈ w`; the preimage is the projection onto the `v` block.
pub fn preimage(f: &Matrix, w: &Subspace) -> Result<Subspace, LinError> {
    if f.cols() != w.ambient_dim() {
        return Err(LinError::DimensionMismatch {
            map_cols: f.cols(),
            ambient: w.ambient_dim(),
        });
    }
    if w.is_full() {
        return Ok(Subspace::full(f.rows()));
    }
    let stacked = f.vstack(w.basis());
    let k = stacked.kernel();
    let v_part = k.basis().columns(0, f.rows());
    Ok(Subspace::from_matrix(f.rows(), v_part))
}

#[cfg(test)]
mod tests {
    use super::super::scalar::int;
    use super::*;

    fn span(ambient: usize, rows: &[&[i64]]) -> Subspace {
        Subspace::from_matrix(ambient, Matrix::from_int_rows(ambient, rows))
    }

    #[test]
    fn canonical_equality() {
        let a = span(3, &[&[1, 1, 0], &[0, 2, 2]]);
        let b = span(3, &[&[2, 2, 0], &[1, 3, 2], &[3, 3, 0]]);
        assert_eq!(a, b);
        assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn sum_examples() {
        let a = span(3, &[&[1, 1, 0]]);
        assert_eq!(sum(&a, &Subspace::zero(3)).unwrap(), a);
        let e1 = span(3, &[&[1, 0, 0]]);
        let e2 = span(3, &[&[0, 1, 0]]);
        assert_eq!(
            sum(&e1, &e2).unwrap(),
            span(3, &[&[1, 0, 0], &[0, 1, 0]])
        );
        // two lines spanning the x3 = 0 plane
        let b = span(3, &[&[1, -1, 0]]);
        let plane = sum(&a, &b).unwrap();
        assert_eq!(plane, span(3, &[&[1, 0, 0], &[0, 1, 0]]));
        assert!(sum(&a, &Subspace::zero(2)).is_err());
    }

    #[test]
    fn intersect_examples() {
        let a = span(3, &[&[1, 1, 0]]);
        assert_eq!(intersect(&a, &Subspace::full(3)).unwrap(), a);
        let e1 = span(3, &[&[1, 0, 0]]);
        let e2 = span(3, &[&[0, 1, 0]]);
        assert!(intersect(&e1, &e2).unwrap().is_zero());
        // two distinct planes meet in a line
        let p1 = span(3, &[&[1, 0, 0], &[0, 1, 0]]);
        let p2 = span(3, &[&[0, 1, 0], &[0, 0, 1]]);
        let line = intersect(&p1, &p2).unwrap();
        assert_eq!(line, span(3, &[&[0, 1, 0]]));
    }

    #[test]
    fn modular_dimension_law_small() {
        let a = span(4, &[&[1, 0, 2, 0], &[0, 1, 1, 1]]);
        let b = span(4, &[&[1, 1, 3, 1], &[0, 0, 0, 1]]);
        let s = sum(&a, &b).unwrap();
        let i = intersect(&a, &b).unwrap();
        assert_eq!(a.dim() + b.dim(), s.dim() + i.dim());
    }

    #[test]
    fn preimage_examples() {
        let w = span(2, &[&[1, 0]]);
        assert_eq!(
            preimage(&Matrix::zero(3, 2), &w).unwrap(),
            Subspace::full(3)
        );
        assert_eq!(preimage(&Matrix::identity(2), &w).unwrap(), w);
        let f = Matrix::from_int_rows(2, &[&[1, 0], &[0, 0]]);
        assert_eq!(preimage(&f, &w).unwrap(), Subspace::full(2));
        // preimage contains the kernel, image of preimage lies in w
        let g = Matrix::from_int_rows(2, &[&[1, 1], &[2, 2], &[0, 1]]);
        let p = preimage(&g, &w).unwrap();
        assert!(p.contains_subspace(&g.kernel()));
        assert!(w.contains_subspace(&p.map(&g)));
    }

    #[test]
    fn membership_and_coordinates() {
        let a = span(3, &[&[1, 0, 1], &[0, 1, 2]]);
        assert!(a.contains(&[int(2), int(3), int(8)]));
        assert!(!a.contains(&[int(0), int(0), int(1)]));
        let c = a.coordinates(&[int(2), int(3), int(8)]).unwrap();
        assert_eq!(c, vec![int(2), int(3)]);
    }
}
