use std::fmt;

use super::matrix::{row_times_matrix, Matrix};
use super::scalar::Scalar;
use super::subspace::{sum, Subspace};
use super::LinError;

/// A quotient `total / divisor`, presented by representative rows completing
/// the divisor basis to a basis of the total space.
///
/// Representatives are picked deterministically: the canonical basis rows of
/// `total` are scanned in order and kept when independent modulo what has been
/// collected so far, so equal inputs give identical presentations.
#[derive(Clone, PartialEq, Eq)]
pub struct QuotientPresentation {
    total: Subspace,
    divisor: Subspace,
    representatives: Matrix,
}

impl fmt::Debug for QuotientPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Quotient(dim {} = {}/{} in ambient {})",
            self.dim(),
            self.total.dim(),
            self.divisor.dim(),
            self.ambient_dim()
        )
    }
}

impl QuotientPresentation {
    pub fn new(total: Subspace, divisor: Subspace) -> Result<Self, LinError> {
        if total.ambient_dim() != divisor.ambient_dim() {
            return Err(LinError::AmbientMismatch {
                left: total.ambient_dim(),
                right: divisor.ambient_dim(),
            });
        }
        if let Some(witness) = total.containment_witness(&divisor) {
            return Err(LinError::NotContained { witness });
        }
        let mut collected = divisor.clone();
        let mut reps: Vec<Vec<Scalar>> = Vec::new();
        for row in total.basis_rows() {
            if !collected.contains(row) {
                reps.push(row.to_vec());
                collected = sum(
                    &collected,
                    &Subspace::from_rows(total.ambient_dim(), vec![row.to_vec()]),
                )?;
            }
        }
        let representatives = Matrix::from_rows(total.ambient_dim(), reps);
        debug_assert_eq!(
            total.dim(),
            divisor.dim() + representatives.rows(),
            "representative count mismatch"
        );
        Ok(QuotientPresentation {
            total,
            divisor,
            representatives,
        })
    }

    /// The zero quotient of the zero space, in a given ambient dimension.
    pub fn zero(ambient: usize) -> Self {
        QuotientPresentation::new(Subspace::zero(ambient), Subspace::zero(ambient)).unwrap()
    }

    pub fn full(ambient: usize) -> Self {
        QuotientPresentation::new(Subspace::full(ambient), Subspace::zero(ambient)).unwrap()
    }

    pub fn total(&self) -> &Subspace {
        &self.total
    }

    pub fn divisor(&self) -> &Subspace {
        &self.divisor
    }

    pub fn representatives(&self) -> &Matrix {
        &self.representatives
    }

    pub fn ambient_dim(&self) -> usize {
        self.total.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.representatives.rows()
    }

    /// Class coordinates of an ambient vector: the unique `c` with
    /// `v − c·representatives ∈ divisor`, or `None` if `v ∉ total`.
    pub fn class_of(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let stacked = self.representatives.vstack(self.divisor.basis());
        let coords = Matrix::solve_left(&stacked, &Matrix::from_rows(
            self.ambient_dim(),
            vec![v.to_vec()],
        ))?;
        Some(coords.row(0)[..self.dim()].to_vec())
    }

    /// Lift class coordinates back to the canonical ambient representative.
    pub fn lift(&self, class: &[Scalar]) -> Vec<Scalar> {
        row_times_matrix(class, &self.representatives)
    }
}

/// Matrix of the map induced by `f` on quotient presentations, in the
/// representative bases. Checks that `f` maps total into total and divisor
/// into divisor, and reports the violating basis vector otherwise.
pub fn induced_map(
    f: &Matrix,
    src: &QuotientPresentation,
    dst: &QuotientPresentation,
) -> Result<Matrix, LinError> {
    if f.rows() != src.ambient_dim() || f.cols() != dst.ambient_dim() {
        return Err(LinError::DimensionMismatch {
            map_cols: f.cols(),
            ambient: dst.ambient_dim(),
        });
    }
    for row in src.divisor().basis_rows() {
        let image = row_times_matrix(row, f);
        if !dst.divisor().contains(&image) {
            return Err(LinError::NotWellDefined {
                witness: row.to_vec(),
            });
        }
    }
    let mut rows = Vec::with_capacity(src.dim());
    for r in 0..src.dim() {
        let rep = src.representatives().row(r);
        let image = row_times_matrix(rep, f);
        match dst.class_of(&image) {
            Some(class) => rows.push(class),
            None => {
                return Err(LinError::NotIntoTotal {
                    witness: rep.to_vec(),
                })
            }
        }
    }
    Ok(Matrix::from_rows(dst.dim(), rows))
}

#[cfg(test)]
mod tests {
    use super::super::scalar::int;
    use super::*;

    fn span(ambient: usize, rows: &[&[i64]]) -> Subspace {
        Subspace::from_matrix(ambient, Matrix::from_int_rows(ambient, rows))
    }

    #[test]
    fn trivial_quotients() {
        let a = span(3, &[&[1, 0, 0], &[0, 1, 0]]);
        let q = QuotientPresentation::new(a.clone(), a.clone()).unwrap();
        assert_eq!(q.dim(), 0);

        let q = QuotientPresentation::new(Subspace::full(3), Subspace::zero(3)).unwrap();
        assert_eq!(q.dim(), 3);
    }

    #[test]
    fn three_space_mod_e3() {
        let e3 = span(3, &[&[0, 0, 1]]);
        let q = QuotientPresentation::new(Subspace::full(3), e3).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(
            q.representatives(),
            &Matrix::from_int_rows(3, &[&[1, 0, 0], &[0, 1, 0]])
        );
        // class coordinates kill the divisor direction
        assert_eq!(
            q.class_of(&[int(3), int(-1), int(7)]).unwrap(),
            vec![int(3), int(-1)]
        );
    }

    #[test]
    fn containment_violation_reports_witness() {
        let total = span(3, &[&[1, 0, 0]]);
        let divisor = span(3, &[&[0, 1, 0]]);
        match QuotientPresentation::new(total, divisor) {
            Err(LinError::NotContained { witness }) => {
                assert_eq!(witness, vec![int(0), int(1), int(0)]);
            }
            other => panic!("expected containment failure, got {other:?}"),
        }
    }

    #[test]
    fn induced_identity_and_zero() {
        let e3 = span(3, &[&[0, 0, 1]]);
        let q = QuotientPresentation::new(Subspace::full(3), e3.clone()).unwrap();
        let id = induced_map(&Matrix::identity(3), &q, &q).unwrap();
        assert_eq!(id, Matrix::identity(2));

        // a map landing in the divisor induces zero
        let f = Matrix::from_int_rows(3, &[&[0, 0, 1], &[0, 0, 2], &[0, 0, 0]]);
        let z = induced_map(&f, &q, &q).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn induced_map_rejects_divisor_escape() {
        let q_src =
            QuotientPresentation::new(Subspace::full(2), span(2, &[&[0, 1]])).unwrap();
        let q_dst = QuotientPresentation::new(Subspace::full(2), Subspace::zero(2)).unwrap();
        // divisor e2 maps to e2 which is not in the zero divisor of dst
        let r = induced_map(&Matrix::identity(2), &q_src, &q_dst);
        assert!(matches!(r, Err(LinError::NotWellDefined { .. })));
    }
}
