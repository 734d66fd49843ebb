use num::{One, Zero};
use std::fmt;

use super::scalar::Scalar;
use super::subspace::Subspace;

/// Dense rational matrix. Rows are vectors; maps act by `v · M`, so a map
/// from an `n`-dimensional space to an `m`-dimensional one is `n × m`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(super::scalar::format_scalar)
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of Gauss–Jordan elimination with row bookkeeping.
///
/// `reduced` is the unique reduced row echelon form with zero rows dropped,
/// `transform` satisfies `transform · original = reduced`, and the rows of
/// `transform` dropped alongside zero rows span the left kernel.
pub struct Rref {
    pub reduced: Matrix,
    pub transform: Matrix,
    pub kernel_transform: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Scalar>>) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "row length mismatch");
            entries.extend(row);
        }
        Matrix {
            rows: n,
            cols,
            entries,
        }
    }

    /// Build from integer literals, mostly for tests and model builders.
    pub fn from_int_rows(cols: usize, rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| super::scalar::int(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vec(&self, r: usize) -> Vec<Scalar> {
        self.row(r).to_vec()
    }

    pub fn row_vec_checked(&self, r: usize) -> Option<Vec<Scalar>> {
        (r < self.rows).then(|| self.row(r).to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    /// Matrix product; `self` is `n × m`, `rhs` is `m × k`.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Matrix::zero(self.rows, rhs.cols);
        for r in 0..self.rows {
            for i in 0..self.cols {
                let a = &self[(r, i)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = &rhs[(i, c)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(r, c)] += prod;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&rhs.entries) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        let mut out = self.clone();
        for a in out.entries.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Kronecker product; index `(i1·r2 + i2, j1·c2 + j2)`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zero(self.rows * rhs.rows, self.cols * rhs.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = &self[(i1, j1)];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..rhs.rows {
                    for j2 in 0..rhs.cols {
                        let b = &rhs[(i2, j2)];
                        if !b.is_zero() {
                            out[(i1 * rhs.rows + i2, j1 * rhs.cols + j2)] = a * b;
                        }
                    }
                }
            }
        }
        out
    }

    /// `(self ⊗ I_band) · m` without materialising the Kronecker factor.
    /// Row `(i, j)` of the result is `Σ_k self[i,k] · m.row(k·band + j)`.
    pub fn kron_id_mul(&self, band: usize, m: &Matrix) -> Matrix {
        assert_eq!(self.cols * band, m.rows(), "kron_id_mul shape mismatch");
        let mut out = Matrix::zero(self.rows * band, m.cols());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let c = &self[(i, k)];
                if c.is_zero() {
                    continue;
                }
                for j in 0..band {
                    let src = k * band + j;
                    let dst = i * band + j;
                    for col in 0..m.cols() {
                        let b = &m[(src, col)];
                        if !b.is_zero() {
                            let delta = c * b;
                            out[(dst, col)] += delta;
                        }
                    }
                }
            }
        }
        out
    }

    /// Stack vertically: `self` on top of `below` (same column count).
    pub fn vstack(&self, below: &Matrix) -> Matrix {
        assert_eq!(self.cols, below.cols, "column mismatch in vstack");
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&below.entries);
        Matrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Take a block of columns `[lo, hi)` from every row.
    pub fn columns(&self, lo: usize, hi: usize) -> Matrix {
        assert!(lo <= hi && hi <= self.cols);
        let mut out = Matrix::zero(self.rows, hi - lo);
        for r in 0..self.rows {
            for c in lo..hi {
                out[(r, c - lo)] = self[(r, c)].clone();
            }
        }
        out
    }

    /// Reduced row echelon form with transform bookkeeping.
    pub fn rref(&self) -> Rref {
        let n = self.rows;
        let m = self.cols;
        // augmented working copy: [self | I_n]
        let mut work: Vec<Vec<Scalar>> = (0..n)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.extend((0..n).map(|i| {
                    if i == r {
                        Scalar::one()
                    } else {
                        Scalar::zero()
                    }
                }));
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0usize;
        for col in 0..m {
            let pivot_row = (rank..n).find(|&r| !work[r][col].is_zero());
            let Some(pr) = pivot_row else { continue };
            work.swap(rank, pr);
            let inv = work[rank][col].clone();
            for x in work[rank].iter_mut() {
                if !x.is_zero() {
                    *x /= &inv;
                }
            }
            for r in 0..n {
                if r != rank && !work[r][col].is_zero() {
                    let factor = work[r][col].clone();
                    for c in 0..m + n {
                        if !work[rank][c].is_zero() {
                            let delta = &factor * &work[rank][c];
                            work[r][c] -= delta;
                        }
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        let take = |rows: std::ops::Range<usize>, lo: usize, hi: usize| {
            Matrix::from_rows(
                hi - lo,
                rows.map(|r| work[r][lo..hi].to_vec()).collect(),
            )
        };
        Rref {
            reduced: take(0..rank, 0, m),
            transform: take(0..rank, m, m + n),
            kernel_transform: take(rank..n, m, m + n),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().reduced.rows()
    }

    /// Row space as a canonical subspace of the column-count ambient space.
    pub fn image(&self) -> Subspace {
        Subspace::from_matrix(self.cols, self.clone())
    }

    /// `{v : v · self = 0}` — a subspace of the row-count ambient space.
    pub fn kernel(&self) -> Subspace {
        Subspace::from_matrix(self.rows, self.rref().kernel_transform)
    }

    /// Solve `X · a = b` rowwise; `None` when some row of `b` is outside the
    /// row space of `a`. `a` is `k × n`, `b` is `m × n`, the result `m × k`.
    pub fn solve_left(a: &Matrix, b: &Matrix) -> Option<Matrix> {
        assert_eq!(a.cols, b.cols, "solve_left shape mismatch");
        let red = a.rref();
        let mut out = Matrix::zero(b.rows, a.rows);
        for r in 0..b.rows {
            let coeffs = reduce_against(&red.reduced, &red.pivots, b.row(r))?;
            // coeffs are with respect to reduced rows; pull back through transform
            for (i, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in 0..a.rows {
                    let t = &red.transform[(i, j)];
                    if !t.is_zero() {
                        let delta = c * t;
                        out[(r, j)] += delta;
                    }
                }
            }
        }
        Some(out)
    }
}

/// Express `v` over the rows of an RREF matrix; `None` if it is outside the
/// row space. The coefficient on row `i` is just `v[pivots[i]]` after prior
/// eliminations, because pivot columns of an RREF are unit columns.
pub(super) fn reduce_against(
    reduced: &Matrix,
    pivots: &[usize],
    v: &[Scalar],
) -> Option<Vec<Scalar>> {
    let mut residual = v.to_vec();
    let mut coeffs = Vec::with_capacity(pivots.len());
    for (i, &p) in pivots.iter().enumerate() {
        let c = residual[p].clone();
        if !c.is_zero() {
            for (x, b) in residual.iter_mut().zip(reduced.row(i)) {
                if !b.is_zero() {
                    let delta = &c * b;
                    *x -= delta;
                }
            }
        }
        coeffs.push(c);
    }
    if residual.iter().all(|x| x.is_zero()) {
        Some(coeffs)
    } else {
        None
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        debug_assert!(r < self.rows && c < self.cols);
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.entries[r * self.cols + c]
    }
}

/// `v · m` for a row vector `v`.
pub fn row_times_matrix(v: &[Scalar], m: &Matrix) -> Vec<Scalar> {
    assert_eq!(v.len(), m.rows(), "row/matrix shape mismatch");
    let mut out = vec![Scalar::zero(); m.cols()];
    for (i, a) in v.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (x, b) in out.iter_mut().zip(m.row(i)) {
            if !b.is_zero() {
                let delta = a * b;
                *x += delta;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::scalar::int;
    use super::*;

    #[test]
    fn rref_drops_zero_rows() {
        let m = Matrix::from_int_rows(2, &[&[2, 4], &[1, 2]]);
        let r = m.rref();
        assert_eq!(r.reduced, Matrix::from_int_rows(2, &[&[1, 2]]));
        assert_eq!(r.pivots, vec![0]);
        // transform * original = reduced
        assert_eq!(r.transform.mul(&m), r.reduced);
    }

    #[test]
    fn rref_identity_fixed_point() {
        let id = Matrix::identity(3);
        assert_eq!(id.rref().reduced, id);
    }

    #[test]
    fn rref_full_rank_two_by_two() {
        let m = Matrix::from_int_rows(2, &[&[1, 1], &[1, -1]]);
        // hand elimination: r2 - r1 = (0,-2) -> (0,1); r1 - r2 -> (1,0)
        assert_eq!(m.rref().reduced, Matrix::identity(2));
    }

    #[test]
    fn kernel_examples() {
        let zero = Matrix::zero(2, 3);
        assert_eq!(zero.kernel(), Subspace::full(2));

        let id = Matrix::identity(3);
        assert_eq!(id.kernel(), Subspace::zero(3));

        let m = Matrix::from_int_rows(2, &[&[1, 2], &[2, 4]]);
        let k = m.kernel();
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&[int(2), int(-1)]));
    }

    #[test]
    fn image_examples() {
        assert_eq!(Matrix::zero(2, 3).image(), Subspace::zero(3));
        assert_eq!(Matrix::identity(3).image(), Subspace::full(3));
        let m = Matrix::from_int_rows(2, &[&[1, 2], &[2, 4]]);
        assert_eq!(
            m.image(),
            Subspace::from_matrix(2, Matrix::from_int_rows(2, &[&[1, 2]]))
        );
    }

    #[test]
    fn solve_left_round_trip() {
        let a = Matrix::from_int_rows(3, &[&[1, 2, 0], &[0, 1, 1]]);
        let b = Matrix::from_int_rows(3, &[&[1, 3, 1], &[2, 4, 0]]);
        let x = Matrix::solve_left(&a, &b).unwrap();
        assert_eq!(x.mul(&a), b);
        // an unsolvable target
        let c = Matrix::from_int_rows(3, &[&[0, 0, 1]]);
        assert!(Matrix::solve_left(&a, &c).is_none());
    }
}
