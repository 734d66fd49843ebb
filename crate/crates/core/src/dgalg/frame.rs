use num::{One, Zero};

use crate::exactlin::{Matrix, Scalar};

/// A frame basis form written as a signed wedge of degree-one generators:
/// the pair `({i1 < … < ik}, sign)` stands for `sign · e_{i1} ∧ … ∧ e_{ik}`.
pub type SignedSubset = (Vec<usize>, i64);

pub fn signed_subset_label(gens: &[String], s: &SignedSubset) -> String {
    if s.0.is_empty() {
        return "1".to_owned();
    }
    s.0.iter()
        .map(|&i| gens[i].clone())
        .collect::<Vec<_>>()
        .join("∧")
}

/// Wedge multiplication table on the invariant frame: sector-independent
/// structure constants `(deg r, i) ∧ (deg m, j) = Σ_k c·(deg r+m, k)`.
#[derive(Clone, Debug)]
pub struct FrameWedge {
    dims: Vec<usize>,
    // tables[r][m][i * dims[m] + j] = sparse row over frame (r+m)
    tables: Vec<Vec<Vec<Vec<(usize, Scalar)>>>>,
}

impl FrameWedge {
    pub fn new(dims: Vec<usize>, tables: Vec<Vec<Vec<Vec<(usize, Scalar)>>>>) -> Self {
        FrameWedge { dims, tables }
    }

    /// The exterior algebra on `gens.len()` anticommuting degree-one
    /// generators, with a chosen signed-subset basis per degree. Returns the
    /// wedge table; products outside the listed degrees are zero.
    pub fn exterior(gens: usize, basis: &[Vec<SignedSubset>]) -> Self {
        let top = basis.len() - 1;
        let dims: Vec<usize> = basis.iter().map(|b| b.len()).collect();
        let find = |deg: usize, subset: &[usize]| -> Option<(usize, i64)> {
            basis[deg]
                .iter()
                .position(|(s, _)| s == subset)
                .map(|k| (k, basis[deg][k].1))
        };
        let mut tables = Vec::with_capacity(top + 1);
        for r in 0..=top {
            let mut per_m = Vec::new();
            for m in 0..=top {
                let mut table = Vec::with_capacity(dims[r] * dims[m]);
                for (si, sgn_i) in &basis[r] {
                    for (sj, sgn_j) in &basis[m] {
                        let mut row = Vec::new();
                        if r + m <= top {
                            if let Some((merged, merge_sign)) = merge_subsets(si, sj, gens) {
                                if let Some((k, basis_sign)) = find(r + m, &merged) {
                                    // basis vector = basis_sign · sorted wedge, so the
                                    // coefficient divides by basis_sign (= ±1)
                                    let total = sgn_i * sgn_j * merge_sign * basis_sign;
                                    let mut c = Scalar::one();
                                    if total < 0 {
                                        c = -c;
                                    }
                                    row.push((k, c));
                                }
                            }
                        }
                        table.push(row);
                    }
                }
                per_m.push(table);
            }
            tables.push(per_m);
        }
        FrameWedge { dims, tables }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims.get(n).copied().unwrap_or(0)
    }

    /// Sparse structure constants of `(r, i) ∧ (m, j)`.
    pub fn product(&self, r: usize, i: usize, m: usize, j: usize) -> &[(usize, Scalar)] {
        static EMPTY: &[(usize, Scalar)] = &[];
        if r >= self.tables.len() || m >= self.tables[r].len() {
            return EMPTY;
        }
        let t = &self.tables[r][m];
        let idx = i * self.dim(m) + j;
        t.get(idx).map(|v| v.as_slice()).unwrap_or(EMPTY)
    }

    /// Wedge of coefficient vectors: `x` in degree `r`, `y` in degree `m`.
    pub fn wedge_vectors(&self, r: usize, x: &[Scalar], m: usize, y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim(r + m)];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in self.product(r, i, m, j) {
                    let delta = &ab * c;
                    out[*k] += delta;
                }
            }
        }
        out
    }

    /// The wedge as a matrix `(f_r·f_m) × f_{r+m}` on row index `i·f_m + j`.
    pub fn matrix(&self, r: usize, m: usize) -> Matrix {
        let mut out = Matrix::zero(self.dim(r) * self.dim(m), self.dim(r + m));
        for i in 0..self.dim(r) {
            for j in 0..self.dim(m) {
                for (k, c) in self.product(r, i, m, j) {
                    out[(i * self.dim(m) + j, *k)] = c.clone();
                }
            }
        }
        out
    }

    /// First frame-level associativity defect, if any.
    pub fn associativity_defect(&self) -> Option<(usize, usize, usize, usize, usize, usize)> {
        let top = self.top_degree();
        for r in 0..=top {
            for m in 0..=top - r {
                for s in 0..=top - r - m {
                    for i in 0..self.dim(r) {
                        for j in 0..self.dim(m) {
                            for k in 0..self.dim(s) {
                                let mut ei = vec![Scalar::zero(); self.dim(r)];
                                ei[i] = Scalar::one();
                                let mut ej = vec![Scalar::zero(); self.dim(m)];
                                ej[j] = Scalar::one();
                                let mut ek = vec![Scalar::zero(); self.dim(s)];
                                ek[k] = Scalar::one();
                                let left = self.wedge_vectors(
                                    r + m,
                                    &self.wedge_vectors(r, &ei, m, &ej),
                                    s,
                                    &ek,
                                );
                                let right = self.wedge_vectors(
                                    r,
                                    &ei,
                                    m + s,
                                    &self.wedge_vectors(m, &ej, s, &ek),
                                );
                                if left != right {
                                    return Some((r, i, m, j, s, k));
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    #[cfg(test)]
    pub(crate) fn corrupt_entry(&mut self, r: usize, m: usize, i: usize, j: usize) {
        let idx = i * self.dim(m) + j;
        let row = &mut self.tables[r][m][idx];
        if row.is_empty() {
            row.push((0, Scalar::one() + Scalar::one()));
        } else {
            row[0].1 = &row[0].1 + &Scalar::one();
        }
    }
}

/// Merge two disjoint sorted index sets, counting the sign of the shuffle;
/// `None` when they intersect (the wedge vanishes).
fn merge_subsets(a: &[usize], b: &[usize], _gens: usize) -> Option<(Vec<usize>, i64)> {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1i64;
    let mut i = 0;
    let mut j = 0;
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            merged.push(a[i]);
            i += 1;
        } else {
            // b[j] hops over the remaining a‑elements
            if (a.len() - i) % 2 == 1 {
                sign = -sign;
            }
            merged.push(b[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&a[i..]);
    merged.extend_from_slice(&b[j..]);
    Some((merged, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::int;

    fn heis_frame() -> FrameWedge {
        FrameWedge::exterior(
            3,
            &[
                vec![(vec![], 1)],
                vec![(vec![0], 1), (vec![1], 1), (vec![2], 1)],
                vec![(vec![0, 1], 1), (vec![0, 2], -1), (vec![1, 2], -1)],
                vec![(vec![0, 1, 2], 1)],
            ],
        )
    }

    #[test]
    fn anticommutativity_and_squares() {
        let w = heis_frame();
        // e^u ∧ e^v = +(basis 0 of degree 2)
        assert_eq!(w.product(1, 0, 1, 1), &[(0, int(1))]);
        // e^v ∧ e^u = −(e^u∧e^v)
        assert_eq!(w.product(1, 1, 1, 0), &[(0, int(-1))]);
        // e^w ∧ e^u = +(basis 1), since basis 1 is −e^u∧e^w
        assert_eq!(w.product(1, 2, 1, 0), &[(1, int(1))]);
        // squares vanish
        assert!(w.product(1, 0, 1, 0).is_empty());
        assert_eq!(w.associativity_defect(), None);
    }

    #[test]
    fn top_product() {
        let w = heis_frame();
        // (e^u∧e^v) ∧ e^w = e^u∧e^v∧e^w
        assert_eq!(w.product(2, 0, 1, 2), &[(0, int(1))]);
        // (e^w∧e^u) ∧ e^v = −e^u∧e^w∧e^v = +e^u∧e^v∧e^w ... sign check:
        // basis1 = −e^u∧e^w, so basis1∧e^v = −e^u∧e^w∧e^v = +e^u∧e^v∧e^w
        assert_eq!(w.product(2, 1, 1, 1), &[(0, int(1))]);
    }
}
