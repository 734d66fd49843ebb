//! Seeded generation of valid filtered complexes for the engine-law tests.
//!
//! A complex is assembled from elementary pieces — singletons and two-term
//! identity zigzags — each carrying a filtration level, which makes `d² = 0`,
//! d-stability, and boundedness true by construction and the cohomology
//! known exactly (one class per singleton). A random invertible change of
//! basis per degree then hides the adapted coordinates.

use num::{One, Zero};
use rand::Rng;

use crate::complexes::{CochainComplex, FilteredComplex, Filtration};
use crate::exactlin::{Matrix, Scalar, Subspace};

/// A generated instance together with its known cohomology dimensions.
pub struct RandomFiltered {
    pub filtered: FilteredComplex,
    pub cohomology_dims: Vec<usize>,
}

fn random_invertible(rng: &mut impl Rng, n: usize) -> Matrix {
    // unit lower triangular · unit upper triangular with small entries,
    // then a row permutation — always invertible
    let mut lower = Matrix::identity(n);
    let mut upper = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            if rng.gen_bool(0.5) {
                lower[(i, j)] = Scalar::from_integer(rng.gen_range(-2i64..=2).into());
            }
            if rng.gen_bool(0.5) {
                upper[(j, i)] = Scalar::from_integer(rng.gen_range(-2i64..=2).into());
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut p = Matrix::zero(n, n);
    for (i, &j) in perm.iter().enumerate() {
        p[(i, j)] = Scalar::one();
    }
    lower.mul(&upper).mul(&p)
}

/// Generate a valid filtered complex with degrees up to `max_degree`,
/// per-degree dimension at most `max_dim`, and filtration depth `depth`.
pub fn random_filtered_complex(
    rng: &mut impl Rng,
    max_degree: usize,
    max_dim: usize,
    depth: usize,
) -> RandomFiltered {
    assert!(max_degree >= 1 && max_dim >= 2);
    // per degree: list of (level) tags for adapted basis vectors, plus the
    // differential pairs (degree n index -> degree n+1 index)
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); max_degree + 1];
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); max_degree + 1];
    for n in 0..max_degree {
        let zigzags = rng.gen_range(0..=2.min(max_dim / 2));
        for _ in 0..zigzags {
            if levels[n].len() >= max_dim || levels[n + 1].len() >= max_dim {
                break;
            }
            let a = rng.gen_range(0..=n.min(depth));
            let b = rng.gen_range(a..=(n + 1).min(depth));
            let src = levels[n].len();
            let dst = levels[n + 1].len();
            levels[n].push(a);
            levels[n + 1].push(b);
            pairs[n].push((src, dst));
        }
    }
    let mut cohomology_dims = vec![0usize; max_degree + 1];
    for n in 0..=max_degree {
        let singles = rng.gen_range(0..=2usize);
        for _ in 0..singles {
            if levels[n].len() >= max_dim {
                break;
            }
            levels[n].push(rng.gen_range(0..=n.min(depth)));
            cohomology_dims[n] += 1;
        }
        // keep every degree nonempty so the complex has honest shape
        if levels[n].is_empty() {
            levels[n].push(rng.gen_range(0..=n.min(depth)));
            cohomology_dims[n] += 1;
        }
    }
    let dims: Vec<usize> = levels.iter().map(|l| l.len()).collect();

    // adapted-coordinate differential and filtration
    let mut d_adapted = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        let cols = if n < max_degree { dims[n + 1] } else { 0 };
        let mut m = Matrix::zero(dims[n], cols);
        if n < max_degree {
            for &(src, dst) in &pairs[n] {
                m[(src, dst)] = Scalar::one();
            }
        }
        d_adapted.push(m);
    }

    // random change of basis per degree; new coords x correspond to x·S
    let s: Vec<Matrix> = dims.iter().map(|&k| random_invertible(rng, k)).collect();
    let mut d = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        if n < max_degree {
            let y = s[n].mul(&d_adapted[n]);
            d.push(Matrix::solve_left(&s[n + 1], &y).expect("S is invertible"));
        } else {
            d.push(Matrix::zero(dims[n], 0));
        }
    }
    let complex = CochainComplex::new(dims.clone(), d).expect("generated shapes");

    let mut levels_f = Vec::with_capacity(depth + 1);
    for m_level in 0..=depth {
        let mut per_degree = Vec::with_capacity(max_degree + 1);
        for n in 0..=max_degree {
            let rows: Vec<Vec<Scalar>> = levels[n]
                .iter()
                .enumerate()
                .filter(|&(_, &lvl)| lvl >= m_level)
                .map(|(i, _)| {
                    let mut v = vec![Scalar::zero(); dims[n]];
                    v[i] = Scalar::one();
                    v
                })
                .collect();
            let adapted = Matrix::from_rows(dims[n], rows);
            let transported = Matrix::solve_left(&s[n], &adapted).expect("S is invertible");
            per_degree.push(Subspace::from_matrix(dims[n], transported));
        }
        levels_f.push(per_degree);
    }
    let filtered = FilteredComplex::new(complex, Filtration::new(levels_f));
    debug_assert!(filtered.validate().is_ok());
    RandomFiltered {
        filtered,
        cohomology_dims,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_complexes_validate_with_known_cohomology() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let inst = random_filtered_complex(&mut rng, 4, 6, 3);
            inst.filtered.validate().unwrap();
            let h = inst.filtered.complex.cohomology().unwrap();
            assert_eq!(h.dims(), inst.cohomology_dims);
        }
    }
}
