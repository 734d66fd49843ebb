//! Engine laws on randomized filtered complexes: the closed-form pages, the
//! page-turning route, the graded-complex route to the first page, and the
//! convergence identity must all agree exactly on every instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use leray::complexes::CochainComplex;
use leray::exactlin::{
    induced_map, intersect, preimage, row_times_matrix, sum, Matrix, QuotientPresentation,
    Scalar, Subspace,
};
use leray::randgen::random_filtered_complex;
use leray::specseq;

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let data: Vec<Vec<Scalar>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| leray::exactlin::int(rng.gen_range(-3i64..=3)))
                .collect()
        })
        .collect();
    Matrix::from_rows(cols, data)
}

fn random_subspace(rng: &mut impl Rng, ambient: usize) -> Subspace {
    let rows = rng.gen_range(0..=ambient);
    random_matrix(rng, rows, ambient).image()
}

#[test]
fn subspace_lattice_laws_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let ambient = rng.gen_range(1..=10usize);
        let a = random_subspace(&mut rng, ambient);
        let b = random_subspace(&mut rng, ambient);
        let s = sum(&a, &b).unwrap();
        let i = intersect(&a, &b).unwrap();
        // modular dimension law
        assert_eq!(a.dim() + b.dim(), s.dim() + i.dim());
        assert!(s.contains_subspace(&a) && s.contains_subspace(&b));
        assert!(a.contains_subspace(&i) && b.contains_subspace(&i));
        // preimage contains the kernel and maps into the target
        let cols = rng.gen_range(1..=6usize);
        let f = random_matrix(&mut rng, ambient, cols);
        let w = random_subspace(&mut rng, cols);
        let pre = preimage(&f, &w).unwrap();
        assert!(pre.contains_subspace(&f.kernel()));
        assert!(w.contains_subspace(&pre.map(&f)));
    }
}

#[test]
fn canonicity_makes_equal_row_spaces_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let ambient = rng.gen_range(1..=8usize);
        let a = random_subspace(&mut rng, ambient);
        // rescale and shuffle the basis rows, then respan
        let mut rows: Vec<Vec<Scalar>> = a
            .basis_rows()
            .map(|r| {
                let c = leray::exactlin::int(rng.gen_range(1..=4));
                r.iter().map(|x| x * &c).collect()
            })
            .collect();
        if rows.len() > 1 {
            rows.reverse();
            let extra: Vec<Scalar> = rows[0]
                .iter()
                .zip(&rows[1])
                .map(|(x, y)| x + y)
                .collect();
            rows.push(extra);
        }
        let b = Subspace::from_rows(ambient, rows);
        assert_eq!(a, b);
        assert_eq!(a.basis(), b.basis());
    }
}

#[test]
fn induced_maps_are_independent_of_representatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let ambient = rng.gen_range(2..=7usize);
        let total = Subspace::full(ambient);
        let divisor = random_subspace(&mut rng, ambient);
        let q = QuotientPresentation::new(total.clone(), divisor.clone()).unwrap();
        let r = q.dim();
        let k = divisor.dim();
        if r == 0 {
            continue;
        }
        // build f divisor-stably in the adapted basis S = [reps; divisor]:
        // f = S⁻¹ · [[A, B], [0, C]] · S, whose induced matrix is exactly A
        let s = q.representatives().vstack(divisor.basis());
        let a = random_matrix(&mut rng, r, r);
        let b = random_matrix(&mut rng, r, k);
        let c = random_matrix(&mut rng, k, k);
        let top = a.clone();
        let t = {
            let top_row = {
                let mut m = Matrix::zero(r, ambient.min(r + k));
                for i in 0..r {
                    for j in 0..r {
                        m[(i, j)] = a[(i, j)].clone();
                    }
                    for j in 0..k {
                        m[(i, r + j)] = b[(i, j)].clone();
                    }
                }
                m
            };
            let bottom_row = {
                let mut m = Matrix::zero(k, r + k);
                for i in 0..k {
                    for j in 0..k {
                        m[(i, r + j)] = c[(i, j)].clone();
                    }
                }
                m
            };
            top_row.vstack(&bottom_row)
        };
        let ts = t.mul(&s);
        // f = S⁻¹·T·S, i.e. the solution of S·f = T·S
        let f = Matrix::solve_left(&s.transpose(), &ts.transpose())
            .expect("S is invertible")
            .transpose();
        let induced = induced_map(&f, &q, &q).unwrap();
        assert_eq!(induced, top);
        // well-definedness on classes: shifting the input by divisor
        // elements never changes the induced image class
        for _ in 0..4 {
            let v: Vec<Scalar> = (0..ambient)
                .map(|_| leray::exactlin::int(rng.gen_range(-3i64..=3)))
                .collect();
            let mut shifted = v.clone();
            for dr in 0..k {
                let coef = leray::exactlin::int(rng.gen_range(-2i64..=2));
                for (x, y) in shifted.iter_mut().zip(divisor.basis().row(dr)) {
                    let delta = &coef * y;
                    *x += delta;
                }
            }
            let lhs = row_times_matrix(&q.class_of(&shifted).unwrap(), &induced);
            let rhs = q.class_of(&row_times_matrix(&v, &f)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn engine_laws_on_randomized_filtered_complexes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..40 {
        let max_degree = rng.gen_range(1..=4usize);
        let depth = rng.gen_range(1..=3usize.min(max_degree));
        let inst = random_filtered_complex(&mut rng, max_degree, 6, depth);
        let src = &inst.filtered;
        src.validate().unwrap();

        let bound = max_degree + 2;
        let mut pages = Vec::new();
        for r in 1..=bound {
            pages.push(specseq::page(src, r).unwrap());
        }
        // d_r ∘ d_r = 0 on every page
        for pg in &pages {
            assert!(pg.differentials_square_to_zero(), "round {round}");
        }
        // page turning agrees with the closed form, including the canonical
        // isomorphism
        for r in 1..bound {
            specseq::turn_matches_direct(&pages[r - 1], &pages[r])
                .unwrap_or_else(|e| panic!("round {round}, r = {r}: {e}"));
        }
        // monotone collapse
        for r in 1..bound {
            for (key, d) in pages[r].dims() {
                assert!(d <= pages[r - 1].dims()[&key], "round {round}");
            }
        }
        // first page via the graded quotient complexes
        let via_quotients = specseq::first_page_via_graded_complex(src).unwrap();
        assert_eq!(pages[0].dims(), via_quotients, "round {round}");
        // convergence: E_inf vs graded cohomology
        let run = specseq::run(src).unwrap();
        let conv = specseq::convergence_check(src, &run).unwrap();
        assert!(conv.ok(), "round {round}: {:?}", conv.mismatches());
        // first-quadrant stabilisation: nothing moves past the bound
        let late = specseq::page(src, bound + 3).unwrap();
        assert_eq!(late.dims(), run.limit, "round {round}");
        // with a known total cohomology as a bonus check
        let h = src.complex.cohomology().unwrap().dims();
        assert_eq!(h, inst.cohomology_dims, "round {round}");
        for n in 0..h.len() {
            let total: usize = run
                .limit
                .iter()
                .filter(|(&(p, q), _)| p + q == n)
                .map(|(_, &d)| d)
                .sum();
            assert_eq!(total, h[n], "round {round} degree {n}");
        }
    }
}

#[test]
fn cohomology_commutes_with_degree_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let inst = random_filtered_complex(&mut rng, 3, 5, 2);
        let c = &inst.filtered.complex;
        // shift: prepend a zero space
        let mut dims = vec![0usize];
        dims.extend_from_slice(c.dims());
        let mut d = vec![Matrix::zero(0, c.dims()[0])];
        for n in 0..c.dims().len() {
            d.push(c.diff(n as i64));
        }
        let shifted = CochainComplex::new(dims, d).unwrap();
        let h = c.cohomology().unwrap().dims();
        let h_shifted = shifted.cohomology().unwrap().dims();
        assert_eq!(h_shifted[0], 0);
        assert_eq!(&h_shifted[1..], &h[..]);
    }
}
