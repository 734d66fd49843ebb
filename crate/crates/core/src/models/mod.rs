//! Concrete sector calculi and fibration data: the Heisenberg group algebra
//! with its invariant three-dimensional calculus, the Laurent circle, the
//! 2-torus, module twists, and the algebra automorphisms coming from
//! `SL(2,ℤ)`.

pub mod rewrite;

use std::sync::Arc;

use num::Zero;
use thiserror::Error;

use crate::dgalg::{
    AxiomFailure, ConnectionModule, DgaError, DgaMorphism, FrameWedge, ModElement, SectorDga,
    SectorSet, SignedSubset,
};
use crate::exactlin::{frac, int, Matrix, Scalar};
use crate::fibration::{FibrationData, FibrationError};
use rewrite::{group_mul, group_power, GroupCoords, HeisenbergRelations};

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("rewriting oracle disagrees with the closed-form differential at sector {sector}: oracle {oracle}, closed form {closed}")]
    OracleMismatch {
        sector: String,
        oracle: String,
        closed: String,
    },
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("determinant must be 1, got {0}")]
    BadDeterminant(i64),
    #[error("constructed morphism failed validation: {0:?}")]
    MorphismInvalid(Vec<AxiomFailure>),
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
}

/// Images of degree-one generators extended to all exterior degrees: the
/// image of a signed-subset basis form is the wedge of its generator images.
fn induced_exterior_maps(
    src_basis: &[Vec<SignedSubset>],
    gen_images: &[Vec<Scalar>],
    target: &FrameWedge,
) -> Vec<Matrix> {
    let mut maps = Vec::with_capacity(src_basis.len());
    for (n, basis) in src_basis.iter().enumerate() {
        let mut rows = Vec::with_capacity(basis.len());
        for (subset, sign) in basis {
            let mut acc = vec![Scalar::zero(); target.dim(0)];
            if target.dim(0) > 0 {
                acc[0] = num::one();
            }
            let mut deg = 0usize;
            for &gen in subset {
                acc = target.wedge_vectors(deg, &acc, 1, &gen_images[gen]);
                deg += 1;
            }
            if *sign < 0 {
                for c in acc.iter_mut() {
                    *c = -c.clone();
                }
            }
            debug_assert_eq!(deg, n);
            rows.push(acc);
        }
        maps.push(Matrix::from_rows(target.dim(n), rows));
    }
    maps
}

/// Per-degree matrices of left wedge multiplication by a one-form with
/// constant coefficients: the sector differential `d(g·ω) = g·(α_g ∧ ω)`.
fn wedge_by_alpha(frame: &FrameWedge, alpha: &[Scalar]) -> Vec<Matrix> {
    let top = frame.top_degree();
    let mut out = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let cols = if n < top { frame.dim(n + 1) } else { 0 };
        let mut rows = Vec::with_capacity(frame.dim(n));
        for j in 0..frame.dim(n) {
            let mut e_j = vec![Scalar::zero(); frame.dim(n)];
            e_j[j] = num::one();
            let mut v = frame.wedge_vectors(1, alpha, n, &e_j);
            v.truncate(cols);
            rows.push(v);
        }
        out.push(Matrix::from_rows(cols, rows));
    }
    out
}

fn window_coords_3(n: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

fn heisenberg_frame_basis() -> Vec<Vec<SignedSubset>> {
    vec![
        vec![(vec![], 1)],
        vec![(vec![0], 1), (vec![1], 1), (vec![2], 1)],
        // e^u∧e^v, e^w∧e^u = −e^u∧e^w, e^w∧e^v = −e^v∧e^w
        vec![(vec![0, 1], 1), (vec![0, 2], -1), (vec![1, 2], -1)],
        vec![(vec![0, 1, 2], 1)],
    ]
}

fn heisenberg_frame_labels() -> Vec<Vec<String>> {
    vec![
        vec!["1".into()],
        vec!["e^u".into(), "e^v".into(), "e^w".into()],
        vec!["e^u∧e^v".into(), "e^w∧e^u".into(), "e^w∧e^v".into()],
        vec!["e^u∧e^v∧e^w".into()],
    ]
}

/// The closed-form sector differential coefficient:
/// `d(u^n v^m w^k) = u^n v^m w^k · (n e^u + m e^v + (k + nm/2) e^w)`.
pub fn heisenberg_alpha(coords: &[i64]) -> [Scalar; 3] {
    let (n, m, k) = (coords[0], coords[1], coords[2]);
    [int(n), int(m), int(k) + frac(n * m, 2)]
}

/// The Heisenberg group algebra with its left-invariant calculus, truncated
/// to the window `|n|, |m|, |k| ≤ N`.
///
/// Construction is gated by the rewriting oracle: the differential of every
/// window monomial is computed independently from the bimodule relations by
/// normal ordering, and the builder refuses if any sector disagrees with
/// the closed form.
pub fn heisenberg(window: i64) -> Result<Arc<SectorDga>, ModelError> {
    heisenberg_with_relations(window, &HeisenbergRelations::default())
}

/// As [`heisenberg`], with an explicit relation set (exposed so tests can
/// demonstrate the oracle gate refusing perturbed relations).
pub fn heisenberg_with_relations(
    window: i64,
    relations: &HeisenbergRelations,
) -> Result<Arc<SectorDga>, ModelError> {
    assert!(window >= 1, "window must be at least 1");
    let coords = window_coords_3(window);
    let frame_basis = heisenberg_frame_basis();
    let frame = FrameWedge::exterior(3, &frame_basis);

    let mut conj = Vec::with_capacity(coords.len());
    let mut d = Vec::with_capacity(coords.len());
    for c in &coords {
        let g: GroupCoords = (c[0], c[1], c[2]);
        // oracle first: the normal-ordered differential must match the
        // closed form before anything is built. Both spellings of the
        // monomial are differentiated so that every conjugation relation
        // is exercised.
        let (sector, oracle_alpha) = relations.differential_of_monomial(g);
        debug_assert_eq!(sector, g);
        let (sector_v, oracle_alpha_v) = relations.differential_of_monomial_v_first(g);
        debug_assert_eq!(sector_v, g);
        let closed = heisenberg_alpha(c);
        if oracle_alpha != closed || oracle_alpha_v != closed {
            let fmt = |v: &[Scalar; 3]| {
                format!(
                    "{}·e^u + {}·e^v + {}·e^w",
                    crate::exactlin::format_scalar(&v[0]),
                    crate::exactlin::format_scalar(&v[1]),
                    crate::exactlin::format_scalar(&v[2])
                )
            };
            let offending = if oracle_alpha != closed {
                &oracle_alpha
            } else {
                &oracle_alpha_v
            };
            return Err(ModelError::OracleMismatch {
                sector: format!("u^{} v^{} w^{}", c[0], c[1], c[2]),
                oracle: fmt(offending),
                closed: fmt(&closed),
            });
        }
        // conjugation on one-forms from the relations, extended to all degrees
        let gen_images: Vec<Vec<Scalar>> = (0..3)
            .map(|i| relations.conj_by_monomial(g, i).to_vec())
            .collect();
        conj.push(induced_exterior_maps(&frame_basis, &gen_images, &frame));
        d.push(wedge_by_alpha(&frame, &closed));
    }

    let sectors = SectorSet::new(
        vec!["u".into(), "v".into(), "w".into()],
        coords,
        |a, b| {
            let p = group_mul((a[0], a[1], a[2]), (b[0], b[1], b[2]));
            vec![p.0, p.1, p.2]
        },
        true,
    );
    Ok(Arc::new(SectorDga::new(
        "heisenberg",
        sectors,
        heisenberg_frame_labels(),
        frame,
        conj,
        d,
    )?))
}

/// Laurent polynomials on the circle with `d(z^j) = j z^j e^z`, window
/// `|j| ≤ N`.
pub fn circle(window: i64) -> Arc<SectorDga> {
    assert!(window >= 1, "window must be at least 1");
    let coords: Vec<Vec<i64>> = (-window..=window).map(|j| vec![j]).collect();
    let frame_basis: Vec<Vec<SignedSubset>> = vec![vec![(vec![], 1)], vec![(vec![0], 1)]];
    let frame = FrameWedge::exterior(1, &frame_basis);
    let mut conj = Vec::new();
    let mut d = Vec::new();
    for c in &coords {
        conj.push(vec![Matrix::identity(1), Matrix::identity(1)]);
        d.push(wedge_by_alpha(&frame, &[int(c[0])]));
    }
    let sectors = SectorSet::new(vec!["z".into()], coords, |a, b| vec![a[0] + b[0]], true);
    Arc::new(
        SectorDga::new(
            "circle",
            sectors,
            vec![vec!["1".into()], vec!["e^z".into()]],
            frame,
            conj,
            d,
        )
        .expect("circle model shapes"),
    )
}

/// The commutative 2-torus calculus: sectors `x^a y^b`, frame `{e^x, e^y}`,
/// `d(x^a y^b) = x^a y^b (a e^x + b e^y)`.
pub fn torus(window: i64) -> Arc<SectorDga> {
    assert!(window >= 1, "window must be at least 1");
    let mut coords = Vec::new();
    for a in -window..=window {
        for b in -window..=window {
            coords.push(vec![a, b]);
        }
    }
    let frame_basis: Vec<Vec<SignedSubset>> = vec![
        vec![(vec![], 1)],
        vec![(vec![0], 1), (vec![1], 1)],
        vec![(vec![0, 1], 1)],
    ];
    let frame = FrameWedge::exterior(2, &frame_basis);
    let mut conj = Vec::new();
    let mut d = Vec::new();
    for c in &coords {
        conj.push(vec![
            Matrix::identity(1),
            Matrix::identity(2),
            Matrix::identity(1),
        ]);
        d.push(wedge_by_alpha(&frame, &[int(c[0]), int(c[1])]));
    }
    let sectors = SectorSet::new(
        vec!["x".into(), "y".into()],
        coords,
        |a, b| vec![a[0] + b[0], a[1] + b[1]],
        true,
    );
    Arc::new(
        SectorDga::new(
            "torus",
            sectors,
            vec![
                vec!["1".into()],
                vec!["e^x".into(), "e^y".into()],
                vec!["e^x∧e^y".into()],
            ],
            frame,
            conj,
            d,
        )
        .expect("torus model shapes"),
    )
}

/// The circle-to-Heisenberg inclusion `z^j ↦ w^j`, `e^z ↦ e^w`.
pub fn iota(base_window: i64, total_window: i64) -> Result<DgaMorphism, ModelError> {
    if base_window > total_window {
        return Err(ModelError::WindowOverflow(format!(
            "base window {base_window} exceeds total window {total_window}"
        )));
    }
    let base = circle(base_window);
    let total = heisenberg(total_window)?;
    iota_between(&base, &total)
}

/// The inclusion for already-built models (shares the `Arc`s).
pub fn iota_between(
    base: &Arc<SectorDga>,
    total: &Arc<SectorDga>,
) -> Result<DgaMorphism, ModelError> {
    let sector_map: Vec<_> = base
        .sectors()
        .ids()
        .map(|j| {
            let c = base.sectors().coords(j);
            total
                .sectors()
                .id_of(&[0, 0, c[0]])
                .ok_or_else(|| ModelError::WindowOverflow(format!("w^{} not in window", c[0])))
        })
        .collect::<Result<_, _>>()?;
    let gen_images = vec![vec![int(0), int(0), int(1)]];
    let frame_map = induced_exterior_maps(
        &[vec![(vec![], 1)], vec![(vec![0], 1)]],
        &gen_images,
        total.wedge_table(),
    );
    let morphism = DgaMorphism::new(Arc::clone(base), Arc::clone(total), sector_map, frame_map)?;
    let failures = morphism.validate();
    if !failures.is_empty() {
        return Err(ModelError::MorphismInvalid(failures));
    }
    Ok(morphism)
}

/// The calculus automorphism induced by `(a b; c d) ∈ SL(2,ℤ)`:
/// `θ(u) = u^a v^b`, `θ(v) = u^c v^d`, `θ(w) = w`,
/// `θ(e^u) = a e^u + b e^v + (ab/2) e^w`, `θ(e^v) = c e^u + d e^v + (cd/2) e^w`.
/// The target window must hold every image sector; overflows are listed.
pub fn theta(
    src_window: i64,
    tgt_window: i64,
    (a, b, c, d): (i64, i64, i64, i64),
) -> Result<DgaMorphism, ModelError> {
    let det = a * d - b * c;
    if det != 1 {
        return Err(ModelError::BadDeterminant(det));
    }
    let src = heisenberg(src_window)?;
    let tgt = if src_window == tgt_window {
        Arc::clone(&src)
    } else {
        heisenberg(tgt_window)?
    };

    let image_coords = |g: &[i64]| -> GroupCoords {
        let pu = group_power((a, b, 0), g[0]);
        let pv = group_power((c, d, 0), g[1]);
        group_mul(group_mul(pu, pv), (0, 0, g[2]))
    };
    let mut overflows = Vec::new();
    let mut sector_map = Vec::with_capacity(src.sectors().len());
    for g in src.sectors().ids() {
        let coords = src.sectors().coords(g);
        let img = image_coords(coords);
        match tgt.sectors().id_of(&[img.0, img.1, img.2]) {
            Some(id) => sector_map.push(id),
            None => overflows.push(format!(
                "{} ↦ u^{} v^{} w^{}",
                src.sectors().display(g),
                img.0,
                img.1,
                img.2
            )),
        }
    }
    if !overflows.is_empty() {
        return Err(ModelError::WindowOverflow(overflows.join(", ")));
    }

    let gen_images = vec![
        vec![int(a), int(b), frac(a * b, 2)],
        vec![int(c), int(d), frac(c * d, 2)],
        vec![int(0), int(0), int(1)],
    ];
    let frame_map =
        induced_exterior_maps(&heisenberg_frame_basis(), &gen_images, tgt.wedge_table());
    let morphism = DgaMorphism::new(src, tgt, sector_map, frame_map)?;
    let failures = morphism.validate();
    if !failures.is_empty() {
        return Err(ModelError::MorphismInvalid(failures));
    }
    Ok(morphism)
}

/// Rank-one free module over a model with `∇ e = λ e^w ⊗ e` (so `λ = 0` is
/// `E = A`, `∇ = d`). Flat for every λ.
pub fn twisted_module(
    dga: &Arc<SectorDga>,
    lambda: Scalar,
) -> Result<ConnectionModule, ModelError> {
    let w_index = dga.frame_labels()[1]
        .iter()
        .position(|l| l == "e^w")
        .ok_or_else(|| ModelError::WindowOverflow("model has no e^w frame form".into()))?;
    let mut nabla = ModElement::zero(1, 1);
    if !lambda.is_zero() {
        let mut v = vec![Scalar::zero(); dga.fdim(1)];
        v[w_index] = lambda;
        nabla.add_component(dga.sectors().unit(), v);
    }
    Ok(ConnectionModule::new(Arc::clone(dga), 1, vec![nabla])?)
}

/// The Heisenberg-over-circle fibration with a twisted rank-one module;
/// `lambda = 0` is Serre mode (`E = A`, `∇ = d`).
pub fn heisenberg_fibration(window: i64, lambda: Scalar) -> Result<FibrationData, ModelError> {
    let total = heisenberg(window)?;
    let base = circle(window);
    let iota = iota_between(&base, &total)?;
    let module = twisted_module(&total, lambda)?;
    Ok(FibrationData::new(iota, module)?)
}

/// The degenerate fibration `id : B → B` over the circle with `E = B`.
pub fn identity_fibration(window: i64) -> Result<FibrationData, ModelError> {
    let alg = circle(window);
    let iota = DgaMorphism::identity(Arc::clone(&alg));
    let module = ConnectionModule::trivial(alg);
    Ok(FibrationData::new(iota, module)?)
}

/// An honest non-fibration: the diagonal collapse of a 2-torus base onto
/// the circle, `x^a y^b ↦ z^{a+b}`, `e^x, e^y ↦ e^z`. A valid map of
/// calculi whose base has two independent form directions while the target
/// has one, so the wedge map fails injectivity at `(p, q) = (1, 0)`.
pub fn collapse_fibration(base_window: i64) -> Result<FibrationData, ModelError> {
    let base = torus(base_window);
    let total = circle(2 * base_window);
    let sector_map: Vec<_> = base
        .sectors()
        .ids()
        .map(|g| {
            let c = base.sectors().coords(g);
            total
                .sectors()
                .id_of(&[c[0] + c[1]])
                .expect("doubled window holds every diagonal sum")
        })
        .collect();
    let gen_images = vec![vec![int(1)], vec![int(1)]];
    let frame_map = induced_exterior_maps(
        &[
            vec![(vec![], 1)],
            vec![(vec![0], 1), (vec![1], 1)],
            vec![(vec![0, 1], 1)],
        ],
        &gen_images,
        total.wedge_table(),
    );
    let iota = DgaMorphism::new(base, Arc::clone(&total), sector_map, frame_map)?;
    let failures = iota.validate();
    if !failures.is_empty() {
        return Err(ModelError::MorphismInvalid(failures));
    }
    let module = ConnectionModule::trivial(total);
    Ok(FibrationData::new(iota, module)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_oracle_gate_accepts_standard_relations() {
        let dga = heisenberg(1).unwrap();
        assert_eq!(dga.sectors().len(), 27);
        let report = dga.check_axioms();
        assert!(report.ok(), "failures: {:?}", report.failures);
    }

    #[test]
    fn heisenberg_oracle_gate_refuses_perturbed_relation() {
        // perturb one relation coefficient; d(uv) then disagrees with the
        // closed form and construction must refuse
        let rels = HeisenbergRelations {
            c_vu: int(1),
            ..Default::default()
        };
        match heisenberg_with_relations(1, &rels) {
            Err(ModelError::OracleMismatch { .. }) => {}
            other => panic!("expected oracle refusal, got {other:?}"),
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(heisenberg_alpha(&[0, 0, 0]), [int(0), int(0), int(0)]);
        assert_eq!(heisenberg_alpha(&[1, 1, 0]), [int(1), int(1), frac(1, 2)]);
        assert_eq!(heisenberg_alpha(&[0, 0, 1]), [int(0), int(0), int(1)]);
    }

    #[test]
    fn heisenberg_de_rham_is_1331() {
        let dga = heisenberg(2).unwrap();
        assert_eq!(dga.de_rham_dims(), vec![1, 3, 3, 1]);
    }

    #[test]
    fn circle_model_cohomology() {
        let dga = circle(3);
        assert!(dga.check_axioms().ok());
        assert_eq!(dga.de_rham_dims(), vec![1, 1]);
        // d(z^2) = 2 z^2 e^z
        let two = dga.sectors().id_of(&[2]).unwrap();
        assert_eq!(dga.d_matrix(two, 0), Matrix::from_int_rows(1, &[&[2]]));
    }

    #[test]
    fn torus_model_cohomology() {
        let dga = torus(2);
        assert!(dga.check_axioms().ok());
        assert_eq!(dga.de_rham_dims(), vec![1, 2, 1]);
        for g in dga.sectors().ids() {
            dga.sector_complex(g).validate().unwrap();
        }
    }

    #[test]
    fn iota_is_a_morphism() {
        let m = iota(2, 2).unwrap();
        // ι(1) = 1
        assert_eq!(
            m.sector_image(m.source().sectors().unit()),
            m.target().sectors().unit()
        );
        // e^z ↦ e^w on the frame
        assert_eq!(m.frame_matrix(1), &Matrix::from_int_rows(3, &[&[0, 0, 1]]));
    }

    #[test]
    fn theta_examples() {
        // identity matrix gives the identity morphism
        let id = theta(1, 1, (1, 0, 0, 1)).unwrap();
        for g in id.source().sectors().ids() {
            assert_eq!(id.sector_image(g), g);
        }
        assert_eq!(id.frame_matrix(1), &Matrix::identity(3));

        // (1,1,0,1): θ(e^u) = e^u + e^v + (1/2) e^w
        let t = theta(1, 4, (1, 1, 0, 1)).unwrap();
        let row: Vec<Scalar> = t.frame_matrix(1).row_vec(0);
        assert_eq!(row, vec![int(1), int(1), frac(1, 2)]);

        // the other SL(2,Z) generator validates as a morphism too
        theta(1, 4, (0, -1, 1, 0)).unwrap();

        // non-unimodular matrices are rejected
        assert!(matches!(
            theta(1, 4, (2, 0, 0, 1)),
            Err(ModelError::BadDeterminant(2))
        ));
    }

    #[test]
    fn theta_window_overflow_is_listed() {
        let res = theta(2, 2, (1, 2, 0, 1));
        assert!(matches!(res, Err(ModelError::WindowOverflow(_))));
    }

    #[test]
    fn twisted_module_is_flat_for_every_lambda() {
        let dga = heisenberg(2).unwrap();
        for lambda in [int(0), int(1), frac(1, 2), frac(-3, 7)] {
            let m = twisted_module(&dga, lambda).unwrap();
            let r = m.curvature().unwrap();
            assert!(r.is_flat);
            assert!(r.prop34_ok);
            assert_eq!(r.prop34_skipped, 0);
        }
    }
}
