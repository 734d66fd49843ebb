use std::collections::BTreeMap;
use std::sync::Arc;

use num::Zero;

use super::dga::SectorDga;
use super::element::{AlgElement, ModElement};
use super::sector::SectorId;
use super::DgaError;
use crate::complexes::{CochainComplex, CohomologyResult};
use crate::exactlin::{row_times_matrix, Matrix, Scalar};

/// A free left module `E = A^rank` with a left covariant derivative,
/// determined by its values `∇ε_t ∈ Ω¹A ⊗ E` on the module basis and
/// extended by the Leibniz rule `∇(a·e) = da ⊗ e + a·∇e`.
///
/// Module flatness in the tensor-exactness sense is automatic for free
/// modules and recorded as a declared attribute.
#[derive(Clone, Debug)]
pub struct ConnectionModule {
    dga: Arc<SectorDga>,
    rank: usize,
    nabla_basis: Vec<ModElement>,
}

impl ConnectionModule {
    pub fn new(
        dga: Arc<SectorDga>,
        rank: usize,
        nabla_basis: Vec<ModElement>,
    ) -> Result<Self, DgaError> {
        if nabla_basis.len() != rank {
            return Err(DgaError::Shape("one ∇ε value per basis element".into()));
        }
        for (t, v) in nabla_basis.iter().enumerate() {
            if v.degree != 1 || v.rank != rank {
                return Err(DgaError::Shape(format!(
                    "∇ε_{t} must be a degree-1 tensor of rank {rank}"
                )));
            }
            for w in v.comps.values() {
                if w.len() != dga.fdim(1) * rank {
                    return Err(DgaError::Shape(format!("∇ε_{t} component width")));
                }
            }
        }
        Ok(ConnectionModule {
            dga,
            rank,
            nabla_basis,
        })
    }

    /// `E = A` with `∇ = d` (so `∇ε = 0`).
    pub fn trivial(dga: Arc<SectorDga>) -> Self {
        let nabla = vec![ModElement::zero(1, 1)];
        ConnectionModule {
            dga,
            rank: 1,
            nabla_basis: nabla,
        }
    }

    pub fn dga(&self) -> &Arc<SectorDga> {
        &self.dga
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nabla_basis(&self) -> &[ModElement] {
        &self.nabla_basis
    }

    /// True when every `∇ε_t` lives in the unit sector, so `∇` and all its
    /// extensions stay sector-diagonal.
    pub fn is_sector_diagonal(&self) -> bool {
        let unit = self.dga.sectors().unit();
        self.nabla_basis
            .iter()
            .all(|v| v.comps.keys().all(|&g| g == unit))
    }

    /// `∇^{[n]} : Ω^n A ⊗ E → Ω^{n+1} A ⊗ E`, `ω ⊗ e ↦ dω ⊗ e + (−1)^n ω ∧ ∇e`,
    /// evaluated on a general element. Fails only if a nonzero term lands on
    /// an out-of-window sector product.
    pub fn apply_extended(&self, x: &ModElement) -> Result<ModElement, DgaError> {
        let n = x.degree;
        let top = self.dga.top_degree();
        let mut out = ModElement::zero(n + 1, self.rank);
        if n > top {
            return Ok(out);
        }
        let f_next = self.dga.fdim(n + 1);
        let sign_neg = n % 2 == 1;
        for (&g, v) in &x.comps {
            // dω ⊗ e part: apply d_g to each module slice
            let d_g = self.dga.d_matrix(g, n);
            let mut dvec = vec![Scalar::zero(); f_next * self.rank];
            for t in 0..self.rank {
                let frame = ModElement::frame_vector(v, self.rank, t);
                let image = row_times_matrix(&frame, &d_g);
                for (k, c) in image.into_iter().enumerate() {
                    dvec[k * self.rank + t] = c;
                }
            }
            out.add_component(g, dvec);
            // (−1)^n ω ∧ ∇e part
            for t in 0..self.rank {
                let frame = ModElement::frame_vector(v, self.rank, t);
                if frame.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let omega = AlgElement {
                    degree: n,
                    comps: BTreeMap::from([(g, frame)]),
                };
                let wedged = self.wedge_alg_mod(&omega, &self.nabla_basis[t])?;
                let term = if sign_neg {
                    wedged.scale(&-num::BigRational::from_integer(1.into()))
                } else {
                    wedged
                };
                for (h, w) in term.comps {
                    out.add_component(h, w);
                }
            }
        }
        Ok(out)
    }

    /// Wedge a form into a module tensor: `ω ∧ (τ ⊗ ε)`.
    pub fn wedge_alg_mod(
        &self,
        x: &AlgElement,
        y: &ModElement,
    ) -> Result<ModElement, DgaError> {
        assert_eq!(y.rank, self.rank);
        let deg = x.degree + y.degree;
        let mut out = ModElement::zero(deg, self.rank);
        if deg > self.dga.top_degree() {
            return Ok(out);
        }
        let f_out = self.dga.fdim(deg);
        for (&g, vg) in &x.comps {
            for (&h, vh) in &y.comps {
                let moved = row_times_matrix(vg, &self.dga.conj_matrix(h, x.degree));
                let mut block = vec![Scalar::zero(); f_out * self.rank];
                let mut nonzero = false;
                for t in 0..self.rank {
                    let tau = ModElement::frame_vector(vh, self.rank, t);
                    let frame =
                        self.dga
                            .wedge_table()
                            .wedge_vectors(x.degree, &moved, y.degree, &tau);
                    for (k, c) in frame.into_iter().enumerate() {
                        if !c.is_zero() {
                            nonzero = true;
                            block[k * self.rank + t] = c;
                        }
                    }
                }
                if !nonzero {
                    continue;
                }
                match self.dga.sectors().product(g, h) {
                    Some(p) => out.add_component(p, block),
                    None => {
                        return Err(DgaError::OutOfWindow {
                            left: self.dga.sectors().display(g),
                            right: self.dga.sectors().display(h),
                        })
                    }
                }
            }
        }
        Ok(out)
    }

    /// The matrix of `∇^{[n]}` on the sector-`g` block, rows and columns
    /// indexed `(frame i, module t) ↦ i·rank + t`. Requires a
    /// sector-diagonal connection.
    pub fn extended_matrix(&self, g: SectorId, n: usize) -> Result<Matrix, DgaError> {
        if !self.is_sector_diagonal() {
            return Err(DgaError::NotSectorDiagonal);
        }
        let top = self.dga.top_degree();
        let f_n = self.dga.fdim(n);
        let f_next = if n < top { self.dga.fdim(n + 1) } else { 0 };
        let mut out = Matrix::zero(f_n * self.rank, f_next * self.rank);
        if n > top {
            return Ok(out);
        }
        let d_g = self.dga.d_matrix(g, n);
        let unit = self.dga.sectors().unit();
        for i in 0..f_n {
            for t in 0..self.rank {
                let row = i * self.rank + t;
                // dω ⊗ ε_t
                for k in 0..f_next {
                    let c = &d_g[(i, k)];
                    if !c.is_zero() {
                        out[(row, k * self.rank + t)] = c.clone();
                    }
                }
                // (−1)^n e_i ∧ ∇ε_t (unit sector values only)
                if let Some(v) = self.nabla_basis[t].comps.get(&unit) {
                    for j in 0..self.dga.fdim(1) {
                        for t2 in 0..self.rank {
                            let c = &v[j * self.rank + t2];
                            if c.is_zero() {
                                continue;
                            }
                            for (k, w) in self.dga.wedge_table().product(n, i, 1, j) {
                                if *k < f_next {
                                    let mut delta = c * w;
                                    if n % 2 == 1 {
                                        delta = -delta;
                                    }
                                    out[(row, k * self.rank + t2)] =
                                        &out[(row, k * self.rank + t2)] + &delta;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Curvature data: `R ε_t = ∇^{[1]}(∇ ε_t)`, flatness, and the exact
    /// verification of `∇^{[n+1]} ∘ ∇^{[n]} = id ∧ R` on every evaluable
    /// window basis element.
    pub fn curvature(&self) -> Result<CurvatureReport, DgaError> {
        let mut r_on_basis = Vec::with_capacity(self.rank);
        for t in 0..self.rank {
            r_on_basis.push(self.apply_extended(&self.nabla_basis[t])?);
        }
        let flat_witness = r_on_basis.iter().enumerate().find_map(|(t, r)| {
            r.comps
                .keys()
                .next()
                .map(|&g| format!("R ε_{t} nonzero at sector {}", self.dga.sectors().display(g)))
        });
        let (prop34_ok, prop34_witness, prop34_checked, prop34_skipped) =
            self.check_prop34(&r_on_basis)?;
        Ok(CurvatureReport {
            is_flat: flat_witness.is_none(),
            flat_witness,
            r_on_basis,
            prop34_ok,
            prop34_witness,
            prop34_checked,
            prop34_skipped,
        })
    }

    /// `∇^{[n+1]}(∇^{[n]}(ω ⊗ ε)) = ω ∧ R(ε)` on window basis elements, for
    /// every degree `n ≤ top`. Basis elements whose evaluation leaves the
    /// window (possible for sector-carrying connections) are skipped and
    /// counted.
    fn check_prop34(
        &self,
        r_on_basis: &[ModElement],
    ) -> Result<(bool, Option<String>, usize, usize), DgaError> {
        let top = self.dga.top_degree();
        let mut checked = 0usize;
        let mut skipped = 0usize;
        for n in 0..=top {
            for g in self.dga.sectors().ids() {
                for i in 0..self.dga.fdim(n) {
                    for t in 0..self.rank {
                        let x = ModElement::basis(n, self.rank, g, i, t, self.dga.fdim(n));
                        let lhs = match self
                            .apply_extended(&x)
                            .and_then(|y| self.apply_extended(&y))
                        {
                            Ok(v) => v,
                            Err(DgaError::OutOfWindow { .. }) => {
                                skipped += 1;
                                continue;
                            }
                            Err(e) => return Err(e),
                        };
                        let omega = AlgElement::basis(n, g, i, self.dga.fdim(n));
                        let rhs = match self.wedge_alg_mod(&omega, &r_on_basis[t]) {
                            Ok(v) => v,
                            Err(DgaError::OutOfWindow { .. }) => {
                                skipped += 1;
                                continue;
                            }
                            Err(e) => return Err(e),
                        };
                        checked += 1;
                        if lhs != rhs {
                            return Ok((
                                false,
                                Some(format!(
                                    "degree {n}, sector {}, frame {i}, basis {t}",
                                    self.dga.sectors().display(g)
                                )),
                                checked,
                                skipped,
                            ));
                        }
                    }
                }
            }
        }
        Ok((true, None, checked, skipped))
    }

    /// The sector-`g` sheaf complex `(Ω^• A ⊗ E)_g` with differentials
    /// `∇^{[•]}`; requires a sector-diagonal connection.
    pub fn sector_complex(&self, g: SectorId) -> Result<CochainComplex, DgaError> {
        let top = self.dga.top_degree();
        let dims: Vec<usize> = (0..=top).map(|n| self.dga.fdim(n) * self.rank).collect();
        let mut d = Vec::with_capacity(top + 1);
        for n in 0..=top {
            d.push(self.extended_matrix(g, n)?);
        }
        Ok(CochainComplex::new(dims, d)?)
    }

    /// Sheaf cohomology `H^•(A; E, ∇)`: per-sector cohomology of the flat
    /// complex, aggregated over the window. Rejects non-flat connections
    /// with the curvature witness.
    pub fn sheaf_cohomology(&self) -> Result<SheafCohomology, DgaError> {
        let report = self.curvature()?;
        if !report.is_flat {
            return Err(DgaError::NotFlat {
                witness: report.flat_witness.unwrap_or_default(),
            });
        }
        let top = self.dga.top_degree();
        let mut per_sector = Vec::new();
        let mut dims = vec![0usize; top + 1];
        for g in self.dga.sectors().ids() {
            let complex = self.sector_complex(g)?;
            let h = complex.cohomology()?;
            for (n, d) in h.dims().into_iter().enumerate() {
                dims[n] += d;
            }
            per_sector.push((g, h));
        }
        Ok(SheafCohomology { dims, per_sector })
    }
}

/// Curvature of a connection and the composition law it controls.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub r_on_basis: Vec<ModElement>,
    pub is_flat: bool,
    pub flat_witness: Option<String>,
    pub prop34_ok: bool,
    pub prop34_witness: Option<String>,
    pub prop34_checked: usize,
    pub prop34_skipped: usize,
}

/// Sheaf cohomology aggregated over sectors; `H^0` is the flat sections.
#[derive(Clone, Debug)]
pub struct SheafCohomology {
    dims: Vec<usize>,
    per_sector: Vec<(SectorId, CohomologyResult)>,
}

impl SheafCohomology {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn per_sector(&self) -> &[(SectorId, CohomologyResult)] {
        &self.per_sector
    }

    pub fn sector_dims(&self, g: SectorId) -> Vec<usize> {
        self.per_sector
            .iter()
            .find(|(s, _)| *s == g)
            .map(|(_, h)| h.dims())
            .unwrap_or_default()
    }

    /// Sectors carrying nonzero cohomology in the given degree.
    pub fn support(&self, degree: usize) -> Vec<SectorId> {
        self.per_sector
            .iter()
            .filter(|(_, h)| h.dims().get(degree).copied().unwrap_or(0) > 0)
            .map(|(g, _)| *g)
            .collect()
    }
}
