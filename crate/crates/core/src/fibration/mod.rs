//! Differential fibrations and their spectral sequence.
//!
//! Everything here is sector-graded. For a map of calculi `ι : B → A` and a
//! flat module `(E, ∇)` over `A`, the spaces
//! `D_{p,q} = ι_*Ω^p B ∧ Ω^q A`, `N_{p,q} = D_{p,q}/D_{p+1,q−1}` and
//! `M_{p,q} = (D_{p,q} ⊗ E)/(D_{p+1,q−1} ⊗ E)` decompose per total sector,
//! as does the filtration `F^m(Ω^n A ⊗ E) = ι_*Ω^m B ∧ Ω^{n−m} A ⊗ E`. The
//! analysis therefore runs the generic page engine on one small filtered
//! complex per sector and aggregates, which is exact: the direct sum of the
//! sector complexes *is* the filtered total complex.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::Zero;
use thiserror::Error;

use crate::complexes::{CochainComplex, ComplexDefect, FilteredComplex, Filtration};
use crate::dgalg::{
    AxiomFailure, ConnectionModule, DgaError, DgaMorphism, ModElement, SectorDga, SectorId,
};
use crate::exactlin::{
    induced_map, row_times_matrix, LinError, Matrix, QuotientPresentation, Scalar, Subspace,
};
use crate::specseq;

#[derive(Debug, Clone, Error)]
pub enum FibrationError {
    #[error("module is defined over a different algebra than the morphism target")]
    ModuleAlgebraMismatch,
    #[error("coefficient module is not flat: {witness}")]
    ModuleNotFlat { witness: String },
    #[error("morphism failed validation: {0:?}")]
    MorphismInvalid(Vec<AxiomFailure>),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("connection must be sector-diagonal for the fibration analysis")]
    NotSectorDiagonal,
    #[error("input is not a differential fibration; first failure at (p,q) = ({p},{q}), sector {sector}: source dim {source_dim}, image rank {rank}, target dim {target_dim}")]
    NotAFibration {
        p: usize,
        q: usize,
        sector: String,
        source_dim: usize,
        rank: usize,
        target_dim: usize,
    },
    #[error("internal consistency violation: {0}")]
    Internal(String),
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Complex(#[from] ComplexDefect),
    #[error(transparent)]
    Lin(#[from] LinError),
}

/// A differential fibration candidate: the inclusion of calculi together
/// with a flat coefficient module over the total algebra, plus the declared
/// right-flatness of every `Ω^p B` (automatic here, since sector algebras
/// are free over their invariant frame).
#[derive(Clone)]
pub struct FibrationData {
    iota: DgaMorphism,
    module: ConnectionModule,
    omega_b_right_flat: Vec<bool>,
}

impl FibrationData {
    pub fn new(iota: DgaMorphism, module: ConnectionModule) -> Result<Self, FibrationError> {
        if !Arc::ptr_eq(iota.target(), module.dga()) {
            return Err(FibrationError::ModuleAlgebraMismatch);
        }
        let failures = iota.validate();
        if !failures.is_empty() {
            return Err(FibrationError::MorphismInvalid(failures));
        }
        let curvature = module.curvature()?;
        if !curvature.is_flat {
            return Err(FibrationError::ModuleNotFlat {
                witness: curvature.flat_witness.unwrap_or_default(),
            });
        }
        let base_top = iota.source().top_degree();
        Ok(FibrationData {
            iota,
            module,
            omega_b_right_flat: vec![true; base_top + 1],
        })
    }

    pub fn base(&self) -> &Arc<SectorDga> {
        self.iota.source()
    }

    pub fn total(&self) -> &Arc<SectorDga> {
        self.iota.target()
    }

    pub fn iota(&self) -> &DgaMorphism {
        &self.iota
    }

    pub fn module(&self) -> &ConnectionModule {
        &self.module
    }

    pub fn omega_b_right_flat(&self, p: usize) -> bool {
        self.omega_b_right_flat.get(p).copied().unwrap_or(true)
    }
}

/// Lift a subspace of the frame coordinates `ℚ^f` to `ℚ^{f·rank}` by
/// tensoring with the free module basis.
fn tensor_rank(sub: &Subspace, rank: usize) -> Subspace {
    if rank == 1 {
        return sub.clone();
    }
    let mut rows = Vec::with_capacity(sub.dim() * rank);
    for row in sub.basis_rows() {
        for t in 0..rank {
            let mut v = vec![Scalar::zero(); row.len() * rank];
            for (i, c) in row.iter().enumerate() {
                v[i * rank + t] = c.clone();
            }
            rows.push(v);
        }
    }
    Subspace::from_rows(sub.ambient_dim() * rank, rows)
}

/// Wedge a frame-level form vector into module coordinates: each module
/// slice is wedged independently.
fn wedge_into_module(
    dga: &SectorDga,
    rank: usize,
    form_deg: usize,
    form: &[Scalar],
    elem_deg: usize,
    elem: &[Scalar],
) -> Vec<Scalar> {
    let f_out = dga.fdim(form_deg + elem_deg);
    let mut out = vec![Scalar::zero(); f_out * rank];
    for t in 0..rank {
        let slice = ModElement::frame_vector(elem, rank, t);
        let wedged = dga
            .wedge_table()
            .wedge_vectors(form_deg, form, elem_deg, &slice);
        for (k, c) in wedged.into_iter().enumerate() {
            out[k * rank + t] = c;
        }
    }
    out
}

/// Per-(p,q) family of quotient presentations, one per total sector.
#[derive(Clone, Debug)]
pub struct SectorQuotients {
    pub p: usize,
    pub q: usize,
    pub per_sector: Vec<QuotientPresentation>,
}

impl SectorQuotients {
    /// The common per-sector dimension, when it is uniform across sectors —
    /// the "frame rank" of the space as a free module.
    pub fn uniform_rank(&self) -> Option<usize> {
        let mut it = self.per_sector.iter().map(|q| q.dim());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn total_dim(&self) -> usize {
        self.per_sector.iter().map(|q| q.dim()).sum()
    }

    pub fn sector_dim(&self, g: SectorId) -> usize {
        self.per_sector[g].dim()
    }
}

/// One cell of the fibration criterion: is
/// `Ω^p B ⊗_B N_{0,q} → N_{p,q}`, `ξ ⊗ [x] ↦ [ι_*ξ ∧ x]`, bijective?
#[derive(Clone, Debug)]
pub struct FibrationCell {
    pub p: usize,
    pub q: usize,
    pub ok: bool,
    pub failures: Vec<(SectorId, usize, usize, usize)>, // sector, source, rank, target
}

#[derive(Clone, Debug)]
pub struct FibrationReport {
    pub cells: Vec<FibrationCell>,
}

impl FibrationReport {
    pub fn ok(&self) -> bool {
        self.cells.iter().all(|c| c.ok)
    }

    pub fn first_failure(&self) -> Option<&FibrationCell> {
        self.cells.iter().find(|c| !c.ok)
    }
}

/// The fiber cohomology `Ĥ_q`: per-sector presentations inside the
/// `M_{0,q}` coordinate spaces, the orbit structure of the base action, and
/// the freeness certificate when every orbit acts by bijections.
#[derive(Clone, Debug)]
pub struct HatH {
    pub q: usize,
    pub per_sector: Vec<QuotientPresentation>,
    pub orbits: Vec<Orbit>,
    pub free_certificate: Option<FreeCertificate>,
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub representative: SectorId,
    pub members: Vec<SectorId>,
}

#[derive(Clone, Debug)]
pub struct FreeCertificate {
    /// `(orbit index, rank)` for orbits carrying cohomology.
    pub orbit_ranks: Vec<(usize, usize)>,
}

impl FreeCertificate {
    pub fn total_rank(&self) -> usize {
        self.orbit_ranks.iter().map(|&(_, r)| r).sum()
    }
}

impl HatH {
    pub fn dims_per_sector(&self) -> Vec<usize> {
        self.per_sector.iter().map(|p| p.dim()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.per_sector.iter().map(|p| p.dim()).sum()
    }

    pub fn free_rank(&self) -> Option<usize> {
        self.free_certificate.as_ref().map(|c| c.total_rank())
    }
}

/// The induced base connection `∇_q : Ĥ_q → Ω¹B ⊗_B Ĥ_q` in collapsed
/// per-sector form: at each total sector `g`, a matrix from `Ĥ_{q,g}` to
/// `(base 1-frame) × Ĥ_{q,g}` with column index `i·dim + c`.
#[derive(Clone, Debug)]
pub struct NablaQ {
    pub q: usize,
    pub per_sector: Vec<Matrix>,
}

/// The second page by the theorem route: `H^p(B; Ĥ_q, ∇_q)`.
#[derive(Clone, Debug)]
pub struct SecondPage {
    /// dims per (p, q), aggregated over sectors
    pub grid: BTreeMap<(usize, usize), usize>,
    /// dims per (p, q, total sector): base-sector cohomology pushed to the
    /// total sector `ι(j)·rep`; classes whose push leaves the window are
    /// counted here
    pub per_total_sector: BTreeMap<(usize, usize, SectorId), usize>,
    pub clipped: usize,
    /// false when some Ĥ_q had no freeness certificate and the theorem
    /// route was skipped for it
    pub complete: bool,
}

/// Outcome of comparing the two routes.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub e1_mismatches: Vec<(usize, usize, SectorId, usize, usize)>,
    pub e2_mismatches: Vec<(usize, usize, usize, usize)>,
    pub e2_sector_mismatches: Vec<(usize, usize, SectorId, usize, usize)>,
    pub convergence_ok: bool,
    pub einf_totals: Vec<usize>,
    pub sheaf_dims: Vec<usize>,
    pub clipped: usize,
}

impl CrossCheck {
    pub fn ok(&self) -> bool {
        self.e1_mismatches.is_empty()
            && self.e2_mismatches.is_empty()
            && self.e2_sector_mismatches.is_empty()
            && self.convergence_ok
            && self.einf_totals == self.sheaf_dims
    }
}

/// The full sector-by-sector analysis of a fibration candidate.
pub struct LerayAnalysis {
    fd: FibrationData,
    rank: usize,
    top: usize,
    base_top: usize,
    /// factor pairs (base sector, total sector) per product total sector
    factors: Vec<Vec<(SectorId, SectorId)>>,
    /// d_spaces[p][q][sector] = (D_{p,q})_g as a frame-level subspace
    d_spaces: Vec<Vec<Vec<Subspace>>>,
    n_spaces: Vec<Vec<SectorQuotients>>,
    m_spaces: Vec<Vec<SectorQuotients>>,
    /// fiber differentials: per sector, per q, matrix M_{0,q} → M_{0,q+1}
    fiber_d: Vec<Vec<Matrix>>,
    hat: Vec<HatH>,
    filtered: Vec<FilteredComplex>,
}

impl LerayAnalysis {
    pub fn new(fd: &FibrationData) -> Result<Self, FibrationError> {
        let module = fd.module();
        if !module.is_sector_diagonal() {
            return Err(FibrationError::NotSectorDiagonal);
        }
        let total = fd.total();
        let base = fd.base();
        let top = total.top_degree();
        let base_top = base.top_degree();
        let rank = module.rank();
        let n_sectors = total.sectors().len();

        // factor pairs ι(b)·g' = g
        let mut factors = vec![Vec::new(); n_sectors];
        for b in base.sectors().ids() {
            let ib = fd.iota().sector_image(b);
            for gp in total.sectors().ids() {
                if let Some(g) = total.sectors().product(ib, gp) {
                    factors[g].push((b, gp));
                }
            }
        }

        // D_{p,q} per sector: the span of ι_*ξ ∧ x over in-window
        // factorizations, at the frame level
        let mut d_spaces: Vec<Vec<Vec<Subspace>>> = Vec::with_capacity(top + 2);
        for p in 0..=top + 1 {
            let mut per_q = Vec::new();
            for q in 0..=top.saturating_sub(p) {
                let n = p + q;
                let f_n = total.fdim(n);
                let mut per_sector = Vec::with_capacity(n_sectors);
                for g in 0..n_sectors {
                    per_sector.push(build_d_space(fd, &factors, p, q, g, f_n));
                }
                per_q.push(per_sector);
            }
            d_spaces.push(per_q);
        }

        // N and M quotients
        let zero_d = |p: usize, q: i64, g: usize, ambient: usize| -> Subspace {
            if q < 0 || p > top + 1 {
                Subspace::zero(ambient)
            } else if (q as usize) < d_spaces[p].len() {
                d_spaces[p][q as usize][g].clone()
            } else {
                Subspace::zero(ambient)
            }
        };
        let mut n_spaces = Vec::with_capacity(top + 1);
        let mut m_spaces = Vec::with_capacity(top + 1);
        for p in 0..=top {
            let mut n_q = Vec::new();
            let mut m_q = Vec::new();
            for q in 0..=top - p {
                let n_deg = p + q;
                let f_n = total.fdim(n_deg);
                let mut n_sector = Vec::with_capacity(n_sectors);
                let mut m_sector = Vec::with_capacity(n_sectors);
                for g in 0..n_sectors {
                    let numerator = d_spaces[p][q][g].clone();
                    let denominator = zero_d(p + 1, q as i64 - 1, g, f_n);
                    let n_pres = QuotientPresentation::new(numerator.clone(), denominator.clone())
                        .map_err(|e| match e {
                            LinError::NotContained { .. } => FibrationError::WindowTooSmall(
                                format!(
                                    "D_{{{},{}}} does not contain D_{{{},{}}} at sector {}",
                                    p,
                                    q,
                                    p + 1,
                                    q as i64 - 1,
                                    total.sectors().display(g)
                                ),
                            ),
                            other => FibrationError::Lin(other),
                        })?;
                    let m_pres = QuotientPresentation::new(
                        tensor_rank(&numerator, rank),
                        tensor_rank(&denominator, rank),
                    )?;
                    n_sector.push(n_pres);
                    m_sector.push(m_pres);
                }
                n_q.push(SectorQuotients {
                    p,
                    q,
                    per_sector: n_sector,
                });
                m_q.push(SectorQuotients {
                    p,
                    q,
                    per_sector: m_sector,
                });
            }
            n_spaces.push(n_q);
            m_spaces.push(m_q);
        }

        // fiber differentials [∇^{[q]}] : M_{0,q} → M_{0,q+1} per sector
        let mut fiber_d = Vec::with_capacity(n_sectors);
        for g in 0..n_sectors {
            let mut per_q = Vec::with_capacity(top + 1);
            for q in 0..=top {
                let src = &m_spaces[0][q].per_sector[g];
                let dst = if q < top {
                    m_spaces[0][q + 1].per_sector[g].clone()
                } else {
                    QuotientPresentation::zero(0)
                };
                let nabla = module.extended_matrix(g, q)?;
                per_q.push(induced_map(&nabla, src, &dst).map_err(|e| {
                    FibrationError::Internal(format!(
                        "fiber differential not induced at sector {} degree {q}: {e}",
                        total.sectors().display(g)
                    ))
                })?);
            }
            fiber_d.push(per_q);
        }

        // Ĥ_q per sector, orbits, freeness certificates
        let orbits = compute_orbits(fd);
        let mut hat = Vec::with_capacity(top + 1);
        for q in 0..=top {
            let mut per_sector = Vec::with_capacity(n_sectors);
            for g in 0..n_sectors {
                let kernel = fiber_d[g][q].kernel();
                let image = if q == 0 {
                    Subspace::zero(kernel.ambient_dim())
                } else {
                    fiber_d[g][q - 1].image()
                };
                per_sector.push(QuotientPresentation::new(kernel, image)?);
            }
            hat.push(HatH {
                q,
                per_sector,
                orbits: orbits.clone(),
                free_certificate: None,
            });
        }

        // the filtered total complex, one filtered complex per sector
        let mut filtered = Vec::with_capacity(n_sectors);
        for g in 0..n_sectors {
            let dims: Vec<usize> = (0..=top).map(|n| total.fdim(n) * rank).collect();
            let mut d = Vec::with_capacity(top + 1);
            for n in 0..=top {
                d.push(module.extended_matrix(g, n)?);
            }
            let complex = CochainComplex::new(dims, d)?;
            let mut levels = Vec::with_capacity(top + 1);
            for m in 0..=top {
                let mut per_degree = Vec::with_capacity(top + 1);
                for n in 0..=top {
                    let q = n as i64 - m as i64;
                    per_degree.push(tensor_rank(&zero_d(m, q, g, total.fdim(n)), rank));
                }
                levels.push(per_degree);
            }
            let fc = FilteredComplex::new(complex, Filtration::new(levels));
            fc.validate()?;
            filtered.push(fc);
        }

        let mut analysis = LerayAnalysis {
            fd: fd.clone(),
            rank,
            top,
            base_top,
            factors,
            d_spaces,
            n_spaces,
            m_spaces,
            fiber_d,
            hat,
            filtered,
        };
        analysis.attach_freeness_certificates()?;
        Ok(analysis)
    }

    pub fn data(&self) -> &FibrationData {
        &self.fd
    }

    pub fn top_degree(&self) -> usize {
        self.top
    }

    pub fn base_top_degree(&self) -> usize {
        self.base_top
    }

    /// `(D, N, M)` at `(p, q)`: the frame-level span per sector and the two
    /// quotient families.
    pub fn spaces(&self, p: usize, q: usize) -> Option<(&[Subspace], &SectorQuotients, &SectorQuotients)> {
        let d = self.d_spaces.get(p)?.get(q)?;
        let n = self.n_spaces.get(p)?.get(q)?;
        let m = self.m_spaces.get(p)?.get(q)?;
        Some((d, n, m))
    }

    pub fn n_space(&self, p: usize, q: usize) -> Option<&SectorQuotients> {
        self.n_spaces.get(p)?.get(q)
    }

    /// The per-sector filtered complexes of the induced filtration
    /// `F^m = ι_*Ω^m B ∧ Ω^{n−m} A ⊗ E` (already validated).
    pub fn filtered_complexes(&self) -> &[FilteredComplex] {
        &self.filtered
    }

    /// Assemble the direct-sum filtered complex over all sectors, with basis
    /// labels `sector·frame⊗ε_t`; this is the total complex as one object.
    pub fn assemble_global(&self) -> FilteredComplex {
        let total = self.fd.total();
        let top = self.top;
        let n_sectors = total.sectors().len();
        let dims: Vec<usize> = (0..=top)
            .map(|n| total.fdim(n) * self.rank * n_sectors)
            .collect();
        let block = |n: usize| total.fdim(n) * self.rank;
        let mut d = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let mut m = Matrix::zero(dims[n], if n < top { dims[n + 1] } else { 0 });
            for g in 0..n_sectors {
                let dg = &self.filtered[g].complex.diff(n as i64);
                for r in 0..dg.rows() {
                    for c in 0..dg.cols() {
                        let v = &dg[(r, c)];
                        if !v.is_zero() {
                            m[(g * block(n) + r, g * block(n + 1) + c)] = v.clone();
                        }
                    }
                }
            }
            d.push(m);
        }
        let mut labels = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let mut per_degree = Vec::with_capacity(dims[n]);
            for g in 0..n_sectors {
                for i in 0..total.fdim(n) {
                    for t in 0..self.rank {
                        let mut label = format!(
                            "{}·{}",
                            total.sectors().display(g),
                            total.frame_labels()[n][i]
                        );
                        if self.rank > 1 {
                            label.push_str(&format!("⊗ε{t}"));
                        }
                        per_degree.push(label);
                    }
                }
            }
            labels.push(per_degree);
        }
        let complex = CochainComplex::new(dims.clone(), d)
            .expect("assembled complex shapes")
            .with_labels(labels);
        let mut levels = Vec::with_capacity(top + 1);
        for m_level in 0..=top {
            let mut per_degree = Vec::with_capacity(top + 1);
            for n in 0..=top {
                let mut rows = Vec::new();
                for g in 0..n_sectors {
                    let sub = self.filtered[g].space(m_level as i64, n as i64);
                    for row in sub.basis_rows() {
                        let mut v = vec![Scalar::zero(); dims[n]];
                        for (i, c) in row.iter().enumerate() {
                            v[g * block(n) + i] = c.clone();
                        }
                        rows.push(v);
                    }
                }
                per_degree.push(Subspace::from_rows(dims[n], rows));
            }
            levels.push(per_degree);
        }
        FilteredComplex::new(complex, Filtration::new(levels))
    }

    /// Check `Ω^p B ⊗_B N_{0,q} → N_{p,q}` for bijectivity at every
    /// in-window `(p, q)`, sector by sector.
    pub fn fibration_check(&self) -> FibrationReport {
        let total = self.fd.total();
        let base = self.fd.base();
        let mut cells = Vec::new();
        for p in 0..=self.top {
            for q in 0..=self.top - p {
                let f_p_b = base.fdim(p);
                let n0 = &self.n_spaces[0][q];
                let npq = &self.n_spaces[p][q];
                let mut failures = Vec::new();
                for g in total.sectors().ids() {
                    let src_dim = f_p_b * n0.per_sector[g].dim();
                    let tgt_dim = npq.per_sector[g].dim();
                    let mut rows = Vec::new();
                    let mut well_defined = true;
                    for i in 0..f_p_b {
                        let mut xi = vec![Scalar::zero(); f_p_b];
                        xi[i] = num::one();
                        // ι_* of the unit-base-sector frame form, conjugated past g
                        let mapped = row_times_matrix(&xi, self.fd.iota().frame_matrix(p));
                        let moved = row_times_matrix(&mapped, &total.conj_matrix(g, p));
                        for r in 0..n0.per_sector[g].dim() {
                            let y = n0.per_sector[g].representatives().row(r);
                            let image = total.wedge_table().wedge_vectors(p, &moved, q, y);
                            match npq.per_sector[g].class_of(&image) {
                                Some(class) => rows.push(class),
                                None => {
                                    well_defined = false;
                                    break;
                                }
                            }
                        }
                    }
                    let rank = if well_defined {
                        Matrix::from_rows(tgt_dim, rows).rank()
                    } else {
                        0
                    };
                    if !well_defined || rank != src_dim || rank != tgt_dim {
                        failures.push((g, src_dim, rank, tgt_dim));
                    }
                }
                cells.push(FibrationCell {
                    p,
                    q,
                    ok: failures.is_empty(),
                    failures,
                });
            }
        }
        FibrationReport { cells }
    }

    /// Error out unless the fibration criterion holds everywhere.
    pub fn require_fibration(&self) -> Result<FibrationReport, FibrationError> {
        let report = self.fibration_check();
        if let Some(cell) = report.first_failure() {
            let (g, source_dim, rank, target_dim) = cell.failures[0];
            return Err(FibrationError::NotAFibration {
                p: cell.p,
                q: cell.q,
                sector: self.fd.total().sectors().display(g),
                source_dim,
                rank,
                target_dim,
            });
        }
        Ok(report)
    }

    /// The fiber complex `(M_{0,•}, [∇^{[•]}])` differentials per sector.
    pub fn fiber_differentials(&self, g: SectorId) -> &[Matrix] {
        &self.fiber_d[g]
    }

    pub fn m_space(&self, p: usize, q: usize) -> Option<&SectorQuotients> {
        self.m_spaces.get(p)?.get(q)
    }

    pub fn hat_h(&self, q: usize) -> &HatH {
        &self.hat[q]
    }

    pub fn hat_levels(&self) -> &[HatH] {
        &self.hat
    }

    /// Transport of the base action `b·` on `M_{0,q}` classes:
    /// the coordinate-identity map from the sector-`g` block to the
    /// `ι(b)·g` block, induced on the quotients.
    fn action_on_m(&self, b: SectorId, g: SectorId, q: usize) -> Option<Result<Matrix, LinError>> {
        let total = self.fd.total();
        let ib = self.fd.iota().sector_image(b);
        let bg = total.sectors().product(ib, g)?;
        let src = &self.m_spaces[0][q].per_sector[g];
        let dst = &self.m_spaces[0][q].per_sector[bg];
        let id = Matrix::identity(total.fdim(q) * self.rank);
        Some(induced_map(&id, src, dst))
    }

    /// Prop 5.4 as a test: every fiber differential commutes with the base
    /// action wherever the action is defined in the window. Returns the
    /// number of commuting squares checked.
    pub fn check_fiber_b_linearity(&self) -> Result<usize, FibrationError> {
        let total = self.fd.total();
        let base = self.fd.base();
        let mut checked = 0usize;
        for b in base.sectors().ids() {
            let ib = self.fd.iota().sector_image(b);
            for g in total.sectors().ids() {
                let Some(bg) = total.sectors().product(ib, g) else {
                    continue;
                };
                for q in 0..self.top {
                    let (Some(Ok(a_q)), Some(Ok(a_q1))) =
                        (self.action_on_m(b, g, q), self.action_on_m(b, g, q + 1))
                    else {
                        continue;
                    };
                    let lhs = a_q.mul(&self.fiber_d[bg][q]);
                    let rhs = self.fiber_d[g][q].mul(&a_q1);
                    if lhs != rhs {
                        return Err(FibrationError::Internal(format!(
                            "fiber differential is not B-linear at sector {}, base {}, q = {q}",
                            total.sectors().display(g),
                            base.sectors().display(b)
                        )));
                    }
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }

    /// Transport `Ĥ_{q,g} → Ĥ_{q,ι(b)g}` induced by the base action.
    fn transport_class(&self, b: SectorId, g: SectorId, q: usize) -> Option<Result<Matrix, LinError>> {
        let total = self.fd.total();
        let ib = self.fd.iota().sector_image(b);
        let bg = total.sectors().product(ib, g)?;
        let m_action = match self.action_on_m(b, g, q)? {
            Ok(m) => m,
            Err(e) => return Some(Err(e)),
        };
        let src_hat = &self.hat[q].per_sector[g];
        let dst_hat = &self.hat[q].per_sector[bg];
        // lift Ĥ classes to M coordinates, act, and take classes again
        Some(induced_map(&m_action, src_hat, dst_hat))
    }

    fn attach_freeness_certificates(&mut self) -> Result<(), FibrationError> {
        let base = Arc::clone(self.fd.base());
        for q in 0..=self.top {
            let orbits = self.hat[q].orbits.clone();
            let mut orbit_ranks = Vec::new();
            let mut certified = true;
            for (oi, orbit) in orbits.iter().enumerate() {
                let rep_dim = self.hat[q].per_sector[orbit.representative].dim();
                let mut any_nonzero = rep_dim > 0;
                let mut uniform = true;
                for &g in &orbit.members {
                    let d = self.hat[q].per_sector[g].dim();
                    any_nonzero |= d > 0;
                    uniform &= d == rep_dim;
                }
                if !any_nonzero {
                    continue;
                }
                if !uniform {
                    certified = false;
                    break;
                }
                // every defined action step must be bijective on classes
                'steps: for b in base.sectors().ids() {
                    for &g in &orbit.members {
                        match self.transport_class(b, g, q) {
                            None => continue,
                            Some(Err(_)) => {
                                certified = false;
                                break 'steps;
                            }
                            Some(Ok(t)) => {
                                if t.rows() != t.cols() || t.rank() != t.rows() {
                                    certified = false;
                                    break 'steps;
                                }
                            }
                        }
                    }
                }
                if !certified {
                    break;
                }
                orbit_ranks.push((oi, rep_dim));
            }
            self.hat[q].free_certificate = if certified {
                Some(FreeCertificate { orbit_ranks })
            } else {
                None
            };
        }
        Ok(())
    }

    /// The induced connection `∇_q` on `Ĥ_q`, computed by decomposing the
    /// total differential of each cohomology representative in the fixed
    /// basis `{ι_*η_i ∧ y_m}` of `M_{1,q}` built from base frame forms and
    /// fiber representatives, then projecting to classes.
    pub fn nabla_q(&self, q: usize) -> Result<NablaQ, FibrationError> {
        let total = self.fd.total();
        let base = self.fd.base();
        let f1b = base.fdim(1);
        let module = self.fd.module();
        let mut per_sector = Vec::with_capacity(total.sectors().len());
        for g in total.sectors().ids() {
            let hat = &self.hat[q].per_sector[g];
            let m0 = &self.m_spaces[0][q].per_sector[g];
            let m1 = if q < self.top {
                &self.m_spaces[1][q].per_sector[g]
            } else {
                // top fiber degree: ∇ lands in degree top+1 = 0, so ∇_q = 0
                per_sector.push(Matrix::zero(hat.dim(), f1b * hat.dim()));
                continue;
            };
            let nabla_mat = module.extended_matrix(g, q)?;
            // fixed decomposition basis: classes of ι_*η_i ∧ y_m in M_{1,q}
            let mut basis_rows = Vec::with_capacity(f1b * m0.dim());
            for i in 0..f1b {
                let mut eta = vec![Scalar::zero(); f1b];
                eta[i] = num::one();
                let mapped = row_times_matrix(&eta, self.fd.iota().frame_matrix(1));
                let moved = row_times_matrix(&mapped, &total.conj_matrix(g, 1));
                for r in 0..m0.dim() {
                    let y = m0.representatives().row(r);
                    let image = wedge_into_module(total, self.rank, 1, &moved, q, y);
                    let class = m1.class_of(&image).ok_or_else(|| {
                        FibrationError::Internal(format!(
                            "decomposition basis vector escapes M_{{1,{q}}} at sector {}",
                            total.sectors().display(g)
                        ))
                    })?;
                    basis_rows.push(class);
                }
            }
            let basis = Matrix::from_rows(m1.dim(), basis_rows);
            // unique expansion requires the basis to be invertible — this is
            // exactly the fibration isomorphism at (1, q)
            if basis.rank() != basis.rows() || basis.rows() != m1.dim() {
                return Err(FibrationError::Internal(format!(
                    "decomposition basis of M_{{1,{q}}} is not a basis at sector {} (fibration hypothesis)",
                    total.sectors().display(g)
                )));
            }
            let mut rows = Vec::with_capacity(hat.dim());
            for c in 0..hat.dim() {
                // cohomology representative, lifted to the ambient block
                let m_class = hat.representatives().row(c);
                let x = m0.lift(m_class);
                let t = row_times_matrix(&x, &nabla_mat);
                // the differential of a fiber cocycle lies in F¹
                let t_class_in_m1 = m1.class_of(&t).ok_or_else(|| {
                    FibrationError::Internal(format!(
                        "∇ of a fiber cocycle is not in F¹ at sector {} (q = {q})",
                        total.sectors().display(g)
                    ))
                })?;
                let coeffs = Matrix::solve_left(
                    &basis,
                    &Matrix::from_rows(m1.dim(), vec![t_class_in_m1]),
                )
                .ok_or_else(|| {
                    FibrationError::Internal(format!(
                        "decomposition system inconsistent at sector {} (q = {q})",
                        total.sectors().display(g)
                    ))
                })?;
                // per base frame index: z_i = Σ_m c_{i,m} [y_m] must be a
                // fiber cocycle, whose Ĥ class is the output coefficient
                let mut out_row = vec![Scalar::zero(); f1b * hat.dim()];
                for i in 0..f1b {
                    let z: Vec<Scalar> = (0..m0.dim())
                        .map(|m| coeffs[(0, i * m0.dim() + m)].clone())
                        .collect();
                    let dz = row_times_matrix(&z, &self.fiber_d[g][q]);
                    if dz.iter().any(|c| !c.is_zero()) {
                        return Err(FibrationError::Internal(format!(
                            "decomposition component is not a cocycle at sector {} (q = {q})",
                            total.sectors().display(g)
                        )));
                    }
                    let class = hat.class_of(&z).ok_or_else(|| {
                        FibrationError::Internal("cocycle escapes kernel presentation".into())
                    })?;
                    for (cc, v) in class.into_iter().enumerate() {
                        out_row[i * hat.dim() + cc] = v;
                    }
                }
                rows.push(out_row);
            }
            per_sector.push(Matrix::from_rows(f1b * hat.dim(), rows));
        }
        Ok(NablaQ { q, per_sector })
    }

    /// Independence of `∇_q` from the chosen cocycle representative:
    /// recompute with representatives perturbed by coboundaries and by
    /// divisor elements, and compare classes. The perturbation vectors are
    /// supplied by the caller (tests drive this with seeded randomness).
    pub fn nabla_q_representative_independent(
        &self,
        q: usize,
        perturbations: &[Vec<Scalar>],
    ) -> Result<bool, FibrationError> {
        let total = self.fd.total();
        let module = self.fd.module();
        let reference = self.nabla_q(q)?;
        let base = self.fd.base();
        let f1b = base.fdim(1);
        for g in total.sectors().ids() {
            let hat = &self.hat[q].per_sector[g];
            if hat.dim() == 0 {
                continue;
            }
            let m0 = &self.m_spaces[0][q].per_sector[g];
            let m1 = &self.m_spaces[1][q].per_sector[g];
            let nabla_mat = module.extended_matrix(g, q)?;
            for (c, pert) in (0..hat.dim()).zip(perturbations.iter().cycle()) {
                // perturb the lifted representative by a divisor element of
                // the Ĥ presentation (an image class) and by an F¹ element
                let mut m_class = hat.representatives().row(c).to_vec();
                for (i, extra) in pert.iter().enumerate() {
                    if let Some(row) = hat
                        .divisor()
                        .basis()
                        .row_vec_checked(i)
                    {
                        for (a, b) in m_class.iter_mut().zip(&row) {
                            let delta = extra * b;
                            *a += delta;
                        }
                    }
                }
                let mut x = m0.lift(&m_class);
                // and by an F¹-divisor ambient element
                for (i, extra) in pert.iter().enumerate() {
                    if let Some(row) = m0.divisor().basis().row_vec_checked(i) {
                        for (a, b) in x.iter_mut().zip(&row) {
                            let delta = extra * b;
                            *a += delta;
                        }
                    }
                }
                let t = row_times_matrix(&x, &nabla_mat);
                let t_class = m1
                    .class_of(&t)
                    .ok_or_else(|| FibrationError::Internal("perturbed ∇x not in F¹".into()))?;
                // decompose against the same fixed basis
                let mut basis_rows = Vec::new();
                for i in 0..f1b {
                    let mut eta = vec![Scalar::zero(); f1b];
                    eta[i] = num::one();
                    let mapped = row_times_matrix(&eta, self.fd.iota().frame_matrix(1));
                    let moved = row_times_matrix(&mapped, &total.conj_matrix(g, 1));
                    for r in 0..m0.dim() {
                        let y = m0.representatives().row(r);
                        basis_rows.push(
                            m1.class_of(&wedge_into_module(total, self.rank, 1, &moved, q, y))
                                .expect("decomposition basis"),
                        );
                    }
                }
                let basis = Matrix::from_rows(m1.dim(), basis_rows);
                let coeffs =
                    Matrix::solve_left(&basis, &Matrix::from_rows(m1.dim(), vec![t_class]))
                        .ok_or_else(|| {
                            FibrationError::Internal("perturbed decomposition failed".into())
                        })?;
                for i in 0..f1b {
                    let z: Vec<Scalar> = (0..m0.dim())
                        .map(|m| coeffs[(0, i * m0.dim() + m)].clone())
                        .collect();
                    let class = hat
                        .class_of(&z)
                        .ok_or_else(|| FibrationError::Internal("not a cocycle".into()))?;
                    for (cc, v) in class.into_iter().enumerate() {
                        if v != reference.per_sector[g][(c, i * hat.dim() + cc)] {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// Leibniz rule for `∇_q` over the base: for every in-window action
    /// step `b`, `∇_q(b·x) = db ⊗ x + b·∇_q(x)` as matrices. Requires a
    /// commutative base calculus (all shipped bases are commutative).
    pub fn check_nabla_q_leibniz(&self, q: usize, nq: &NablaQ) -> Result<usize, FibrationError> {
        let total = self.fd.total();
        let base = self.fd.base();
        let f1b = base.fdim(1);
        let mut checked = 0usize;
        for b in base.sectors().ids() {
            // base alpha coefficients of sector b: d(b) = b · Σ a_i η_i
            let a_row = base.d_matrix(b, 0);
            let a_row = Matrix::from_rows(f1b, vec![a_row.row_vec(0)]);
            for g in total.sectors().ids() {
                let Some(Ok(t_b)) = self.transport_class(b, g, q) else {
                    continue;
                };
                let ib = self.fd.iota().sector_image(b);
                let bg = total.sectors().product(ib, g).expect("transport exists");
                if self.hat[q].per_sector[g].dim() == 0 {
                    continue;
                }
                let lhs = t_b.mul(&nq.per_sector[bg]);
                let term1 = nq.per_sector[g].mul(&Matrix::identity(f1b).kron(&t_b));
                let term2 = a_row.kron(&t_b);
                let rhs = term1.add(&term2);
                if lhs != rhs {
                    return Err(FibrationError::Internal(format!(
                        "∇_{q} violates the Leibniz rule at sector {} under base {}",
                        total.sectors().display(g),
                        base.sectors().display(b)
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Build the base-side connection module for the classes of one orbit
    /// (requires the freeness certificate).
    fn orbit_base_module(
        &self,
        nq: &NablaQ,
        orbit: &Orbit,
        rank: usize,
    ) -> Result<ConnectionModule, FibrationError> {
        let base = self.fd.base();
        let f1b = base.fdim(1);
        let rep = orbit.representative;
        let mat = &nq.per_sector[rep];
        let mut nabla_basis = Vec::with_capacity(rank);
        for c in 0..rank {
            let mut v = vec![Scalar::zero(); f1b * rank];
            for i in 0..f1b {
                for cc in 0..rank {
                    v[i * rank + cc] = mat[(c, i * rank + cc)].clone();
                }
            }
            let mut elem = ModElement::zero(1, rank);
            elem.add_component(base.sectors().unit(), v);
            nabla_basis.push(elem);
        }
        Ok(ConnectionModule::new(
            Arc::clone(base),
            rank,
            nabla_basis,
        )?)
    }

    /// Curvature of `∇_q` over the base calculus: must be exactly zero.
    pub fn nabla_q_curvature(&self, q: usize, nq: &NablaQ) -> Result<bool, FibrationError> {
        let Some(cert) = &self.hat[q].free_certificate else {
            return Err(FibrationError::Internal(
                "curvature of ∇_q needs the freeness certificate".into(),
            ));
        };
        for &(oi, rank) in &cert.orbit_ranks {
            let orbit = &self.hat[q].orbits[oi];
            let module = self.orbit_base_module(nq, orbit, rank)?;
            let report = module.curvature()?;
            if !report.is_flat {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The theorem-route second page `H^p(B; Ĥ_q, ∇_q)`.
    pub fn second_page(&self) -> Result<SecondPage, FibrationError> {
        let total = self.fd.total();
        let mut grid = BTreeMap::new();
        let mut per_total_sector = BTreeMap::new();
        let mut clipped = 0usize;
        let mut complete = true;
        for q in 0..=self.top {
            let hat = &self.hat[q];
            let Some(cert) = &hat.free_certificate else {
                if hat.total_dim() > 0 {
                    complete = false;
                }
                continue;
            };
            let nq = self.nabla_q(q)?;
            for &(oi, rank) in &cert.orbit_ranks {
                let orbit = &hat.orbits[oi];
                let module = self.orbit_base_module(&nq, orbit, rank)?;
                let sheaf = module.sheaf_cohomology().map_err(|e| match e {
                    DgaError::NotFlat { witness } => FibrationError::Internal(format!(
                        "∇_{q} has nonzero curvature: {witness}"
                    )),
                    other => FibrationError::Dga(other),
                })?;
                for &(j, ref h) in sheaf.per_sector() {
                    for (p, d) in h.dims().into_iter().enumerate() {
                        if d == 0 {
                            continue;
                        }
                        *grid.entry((p, q)).or_insert(0) += d;
                        // push base sector j over the orbit representative
                        let ij = self.fd.iota().sector_image(j);
                        match total.sectors().product(ij, orbit.representative) {
                            Some(g) => {
                                *per_total_sector.entry((p, q, g)).or_insert(0) += d;
                            }
                            None => clipped += d,
                        }
                    }
                }
            }
        }
        // make the grid total over the window of (p, q)
        for p in 0..=self.base_top {
            for q in 0..=self.top.saturating_sub(p) {
                grid.entry((p, q)).or_insert(0);
            }
        }
        Ok(SecondPage {
            grid,
            per_total_sector,
            clipped,
            complete,
        })
    }

    /// Run the generic engine on every sector complex.
    pub fn engine_runs(&self) -> Result<Vec<specseq::SpectralRun>, FibrationError> {
        self.filtered
            .iter()
            .map(|fc| specseq::run(fc).map_err(FibrationError::Complex))
            .collect()
    }

    /// Aggregate page dims over sectors.
    pub fn aggregate_page_dims(
        runs: &[specseq::SpectralRun],
        r: usize,
    ) -> BTreeMap<(usize, usize), usize> {
        let mut out = BTreeMap::new();
        for run in runs {
            for (k, d) in run.page(r).dims() {
                *out.entry(k).or_insert(0) += d;
            }
        }
        out
    }

    pub fn aggregate_limit_dims(runs: &[specseq::SpectralRun]) -> BTreeMap<(usize, usize), usize> {
        let mut out = BTreeMap::new();
        for run in runs {
            for (&k, &d) in &run.limit {
                *out.entry(k).or_insert(0) += d;
            }
        }
        out
    }

    /// Full two-route comparison: E₁ against `Ω^p B ⊗ Ĥ_q` cellwise and
    /// sectorwise, E₂ against the theorem route, the engine's own
    /// convergence identity, and E_∞ totals against sheaf cohomology.
    pub fn cross_check(&self, runs: &[specseq::SpectralRun]) -> Result<CrossCheck, FibrationError> {
        let base = self.fd.base();
        // (a) E1 vs theorem
        let mut e1_mismatches = Vec::new();
        for (g, run) in runs.iter().enumerate() {
            let page1 = run.page(1);
            for p in 0..=self.top {
                for q in 0..=self.top - p {
                    let engine = page1.cell_dim(p, q);
                    let theorem = base.fdim(p) * self.hat[q].per_sector[g].dim();
                    if engine != theorem {
                        e1_mismatches.push((p, q, g, engine, theorem));
                    }
                }
            }
        }
        // (b) E2 vs second page
        let second = self.second_page()?;
        let engine_e2 = Self::aggregate_page_dims(runs, 2);
        let mut e2_mismatches = Vec::new();
        for p in 0..=self.top {
            for q in 0..=self.top - p {
                let engine = engine_e2.get(&(p, q)).copied().unwrap_or(0);
                let theorem = second.grid.get(&(p, q)).copied().unwrap_or(0);
                if engine != theorem {
                    e2_mismatches.push((p, q, engine, theorem));
                }
            }
        }
        let mut e2_sector_mismatches = Vec::new();
        if second.complete && second.clipped == 0 {
            for (g, run) in runs.iter().enumerate() {
                let page2 = run.page(2);
                for p in 0..=self.top {
                    for q in 0..=self.top - p {
                        let engine = page2.cell_dim(p, q);
                        let theorem = second
                            .per_total_sector
                            .get(&(p, q, g))
                            .copied()
                            .unwrap_or(0);
                        if engine != theorem {
                            e2_sector_mismatches.push((p, q, g, engine, theorem));
                        }
                    }
                }
            }
        }
        // (c) engine convergence and sheaf comparison
        let mut convergence_ok = true;
        for (g, run) in runs.iter().enumerate() {
            let report = specseq::convergence_check(&self.filtered[g], run)?;
            if !report.ok() {
                convergence_ok = false;
            }
        }
        let limit = Self::aggregate_limit_dims(runs);
        let mut einf_totals = vec![0usize; self.top + 1];
        for (&(p, q), &d) in &limit {
            if p + q <= self.top {
                einf_totals[p + q] += d;
            }
        }
        let sheaf = self.fd.module().sheaf_cohomology()?;
        Ok(CrossCheck {
            e1_mismatches,
            e2_mismatches,
            e2_sector_mismatches,
            convergence_ok,
            einf_totals,
            sheaf_dims: sheaf.dims().to_vec(),
            clipped: second.clipped,
        })
    }

    pub fn factor_pairs(&self, g: SectorId) -> &[(SectorId, SectorId)] {
        &self.factors[g]
    }
}

/// Span of `ι_*ξ ∧ x` at the frame level for one total sector.
fn build_d_space(
    fd: &FibrationData,
    factors: &[Vec<(SectorId, SectorId)>],
    p: usize,
    q: usize,
    g: SectorId,
    ambient: usize,
) -> Subspace {
    let base = fd.base();
    let total = fd.total();
    if p > base.top_degree() || base.fdim(p) == 0 {
        return Subspace::zero(ambient);
    }
    let mut rows = Vec::new();
    for &(_b, gp) in &factors[g] {
        for i in 0..base.fdim(p) {
            let mut xi = vec![Scalar::zero(); base.fdim(p)];
            xi[i] = num::one();
            let mapped = row_times_matrix(&xi, fd.iota().frame_matrix(p));
            let moved = row_times_matrix(&mapped, &total.conj_matrix(gp, p));
            for j in 0..total.fdim(q) {
                let mut tau = vec![Scalar::zero(); total.fdim(q)];
                tau[j] = num::one();
                rows.push(total.wedge_table().wedge_vectors(p, &moved, q, &tau));
            }
        }
    }
    Subspace::from_rows(ambient, rows)
}

/// Orbits of the total sector set under left multiplication by base-image
/// sectors; representatives minimise (L1 coordinate norm, sector index).
pub(crate) fn compute_orbits(fd: &FibrationData) -> Vec<Orbit> {
    let total = fd.total();
    let base = fd.base();
    let n = total.sectors().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for b in base.sectors().ids() {
        let ib = fd.iota().sector_image(b);
        for g in total.sectors().ids() {
            if let Some(bg) = total.sectors().product(ib, g) {
                let (rg, rbg) = (find(&mut parent, g), find(&mut parent, bg));
                if rg != rbg {
                    parent[rg.max(rbg)] = rg.min(rbg);
                }
            }
        }
    }
    let mut buckets: BTreeMap<usize, Vec<SectorId>> = BTreeMap::new();
    for g in 0..n {
        let root = find(&mut parent, g);
        buckets.entry(root).or_default().push(g);
    }
    let norm = |g: SectorId| -> (i64, SectorId) {
        let c = total.sectors().coords(g);
        (c.iter().map(|x| x.abs()).sum(), g)
    };
    buckets
        .into_values()
        .map(|members| {
            let representative = members
                .iter()
                .copied()
                .min_by_key(|&g| norm(g))
                .expect("orbit non-empty");
            Orbit {
                members,
                representative,
            }
        })
        .collect()
}
