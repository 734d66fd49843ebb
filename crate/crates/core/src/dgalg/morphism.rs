use std::sync::Arc;

use super::dga::{AxiomFailure, SectorDga};
use super::element::AlgElement;
use super::sector::SectorId;
use super::DgaError;
use crate::exactlin::{row_times_matrix, Matrix};

/// A map of differential graded algebras `source → target`, given by a
/// sector map and per-degree frame matrices: `g · ω ↦ σ(g) · (ω ⋅ F_n)`.
#[derive(Clone, Debug)]
pub struct DgaMorphism {
    source: Arc<SectorDga>,
    target: Arc<SectorDga>,
    sector_map: Vec<SectorId>,
    frame_map: Vec<Matrix>,
}

impl DgaMorphism {
    pub fn new(
        source: Arc<SectorDga>,
        target: Arc<SectorDga>,
        sector_map: Vec<SectorId>,
        frame_map: Vec<Matrix>,
    ) -> Result<Self, DgaError> {
        if sector_map.len() != source.sectors().len() {
            return Err(DgaError::Shape("sector map length mismatch".into()));
        }
        if frame_map.len() != source.top_degree() + 1 {
            return Err(DgaError::Shape("frame map degree count mismatch".into()));
        }
        for (n, f) in frame_map.iter().enumerate() {
            if f.rows() != source.fdim(n) || f.cols() != target.fdim(n) {
                return Err(DgaError::Shape(format!(
                    "frame map at degree {n} has shape {}x{}",
                    f.rows(),
                    f.cols()
                )));
            }
        }
        Ok(DgaMorphism {
            source,
            target,
            sector_map,
            frame_map,
        })
    }

    pub fn identity(dga: Arc<SectorDga>) -> Self {
        let sector_map = dga.sectors().ids().collect();
        let frame_map = (0..=dga.top_degree())
            .map(|n| Matrix::identity(dga.fdim(n)))
            .collect();
        DgaMorphism {
            source: Arc::clone(&dga),
            target: dga,
            sector_map,
            frame_map,
        }
    }

    pub fn source(&self) -> &Arc<SectorDga> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SectorDga> {
        &self.target
    }

    pub fn sector_image(&self, g: SectorId) -> SectorId {
        self.sector_map[g]
    }

    pub fn frame_matrix(&self, n: usize) -> &Matrix {
        &self.frame_map[n]
    }

    pub fn apply(&self, x: &AlgElement) -> AlgElement {
        let n = x.degree;
        let mut out = AlgElement::zero(n);
        if n > self.source.top_degree() {
            return out;
        }
        for (&g, v) in &x.comps {
            out.add_component(self.sector_map[g], row_times_matrix(v, &self.frame_map[n]));
        }
        out
    }

    /// Check unitality, that the sector map is a homomorphism of the window
    /// tables, `d ι_* = ι_* d`, and `ι_* ∧ = ∧ (ι_* ⊗ ι_*)` on all in-window
    /// pairs (vectorised over the frame).
    pub fn validate(&self) -> Vec<AxiomFailure> {
        let mut failures = Vec::new();
        let src = &self.source;
        let tgt = &self.target;
        let top = src.top_degree();

        if self.sector_map[src.sectors().unit()] != tgt.sectors().unit() {
            failures.push(AxiomFailure {
                check: "morphism-unital",
                witness: "unit sector image".into(),
            });
        }

        // sector homomorphism wherever the source product is defined
        for (g, h) in src.sectors().in_window_pairs() {
            let p = src.sectors().product(g, h).expect("in-window pair");
            match tgt
                .sectors()
                .product(self.sector_map[g], self.sector_map[h])
            {
                Some(q) if q == self.sector_map[p] => {}
                Some(_) => {
                    failures.push(AxiomFailure {
                        check: "morphism-sector-homomorphism",
                        witness: format!(
                            "({}, {})",
                            src.sectors().display(g),
                            src.sectors().display(h)
                        ),
                    });
                }
                None => {
                    failures.push(AxiomFailure {
                        check: "morphism-window-mismatch",
                        witness: format!(
                            "({}, {})",
                            src.sectors().display(g),
                            src.sectors().display(h)
                        ),
                    });
                }
            }
        }

        // d-intertwining per sector: D^src_g · F_{n+1} = F_n · D^tgt_{σg}
        for g in src.sectors().ids() {
            for n in 0..top {
                let lhs = src.d_matrix(g, n).mul(&self.frame_map[n + 1]);
                let rhs = self.frame_map[n]
                    .mul(&tgt.d_matrix(self.sector_map[g], n));
                if lhs != rhs {
                    failures.push(AxiomFailure {
                        check: "morphism-d-intertwining",
                        witness: format!("sector {} degree {n}", src.sectors().display(g)),
                    });
                }
            }
        }

        // wedge intertwining, as matrices on ω ⊗ τ. The identity depends on
        // the right factor's sector only, so quantify over single sectors.
        'sectors: for h in src.sectors().ids() {
            for r in 0..=top {
                for m in 0..=top - r {
                    let lhs = src
                        .conj_matrix(h, r)
                        .kron(&Matrix::identity(src.fdim(m)))
                        .mul(&src.wedge_table().matrix(r, m))
                        .mul(&self.frame_map[r + m]);
                    let rhs = self.frame_map[r]
                        .mul(&tgt.conj_matrix(self.sector_map[h], r))
                        .kron(&self.frame_map[m])
                        .mul(&tgt.wedge_table().matrix(r, m));
                    if lhs != rhs {
                        failures.push(AxiomFailure {
                            check: "morphism-wedge-intertwining",
                            witness: format!(
                                "sector {} degrees ({r},{m})",
                                src.sectors().display(h)
                            ),
                        });
                        break 'sectors;
                    }
                }
            }
        }

        failures
    }
}
