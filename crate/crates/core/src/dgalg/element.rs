use num::Zero;
use std::collections::BTreeMap;

use super::sector::SectorId;
use crate::exactlin::Scalar;

/// A homogeneous algebra element: per-sector coefficient vectors over the
/// degree-`degree` frame basis. Zero component vectors are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgElement {
    pub degree: usize,
    pub comps: BTreeMap<SectorId, Vec<Scalar>>,
}

impl AlgElement {
    pub fn zero(degree: usize) -> Self {
        AlgElement {
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn basis(degree: usize, sector: SectorId, frame_index: usize, fdim: usize) -> Self {
        let mut v = vec![Scalar::zero(); fdim];
        v[frame_index] = num::One::one();
        let mut comps = BTreeMap::new();
        comps.insert(sector, v);
        AlgElement { degree, comps }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add_component(&mut self, sector: SectorId, vec: Vec<Scalar>) {
        if vec.iter().all(|x| x.is_zero()) {
            return;
        }
        match self.comps.get_mut(&sector) {
            Some(existing) => {
                for (a, b) in existing.iter_mut().zip(vec) {
                    *a += b;
                }
                if existing.iter().all(|x| x.is_zero()) {
                    self.comps.remove(&sector);
                }
            }
            None => {
                self.comps.insert(sector, vec);
            }
        }
    }

    pub fn add(&self, other: &AlgElement) -> AlgElement {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (&g, v) in &other.comps {
            out.add_component(g, v.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> AlgElement {
        if s.is_zero() {
            return AlgElement::zero(self.degree);
        }
        let comps = self
            .comps
            .iter()
            .map(|(&g, v)| (g, v.iter().map(|x| x * s).collect()))
            .collect();
        AlgElement {
            degree: self.degree,
            comps,
        }
    }

    pub fn sub(&self, other: &AlgElement) -> AlgElement {
        self.add(&other.scale(&-num::BigRational::from_integer(1.into())))
    }
}

/// A homogeneous element of `Ω^degree A ⊗_A E` for a free module of the given
/// rank: per-sector vectors indexed by `(frame i, module t) ↦ i·rank + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModElement {
    pub degree: usize,
    pub rank: usize,
    pub comps: BTreeMap<SectorId, Vec<Scalar>>,
}

impl ModElement {
    pub fn zero(degree: usize, rank: usize) -> Self {
        ModElement {
            degree,
            rank,
            comps: BTreeMap::new(),
        }
    }

    pub fn basis(
        degree: usize,
        rank: usize,
        sector: SectorId,
        frame_index: usize,
        module_index: usize,
        fdim: usize,
    ) -> Self {
        let mut v = vec![Scalar::zero(); fdim * rank];
        v[frame_index * rank + module_index] = num::One::one();
        let mut comps = BTreeMap::new();
        comps.insert(sector, v);
        ModElement {
            degree,
            rank,
            comps,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add_component(&mut self, sector: SectorId, vec: Vec<Scalar>) {
        if vec.iter().all(|x| x.is_zero()) {
            return;
        }
        match self.comps.get_mut(&sector) {
            Some(existing) => {
                for (a, b) in existing.iter_mut().zip(vec) {
                    *a += b;
                }
                if existing.iter().all(|x| x.is_zero()) {
                    self.comps.remove(&sector);
                }
            }
            None => {
                self.comps.insert(sector, vec);
            }
        }
    }

    pub fn add(&self, other: &ModElement) -> ModElement {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        assert_eq!(self.rank, other.rank, "rank mismatch");
        let mut out = self.clone();
        for (&g, v) in &other.comps {
            out.add_component(g, v.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> ModElement {
        if s.is_zero() {
            return ModElement::zero(self.degree, self.rank);
        }
        let comps = self
            .comps
            .iter()
            .map(|(&g, v)| (g, v.iter().map(|x| x * s).collect()))
            .collect();
        ModElement {
            degree: self.degree,
            rank: self.rank,
            comps,
        }
    }

    pub fn sub(&self, other: &ModElement) -> ModElement {
        self.add(&other.scale(&-num::BigRational::from_integer(1.into())))
    }

    /// Per-module-index slices of a sector component: the `t`-th frame vector.
    pub fn frame_vector(v: &[Scalar], rank: usize, t: usize) -> Vec<Scalar> {
        let fdim = v.len() / rank;
        (0..fdim).map(|i| v[i * rank + t].clone()).collect()
    }
}
