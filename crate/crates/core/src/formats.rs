//! The `complex.v1` and `dga.v1` JSON file formats.
//!
//! Rationals serialise as strings, `"p/q"` or `"n"` when integral; matrices
//! are lists of rows. A `complex.v1` file carries per-degree dimensions,
//! differentials, optional basis labels and an optional filtration (levels
//! `m ≥ 1`; level 0 is always the whole space). A `dga.v1` file carries the
//! sector table, frame, per-sector conjugation and differential matrices,
//! the frame wedge constants as sparse triplets, and optional morphism and
//! module blocks for the fibration pipeline.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::{CochainComplex, ComplexDefect, FilteredComplex, Filtration};
use crate::dgalg::{
    ConnectionModule, DgaError, DgaMorphism, FrameWedge, ModElement, SectorDga, SectorSet,
};
use crate::exactlin::{format_scalar, parse_scalar, LinError, Matrix, Scalar, Subspace};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unrecognised format tag `{0}` (expected complex.v1 or dga.v1)")]
    UnknownFormat(String),
    #[error("{0}")]
    Malformed(String),
    #[error(transparent)]
    Scalar(#[from] LinError),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Complex(#[from] ComplexDefect),
    #[error(transparent)]
    Dga(#[from] DgaError),
}

type MatrixRows = Vec<Vec<String>>;

fn matrix_to_rows(m: &Matrix) -> MatrixRows {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(format_scalar).collect())
        .collect()
}

fn matrix_from_rows(rows: &MatrixRows, want_cols: usize) -> Result<Matrix, FormatError> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != want_cols {
            return Err(FormatError::Malformed(format!(
                "row has {} entries, expected {}",
                row.len(),
                want_cols
            )));
        }
        let parsed: Result<Vec<Scalar>, _> = row.iter().map(|s| parse_scalar(s)).collect();
        out.push(parsed?);
    }
    Ok(Matrix::from_rows(want_cols, out))
}

#[derive(Serialize, Deserialize)]
pub struct ComplexV1 {
    pub format: String,
    pub dims: Vec<usize>,
    pub d: Vec<MatrixRows>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<String>>>,
    /// filtration levels m = 1..=depth; each level holds one basis matrix
    /// per degree
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtration: Option<Vec<Vec<MatrixRows>>>,
}

impl ComplexV1 {
    pub fn from_complex(c: &CochainComplex, filtration: Option<&Filtration>) -> Self {
        let d = (0..c.dims().len())
            .map(|n| matrix_to_rows(&c.diff(n as i64)))
            .collect();
        let filtration = filtration.map(|f| {
            (1..=f.depth())
                .map(|m| {
                    (0..c.dims().len())
                        .map(|n| matrix_to_rows(f.stored(m, n).basis()))
                        .collect()
                })
                .collect()
        });
        ComplexV1 {
            format: "complex.v1".into(),
            dims: c.dims().to_vec(),
            d,
            labels: c.labels().cloned(),
            filtration,
        }
    }

    pub fn to_complex(&self) -> Result<(CochainComplex, Option<Filtration>), LoadError> {
        if self.d.len() != self.dims.len() {
            return Err(FormatError::Malformed(format!(
                "{} differentials for {} degrees",
                self.d.len(),
                self.dims.len()
            ))
            .into());
        }
        let degrees = self.dims.len();
        let mut d = Vec::with_capacity(degrees);
        for n in 0..degrees {
            let want_cols = if n + 1 < degrees { self.dims[n + 1] } else { 0 };
            let m = matrix_from_rows(&self.d[n], want_cols)?;
            if m.rows() != self.dims[n] {
                return Err(FormatError::Malformed(format!(
                    "differential at degree {n} has {} rows, expected {}",
                    m.rows(),
                    self.dims[n]
                ))
                .into());
            }
            d.push(m);
        }
        let mut complex = CochainComplex::new(self.dims.clone(), d)?;
        if let Some(labels) = &self.labels {
            complex = complex.with_labels(labels.clone());
        }
        let filtration = match &self.filtration {
            None => None,
            Some(levels) => {
                let full: Vec<Subspace> =
                    self.dims.iter().map(|&k| Subspace::full(k)).collect();
                let mut all = vec![full];
                for (mi, level) in levels.iter().enumerate() {
                    if level.len() != degrees {
                        return Err(FormatError::Malformed(format!(
                            "filtration level {} has {} degrees, expected {}",
                            mi + 1,
                            level.len(),
                            degrees
                        ))
                        .into());
                    }
                    let mut per_degree = Vec::with_capacity(degrees);
                    for (n, rows) in level.iter().enumerate() {
                        let m = matrix_from_rows(rows, self.dims[n])?;
                        per_degree.push(Subspace::from_matrix(self.dims[n], m));
                    }
                    all.push(per_degree);
                }
                Some(Filtration::new(all))
            }
        };
        Ok((complex, filtration))
    }
}

#[derive(Serialize, Deserialize)]
pub struct WedgeTriplet {
    pub degrees: (usize, usize),
    pub left: usize,
    pub right: usize,
    pub terms: Vec<(usize, String)>,
}

#[derive(Serialize, Deserialize)]
pub struct MorphismBlock {
    pub base: Box<DgaV1>,
    pub sector_map: Vec<usize>,
    pub frame_map: Vec<MatrixRows>,
}

#[derive(Serialize, Deserialize)]
pub struct ModuleBlock {
    pub rank: usize,
    /// per basis element: sparse entries (sector, frame index, target basis
    /// index, coefficient)
    pub nabla: Vec<Vec<(usize, usize, usize, String)>>,
}

#[derive(Serialize, Deserialize)]
pub struct DgaV1 {
    pub format: String,
    pub name: String,
    pub windowed: bool,
    pub coords: Vec<String>,
    pub sectors: Vec<Vec<i64>>,
    /// sparse product triplets (a, b, a·b)
    pub product: Vec<(usize, usize, usize)>,
    pub frame: Vec<Vec<String>>,
    pub frame_wedge: Vec<WedgeTriplet>,
    /// per sector, per degree
    pub conj: Vec<Vec<MatrixRows>>,
    pub d: Vec<Vec<MatrixRows>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub module: Option<ModuleBlock>,
}

impl DgaV1 {
    pub fn from_dga(dga: &SectorDga) -> Self {
        let n = dga.sectors().len();
        let mut product = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(p) = dga.sectors().product(a, b) {
                    product.push((a, b, p));
                }
            }
        }
        let top = dga.top_degree();
        let mut frame_wedge = Vec::new();
        for r in 0..=top {
            for m in 0..=top - r {
                for i in 0..dga.fdim(r) {
                    for j in 0..dga.fdim(m) {
                        let terms = dga.wedge_table().product(r, i, m, j);
                        if !terms.is_empty() {
                            frame_wedge.push(WedgeTriplet {
                                degrees: (r, m),
                                left: i,
                                right: j,
                                terms: terms
                                    .iter()
                                    .map(|(k, c)| (*k, format_scalar(c)))
                                    .collect(),
                            });
                        }
                    }
                }
            }
        }
        let conj = (0..n)
            .map(|g| {
                (0..=top)
                    .map(|deg| matrix_to_rows(&dga.conj_matrix(g, deg)))
                    .collect()
            })
            .collect();
        let d = (0..n)
            .map(|g| {
                (0..=top)
                    .map(|deg| matrix_to_rows(&dga.d_matrix(g, deg)))
                    .collect()
            })
            .collect();
        DgaV1 {
            format: "dga.v1".into(),
            name: dga.name().to_owned(),
            windowed: dga.sectors().windowed(),
            coords: dga.sectors().coord_names().to_vec(),
            sectors: (0..n).map(|g| dga.sectors().coords(g).to_vec()).collect(),
            product,
            frame: dga.frame_labels().to_vec(),
            frame_wedge,
            conj,
            d,
            morphism: None,
            module: None,
        }
    }

    pub fn with_morphism(mut self, m: &DgaMorphism) -> Self {
        self.morphism = Some(MorphismBlock {
            base: Box::new(DgaV1::from_dga(m.source())),
            sector_map: m.source().sectors().ids().map(|g| m.sector_image(g)).collect(),
            frame_map: (0..=m.source().top_degree())
                .map(|n| matrix_to_rows(m.frame_matrix(n)))
                .collect(),
        });
        self
    }

    pub fn with_module(mut self, module: &ConnectionModule) -> Self {
        let rank = module.rank();
        let nabla = module
            .nabla_basis()
            .iter()
            .map(|elem| {
                let mut entries = Vec::new();
                for (&g, v) in &elem.comps {
                    for (idx, c) in v.iter().enumerate() {
                        if !num::Zero::is_zero(c) {
                            entries.push((g, idx / rank, idx % rank, format_scalar(c)));
                        }
                    }
                }
                entries
            })
            .collect();
        self.module = Some(ModuleBlock { rank, nabla });
        self
    }

    pub fn to_dga(&self) -> Result<Arc<SectorDga>, LoadError> {
        let n = self.sectors.len();
        let mut table = vec![None; n * n];
        for &(a, b, p) in &self.product {
            if a >= n || b >= n || p >= n {
                return Err(FormatError::Malformed("product index out of range".into()).into());
            }
            table[a * n + b] = Some(p);
        }
        let sectors = SectorSet::from_table(
            self.coords.clone(),
            self.sectors.clone(),
            table,
            self.windowed,
        );
        let dims: Vec<usize> = self.frame.iter().map(|f| f.len()).collect();
        let top = dims.len() - 1;
        // rebuild the wedge tables
        let mut tables: Vec<Vec<Vec<Vec<(usize, Scalar)>>>> = Vec::with_capacity(top + 1);
        for r in 0..=top {
            let mut per_m = Vec::new();
            for m in 0..=top {
                per_m.push(vec![Vec::new(); dims[r] * dims.get(m).copied().unwrap_or(0)]);
            }
            tables.push(per_m);
        }
        for t in &self.frame_wedge {
            let (r, m) = t.degrees;
            if r > top || m > top || t.left >= dims[r] || t.right >= dims[m] {
                return Err(FormatError::Malformed("wedge triplet out of range".into()).into());
            }
            let terms: Result<Vec<(usize, Scalar)>, FormatError> = t
                .terms
                .iter()
                .map(|(k, s)| Ok((*k, parse_scalar(s)?)))
                .collect();
            tables[r][m][t.left * dims[m] + t.right] = terms?;
        }
        let wedge = FrameWedge::new(dims.clone(), tables);
        let parse_per_sector = |data: &Vec<Vec<MatrixRows>>,
                                cols_of: &dyn Fn(usize) -> usize|
         -> Result<Vec<Vec<Matrix>>, FormatError> {
            data.iter()
                .map(|per_degree| {
                    per_degree
                        .iter()
                        .enumerate()
                        .map(|(deg, rows)| matrix_from_rows(rows, cols_of(deg)))
                        .collect()
                })
                .collect()
        };
        let conj = parse_per_sector(&self.conj, &|deg| dims.get(deg).copied().unwrap_or(0))?;
        let d = parse_per_sector(&self.d, &|deg| {
            if deg < top {
                dims[deg + 1]
            } else {
                0
            }
        })?;
        Ok(Arc::new(SectorDga::new(
            self.name.clone(),
            sectors,
            self.frame.clone(),
            wedge,
            conj,
            d,
        )?))
    }

    pub fn to_morphism(&self, target: &Arc<SectorDga>) -> Result<Option<DgaMorphism>, LoadError> {
        let Some(block) = &self.morphism else {
            return Ok(None);
        };
        let base = block.base.to_dga()?;
        let frame_map: Result<Vec<Matrix>, FormatError> = block
            .frame_map
            .iter()
            .enumerate()
            .map(|(deg, rows)| matrix_from_rows(rows, target.fdim(deg)))
            .collect();
        Ok(Some(DgaMorphism::new(
            base,
            Arc::clone(target),
            block.sector_map.clone(),
            frame_map?,
        )?))
    }

    pub fn to_module(&self, dga: &Arc<SectorDga>) -> Result<Option<ConnectionModule>, LoadError> {
        let Some(block) = &self.module else {
            return Ok(None);
        };
        let rank = block.rank;
        let mut nabla = Vec::with_capacity(block.nabla.len());
        for entries in &block.nabla {
            let mut elem = ModElement::zero(1, rank);
            let mut per_sector: std::collections::BTreeMap<usize, Vec<Scalar>> =
                std::collections::BTreeMap::new();
            for (g, frame_j, t2, coeff) in entries {
                let v = per_sector
                    .entry(*g)
                    .or_insert_with(|| vec![num::Zero::zero(); dga.fdim(1) * rank]);
                if frame_j * rank + t2 >= v.len() {
                    return Err(
                        FormatError::Malformed("module entry out of range".into()).into()
                    );
                }
                v[frame_j * rank + t2] = parse_scalar(coeff).map_err(FormatError::Scalar)?;
            }
            for (g, v) in per_sector {
                elem.add_component(g, v);
            }
            nabla.push(elem);
        }
        Ok(Some(ConnectionModule::new(Arc::clone(dga), rank, nabla)?))
    }
}

/// Anything a `validate` run may be handed.
pub enum LoadedInput {
    Complex {
        complex: CochainComplex,
        filtration: Option<Filtration>,
    },
    Dga {
        dga: Arc<SectorDga>,
        morphism: Option<DgaMorphism>,
        module: Option<ConnectionModule>,
    },
}

/// Parse either format from JSON text, keyed on the `format` tag.
pub fn load_input(text: &str) -> Result<LoadedInput, LoadError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(FormatError::Json)?;
    let tag = value
        .get("format")
        .and_then(|v| v.as_str())
        .unwrap_or_default()
        .to_owned();
    match tag.as_str() {
        "complex.v1" => {
            let parsed: ComplexV1 = serde_json::from_value(value).map_err(FormatError::Json)?;
            let (complex, filtration) = parsed.to_complex()?;
            Ok(LoadedInput::Complex {
                complex,
                filtration,
            })
        }
        "dga.v1" => {
            let parsed: DgaV1 = serde_json::from_value(value).map_err(FormatError::Json)?;
            let dga = parsed.to_dga()?;
            let morphism = parsed.to_morphism(&dga)?;
            let module = parsed.to_module(&dga)?;
            Ok(LoadedInput::Dga {
                dga,
                morphism,
                module,
            })
        }
        other => Err(FormatError::UnknownFormat(other.to_owned()).into()),
    }
}

pub fn complex_to_json(c: &CochainComplex, filtration: Option<&Filtration>) -> String {
    serde_json::to_string_pretty(&ComplexV1::from_complex(c, filtration))
        .expect("serialisation cannot fail")
}

pub fn filtered_to_json(fc: &FilteredComplex) -> String {
    complex_to_json(&fc.complex, Some(&fc.filtration))
}

pub fn dga_to_json(v: &DgaV1) -> String {
    serde_json::to_string_pretty(v).expect("serialisation cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::int;

    #[test]
    fn complex_round_trip_with_filtration() {
        let d0 = Matrix::from_int_rows(2, &[&[0, 1], &[0, 0]]);
        let c = CochainComplex::new(vec![2, 2], vec![d0, Matrix::zero(2, 0)]).unwrap();
        let f = Filtration::trivial(&c);
        let text = complex_to_json(&c, Some(&f));
        match load_input(&text).unwrap() {
            LoadedInput::Complex {
                complex,
                filtration,
            } => {
                assert_eq!(complex.dims(), &[2, 2]);
                assert_eq!(complex.diff(0)[(0, 1)], int(1));
                assert_eq!(filtration.unwrap().depth(), 1);
            }
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn zero_denominator_is_a_parse_error() {
        let text = r#"{"format":"complex.v1","dims":[1,1],"d":[[["1/0"]],[[]]],"labels":null}"#;
        assert!(matches!(
            load_input(text),
            Err(LoadError::Format(FormatError::Scalar(_)))
        ));
    }

    #[test]
    fn unknown_format_rejected() {
        assert!(matches!(
            load_input(r#"{"format":"nope.v9"}"#),
            Err(LoadError::Format(FormatError::UnknownFormat(_)))
        ));
    }

    #[test]
    fn dga_round_trip() {
        let dga = crate::models::circle(2);
        let v = DgaV1::from_dga(&dga);
        let text = dga_to_json(&v);
        match load_input(&text).unwrap() {
            LoadedInput::Dga { dga: loaded, .. } => {
                assert_eq!(loaded.sectors().len(), 5);
                assert!(loaded.check_axioms().ok());
                assert_eq!(loaded.de_rham_dims(), vec![1, 1]);
            }
            _ => panic!("wrong variant"),
        }
    }
}
