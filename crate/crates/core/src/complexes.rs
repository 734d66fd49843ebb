//! Cochain complexes over ℚ, their cohomology, and bounded decreasing
//! filtrations preserved by the differential.

use thiserror::Error;

use crate::exactlin::{
    induced_map, intersect, sum, LinError, Matrix, QuotientPresentation, Scalar, Subspace,
};

/// A bounded cochain complex: spaces `C^0 … C^max_degree` with differentials
/// `d_n : C^n → C^{n+1}` (as `dims[n] × dims[n+1]` matrices, rows acting on
/// the left) satisfying `d∘d = 0`. Degrees outside the range are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    dims: Vec<usize>,
    d: Vec<Matrix>,
    basis_labels: Option<Vec<Vec<String>>>,
}

/// A defect found while validating a complex or filtration; carries enough
/// of a witness to locate the failure.
#[derive(Debug, Clone, Error)]
pub enum ComplexDefect {
    #[error("d∘d ≠ 0 at degree {degree}: basis vector {basis_index} has nonzero image")]
    NotSquareZero { degree: usize, basis_index: usize },
    #[error("differential at degree {degree} has shape {got_rows}x{got_cols}, expected {want_rows}x{want_cols}")]
    ShapeMismatch {
        degree: usize,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("filtration level {level} at degree {degree} is not d-stable; witness {witness:?}")]
    NotDStable {
        level: usize,
        degree: usize,
        witness: Vec<Scalar>,
    },
    #[error("filtration is not decreasing at (m={level}, n={degree}); witness {witness:?}")]
    NotDecreasing {
        level: usize,
        degree: usize,
        witness: Vec<Scalar>,
    },
    #[error("boundedness violated at (m={level}, n={degree}): expected {expected}")]
    NotBounded {
        level: usize,
        degree: usize,
        expected: &'static str,
    },
    #[error("filtration shape: level {level} degree {degree} lives in ambient {got}, complex has dim {want}")]
    FiltrationShape {
        level: usize,
        degree: usize,
        got: usize,
        want: usize,
    },
    #[error(transparent)]
    Lin(#[from] LinError),
}

impl CochainComplex {
    pub fn new(dims: Vec<usize>, d: Vec<Matrix>) -> Result<Self, ComplexDefect> {
        let c = CochainComplex {
            dims,
            d,
            basis_labels: None,
        };
        c.check_shapes()?;
        Ok(c)
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Self {
        self.basis_labels = Some(labels);
        self
    }

    fn check_shapes(&self) -> Result<(), ComplexDefect> {
        if self.d.len() != self.dims.len() {
            return Err(ComplexDefect::ShapeMismatch {
                degree: self.d.len(),
                got_rows: 0,
                got_cols: 0,
                want_rows: self.dims.len(),
                want_cols: 0,
            });
        }
        for n in 0..self.dims.len() {
            let want_cols = self.dim(n as i64 + 1);
            let m = &self.d[n];
            if m.rows() != self.dims[n] || m.cols() != want_cols {
                return Err(ComplexDefect::ShapeMismatch {
                    degree: n,
                    got_rows: m.rows(),
                    got_cols: m.cols(),
                    want_rows: self.dims[n],
                    want_cols,
                });
            }
        }
        Ok(())
    }

    pub fn max_degree(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension at a possibly out-of-range degree.
    pub fn dim(&self, n: i64) -> usize {
        if n < 0 || n as usize >= self.dims.len() {
            0
        } else {
            self.dims[n as usize]
        }
    }

    /// Differential `C^n → C^{n+1}`, a zero matrix outside the stored range.
    pub fn diff(&self, n: i64) -> Matrix {
        if n < 0 || n as usize >= self.d.len() {
            Matrix::zero(self.dim(n), self.dim(n + 1))
        } else {
            self.d[n as usize].clone()
        }
    }

    pub fn labels(&self) -> Option<&Vec<Vec<String>>> {
        self.basis_labels.as_ref()
    }

    /// Check `d_{n+1} ∘ d_n = 0` for every degree, reporting the first
    /// failing degree with a witness basis index.
    pub fn validate(&self) -> Result<(), ComplexDefect> {
        self.check_shapes()?;
        for n in 0..self.max_degree() {
            let prod = self.d[n].mul(&self.d[n + 1]);
            if !prod.is_zero() {
                let basis_index = (0..prod.rows())
                    .find(|&r| prod.row(r).iter().any(|x| !num::Zero::is_zero(x)))
                    .unwrap_or(0);
                return Err(ComplexDefect::NotSquareZero {
                    degree: n,
                    basis_index,
                });
            }
        }
        Ok(())
    }

    /// Per-degree cohomology `ker d_n / im d_{n−1}` with representatives.
    pub fn cohomology(&self) -> Result<CohomologyResult, ComplexDefect> {
        self.validate()?;
        let mut spaces = Vec::with_capacity(self.dims.len());
        for n in 0..self.dims.len() as i64 {
            let kernel = self.diff(n).kernel();
            let image = if n == 0 {
                Subspace::zero(self.dim(0))
            } else {
                self.diff(n - 1).image()
            };
            spaces.push(QuotientPresentation::new(kernel, image)?);
        }
        Ok(CohomologyResult { spaces })
    }

    /// Alternating sum of dimensions; equals the alternating sum of
    /// cohomology dimensions on any valid complex.
    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(n, &d)| if n % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

/// Cohomology of a complex: per-degree quotient presentations of
/// `ker d / im d`, with dimensions read off the presentations.
#[derive(Clone, Debug)]
pub struct CohomologyResult {
    spaces: Vec<QuotientPresentation>,
}

impl CohomologyResult {
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|q| q.dim()).collect()
    }

    pub fn space(&self, n: usize) -> &QuotientPresentation {
        &self.spaces[n]
    }

    pub fn degrees(&self) -> usize {
        self.spaces.len()
    }
}

/// A decreasing filtration `F^0 ⊇ F^1 ⊇ …` of a complex, stored
/// extensionally: one subspace per (level, degree).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    depth: usize,
    levels: Vec<Vec<Subspace>>,
}

impl Filtration {
    /// `levels[m][n]` is `F^m C^n`; `levels[0]` must be the full spaces.
    pub fn new(levels: Vec<Vec<Subspace>>) -> Self {
        assert!(!levels.is_empty(), "filtration needs at least level 0");
        Filtration {
            depth: levels.len() - 1,
            levels,
        }
    }

    /// The trivial filtration `F^0 = C`, `F^m = 0` for `m ≥ 1`.
    pub fn trivial(c: &CochainComplex) -> Self {
        let full: Vec<Subspace> = c.dims().iter().map(|&d| Subspace::full(d)).collect();
        let zero: Vec<Subspace> = c.dims().iter().map(|&d| Subspace::zero(d)).collect();
        Filtration::new(vec![full, zero])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn stored(&self, m: usize, n: usize) -> &Subspace {
        &self.levels[m][n]
    }
}

/// A complex together with a validated filtration; the engine's input.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    pub complex: CochainComplex,
    pub filtration: Filtration,
}

impl FilteredComplex {
    pub fn new(complex: CochainComplex, filtration: Filtration) -> Self {
        FilteredComplex {
            complex,
            filtration,
        }
    }

    /// `F^m C^n` with index clamping: `m ≤ 0` gives the whole space, levels
    /// beyond the stored depth give zero, out-of-range degrees are zero.
    pub fn space(&self, m: i64, n: i64) -> Subspace {
        let dim = self.complex.dim(n);
        if n < 0 || n as usize >= self.complex.dims().len() {
            return Subspace::zero(dim);
        }
        if m <= 0 {
            return Subspace::full(dim);
        }
        if m as usize > self.filtration.depth {
            return Subspace::zero(dim);
        }
        self.filtration.levels[m as usize][n as usize].clone()
    }

    /// Check conditions: (1) `d F^m ⊆ F^m`, (2) `F^{m+1} ⊆ F^m`,
    /// (3) `F^0 = C` and `F^m C^n = 0` for `m > n`. Failures pinpoint the
    /// level, degree, and a witness vector.
    pub fn validate(&self) -> Result<(), ComplexDefect> {
        self.complex.validate()?;
        let degrees = self.complex.dims().len();
        for m in 0..=self.filtration.depth {
            if self.filtration.levels[m].len() != degrees {
                return Err(ComplexDefect::FiltrationShape {
                    level: m,
                    degree: self.filtration.levels[m].len(),
                    got: self.filtration.levels[m].len(),
                    want: degrees,
                });
            }
            for n in 0..degrees {
                let f = &self.filtration.levels[m][n];
                if f.ambient_dim() != self.complex.dims()[n] {
                    return Err(ComplexDefect::FiltrationShape {
                        level: m,
                        degree: n,
                        got: f.ambient_dim(),
                        want: self.complex.dims()[n],
                    });
                }
                // (3) boundedness
                if m == 0 && !f.is_full() {
                    return Err(ComplexDefect::NotBounded {
                        level: m,
                        degree: n,
                        expected: "F^0 C^n = C^n",
                    });
                }
                if m > n && !f.is_zero() {
                    return Err(ComplexDefect::NotBounded {
                        level: m,
                        degree: n,
                        expected: "F^m C^n = 0 for m > n",
                    });
                }
                // (2) decreasing
                if m > 0 {
                    let above = &self.filtration.levels[m - 1][n];
                    if let Some(witness) = above.containment_witness(f) {
                        return Err(ComplexDefect::NotDecreasing {
                            level: m,
                            degree: n,
                            witness,
                        });
                    }
                }
                // (1) d-stability
                let image = f.map(&self.complex.diff(n as i64));
                let target = self.space(m as i64, n as i64 + 1);
                if let Some(witness) = target.containment_witness(&image) {
                    return Err(ComplexDefect::NotDStable {
                        level: m,
                        degree: n,
                        witness,
                    });
                }
            }
        }
        Ok(())
    }

    /// The graded piece `F^p C / F^{p+1} C` as a complex in representative
    /// coordinates, with the induced differentials.
    pub fn graded_complex(&self, p: i64) -> Result<CochainComplex, ComplexDefect> {
        let degrees = self.complex.dims().len();
        let mut quotients = Vec::with_capacity(degrees);
        for n in 0..degrees as i64 {
            quotients.push(QuotientPresentation::new(
                self.space(p, n),
                self.space(p + 1, n),
            )?);
        }
        let mut dims = Vec::with_capacity(degrees);
        let mut diffs = Vec::with_capacity(degrees);
        for n in 0..degrees {
            dims.push(quotients[n].dim());
            let dst = if n + 1 < degrees {
                quotients[n + 1].clone()
            } else {
                QuotientPresentation::zero(0)
            };
            diffs.push(induced_map(
                &self.complex.diff(n as i64),
                &quotients[n],
                &dst,
            )?);
        }
        CochainComplex::new(dims, diffs)
    }

    /// `F^p H^n`: classes representable by cocycles in `F^p`, as a subspace
    /// of cocycles (the graded filtration of cohomology).
    pub fn filtered_cohomology_dim(&self, p: i64, n: i64) -> Result<usize, ComplexDefect> {
        let kernel = self.diff_kernel(n);
        let image = self.diff_image(n);
        let fp_cocycles = intersect(&self.space(p, n), &kernel)?;
        let numerator = sum(&fp_cocycles, &image)?;
        Ok(numerator.dim() - image.dim())
    }

    fn diff_kernel(&self, n: i64) -> Subspace {
        self.complex.diff(n).kernel()
    }

    fn diff_image(&self, n: i64) -> Subspace {
        if n == 0 {
            Subspace::zero(self.complex.dim(0))
        } else {
            self.complex.diff(n - 1).image()
        }
    }
}
