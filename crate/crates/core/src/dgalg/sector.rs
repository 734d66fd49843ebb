use std::collections::BTreeMap;

/// Index of a sector in its [`SectorSet`].
pub type SectorId = usize;

/// A finite window of a discrete group (or monoid): sector labels are
/// integer coordinate vectors, the product is stored as an explicit table,
/// and products falling outside the window are `None`.
#[derive(Clone, Debug)]
pub struct SectorSet {
    coord_names: Vec<String>,
    coords: Vec<Vec<i64>>,
    index: BTreeMap<Vec<i64>, SectorId>,
    unit: SectorId,
    product: Vec<Option<SectorId>>,
    windowed: bool,
}

impl SectorSet {
    /// Build from coordinate labels and a group law on coordinates. Sectors
    /// are kept in the order given, which fixes all iteration orders.
    pub fn new(
        coord_names: Vec<String>,
        coords: Vec<Vec<i64>>,
        law: impl Fn(&[i64], &[i64]) -> Vec<i64>,
        windowed: bool,
    ) -> Self {
        let index: BTreeMap<Vec<i64>, SectorId> = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        assert_eq!(index.len(), coords.len(), "duplicate sector coordinates");
        let dim = coord_names.len();
        let unit_coords = vec![0i64; dim];
        let unit = *index.get(&unit_coords).expect("unit sector must be present");
        let n = coords.len();
        let mut product = vec![None; n * n];
        for a in 0..n {
            for b in 0..n {
                let p = law(&coords[a], &coords[b]);
                product[a * n + b] = index.get(&p).copied();
            }
        }
        SectorSet {
            coord_names,
            coords,
            index,
            unit,
            product,
            windowed,
        }
    }

    /// Rebuild with an explicit product table (used by the file loader).
    pub fn from_table(
        coord_names: Vec<String>,
        coords: Vec<Vec<i64>>,
        table: Vec<Option<SectorId>>,
        windowed: bool,
    ) -> Self {
        let index: BTreeMap<Vec<i64>, SectorId> = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        assert_eq!(index.len(), coords.len(), "duplicate sector coordinates");
        assert_eq!(table.len(), coords.len() * coords.len());
        let unit_coords = vec![0i64; coord_names.len()];
        let unit = *index.get(&unit_coords).expect("unit sector must be present");
        SectorSet {
            coord_names,
            coords,
            index,
            unit,
            product: table,
            windowed,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn unit(&self) -> SectorId {
        self.unit
    }

    pub fn windowed(&self) -> bool {
        self.windowed
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn coords(&self, id: SectorId) -> &[i64] {
        &self.coords[id]
    }

    pub fn id_of(&self, coords: &[i64]) -> Option<SectorId> {
        self.index.get(coords).copied()
    }

    pub fn product(&self, a: SectorId, b: SectorId) -> Option<SectorId> {
        self.product[a * self.coords.len() + b]
    }

    pub fn product_table(&self) -> &[Option<SectorId>] {
        &self.product
    }

    pub fn ids(&self) -> impl Iterator<Item = SectorId> {
        0..self.coords.len()
    }

    /// All `(a, b)` with `a · b` defined in the window.
    pub fn in_window_pairs(&self) -> Vec<(SectorId, SectorId)> {
        let n = self.coords.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.product[a * n + b].is_some() {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// All `(a, b)` with `a · b = p`.
    pub fn factorizations(&self, p: SectorId) -> Vec<(SectorId, SectorId)> {
        let n = self.coords.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.product[a * n + b] == Some(p) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// One table scan giving, for every product sector, its factor pairs.
    pub fn pairs_by_product(&self) -> Vec<Vec<(SectorId, SectorId)>> {
        let n = self.coords.len();
        let mut out = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if let Some(p) = self.product[a * n + b] {
                    out[p].push((a, b));
                }
            }
        }
        out
    }

    /// Distinct right factors `h` with `g · h = p` for some `g`, per `p`.
    pub fn right_factors_by_product(&self) -> Vec<Vec<SectorId>> {
        let mut out: Vec<Vec<SectorId>> = self
            .pairs_by_product()
            .into_iter()
            .map(|pairs| {
                let mut hs: Vec<SectorId> = pairs.into_iter().map(|(_, h)| h).collect();
                hs.sort_unstable();
                hs.dedup();
                hs
            })
            .collect();
        for v in &mut out {
            v.shrink_to_fit();
        }
        out
    }

    /// Render a sector as a monomial in the coordinate names, `"1"` for the
    /// unit.
    pub fn display(&self, id: SectorId) -> String {
        let c = &self.coords[id];
        let mut parts = Vec::new();
        for (name, &e) in self.coord_names.iter().zip(c) {
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_owned()
        } else {
            parts.join("·")
        }
    }

    /// First associativity defect `(a, b, c)` among triples where all four
    /// intermediate products are in the window, if any.
    pub fn associativity_defect(&self) -> Option<(SectorId, SectorId, SectorId)> {
        let n = self.coords.len();
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.product(a, b) else { continue };
                for c in 0..n {
                    let (Some(abc), Some(bc)) = (self.product(ab, c), self.product(b, c))
                    else {
                        continue;
                    };
                    if let Some(a_bc) = self.product(a, bc) {
                        if abc != a_bc {
                            return Some((a, b, c));
                        }
                    }
                }
            }
        }
        None
    }

    /// Check the unit is two-sided wherever defined.
    pub fn unit_defect(&self) -> Option<SectorId> {
        self.ids().find(|&g| {
            self.product(self.unit, g) != Some(g) || self.product(g, self.unit) != Some(g)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laurent(n: i64) -> SectorSet {
        let window = (-n..=n).map(|j| vec![j]).collect();
        SectorSet::new(
            vec!["z".into()],
            window,
            |a, b| vec![a[0] + b[0]],
            true,
        )
    }

    #[test]
    fn window_products_and_unit() {
        let s = laurent(2);
        assert_eq!(s.len(), 5);
        let two = s.id_of(&[2]).unwrap();
        let minus_one = s.id_of(&[-1]).unwrap();
        assert_eq!(s.product(two, minus_one), s.id_of(&[1]));
        assert_eq!(s.product(two, two), None);
        assert_eq!(s.unit_defect(), None);
        assert_eq!(s.associativity_defect(), None);
        assert_eq!(s.display(two), "z^2");
        assert_eq!(s.display(s.unit()), "1");
    }
}
