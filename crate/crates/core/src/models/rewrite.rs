//! A small normal-ordering engine for words in the Heisenberg group
//! generators and their invariant one-forms.
//!
//! Words are rewritten with the bimodule relations only — group letters are
//! pushed left past form letters, transforming the form linearly, and the
//! group part is normal-ordered to `u^n v^m w^k` with the group law. The
//! engine knows nothing about the closed-form differential; the model
//! builder runs it first and refuses to construct if the two disagree.

use num::{One, Zero};

use crate::exactlin::{frac, Scalar};

/// Group coordinates `(n, m, k)` for `u^n v^m w^k`; the law is
/// `(n1,m1,k1)·(n2,m2,k2) = (n1+n2, m1+m2, k1+k2 − m1·n2)` (from `uv = wvu`).
pub type GroupCoords = (i64, i64, i64);

pub fn group_mul(a: GroupCoords, b: GroupCoords) -> GroupCoords {
    (a.0 + b.0, a.1 + b.1, a.2 + b.2 - a.1 * b.0)
}

pub fn group_power(g: GroupCoords, n: i64) -> GroupCoords {
    // u^a v^b w^c powers stay closed-form: the only twist is between v and u
    let (a, b, c) = g;
    let tri = n * (n - 1) / 2;
    (n * a, n * b, n * c - a * b * tri)
}

/// The bimodule relation coefficients, as rewrite rules for moving a single
/// group generator right past a form (`e · x = x · (e + … )`):
///
/// * `e^v · u = u · (e^v − c_uv e^w)`
/// * `e^u · v = v · (e^u + c_vu e^w)`
///
/// and all other generator/form crossings commute. The standard calculus
/// has `c_uv = c_vu = 1/2`; perturbing either coefficient produces a set of
/// relations whose differential no longer matches the model's closed form.
#[derive(Clone, Debug)]
pub struct HeisenbergRelations {
    pub c_uv: Scalar,
    pub c_vu: Scalar,
}

impl Default for HeisenbergRelations {
    fn default() -> Self {
        HeisenbergRelations {
            c_uv: frac(1, 2),
            c_vu: frac(1, 2),
        }
    }
}

/// A letter of a word: a group generator with exponent `±1`, or an
/// invariant one-form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    U(i64),
    V(i64),
    W(i64),
    Form(usize), // 0 = e^u, 1 = e^v, 2 = e^w
}

/// A word normal-ordered to `coeff · u^n v^m w^k · (Σ c_i e^i)`; the form
/// part is `None` for purely group words.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalOrdered {
    pub group: GroupCoords,
    pub form: Option<[Scalar; 3]>,
}

impl HeisenbergRelations {
    /// Conjugation of a form vector by a single generator letter:
    /// `f · x = x · conj_x(f)`.
    fn conj_letter(&self, letter: Letter, f: &[Scalar; 3]) -> [Scalar; 3] {
        let mut out = f.clone();
        match letter {
            // e^v · u^s = u^s · (e^v − s·c_uv e^w)
            Letter::U(s) => {
                let shift = &f[1] * &(self.c_uv.clone() * Scalar::from_integer(s.into()));
                out[2] = &out[2] - &shift;
            }
            // e^u · v^s = v^s · (e^u + s·c_vu e^w)
            Letter::V(s) => {
                let shift = &f[0] * &(self.c_vu.clone() * Scalar::from_integer(s.into()));
                out[2] = &out[2] + &shift;
            }
            Letter::W(_) => {}
            Letter::Form(_) => unreachable!("conj by a form letter"),
        }
        out
    }

    /// Normal-order a word containing at most one form letter.
    pub fn normal_order(&self, word: &[Letter]) -> NormalOrdered {
        let mut group = (0i64, 0i64, 0i64);
        let mut form: Option<[Scalar; 3]> = None;
        for &letter in word {
            match letter {
                Letter::Form(i) => {
                    assert!(form.is_none(), "words carry at most one form letter");
                    let mut f = [Scalar::zero(), Scalar::zero(), Scalar::zero()];
                    f[i] = Scalar::one();
                    form = Some(f);
                }
                group_letter => {
                    if let Some(f) = &form {
                        form = Some(self.conj_letter(group_letter, f));
                    }
                    let step = match group_letter {
                        Letter::U(s) => (s, 0, 0),
                        Letter::V(s) => (0, s, 0),
                        Letter::W(s) => (0, 0, s),
                        Letter::Form(_) => unreachable!(),
                    };
                    group = group_mul(group, step);
                }
            }
        }
        NormalOrdered { group, form }
    }

    /// The word spelling `u^n v^m w^k` letter by letter.
    pub fn monomial_word(coords: GroupCoords) -> Vec<Letter> {
        let mut word = Vec::new();
        let (n, m, k) = coords;
        for _ in 0..n.abs() {
            word.push(Letter::U(n.signum()));
        }
        for _ in 0..m.abs() {
            word.push(Letter::V(m.signum()));
        }
        for _ in 0..k.abs() {
            word.push(Letter::W(k.signum()));
        }
        word
    }

    /// The same monomial spelled v-first: `u^n v^m w^k = v^m u^n w^{k+mn}`.
    /// Differentiating this word exercises the other conjugation relation.
    pub fn monomial_word_v_first(coords: GroupCoords) -> Vec<Letter> {
        let (n, m, k) = coords;
        let mut word = Vec::new();
        for _ in 0..m.abs() {
            word.push(Letter::V(m.signum()));
        }
        for _ in 0..n.abs() {
            word.push(Letter::U(n.signum()));
        }
        let kk = k + m * n;
        for _ in 0..kk.abs() {
            word.push(Letter::W(kk.signum()));
        }
        word
    }

    /// `d(u^n v^m w^k)` by the Leibniz rule from `d x = x e^x` (and
    /// `d x⁻¹ = −x⁻¹ e^x`), normal-ordered. Returns the sector coordinates
    /// of the single surviving monomial and its form coefficients.
    pub fn differential_of_monomial(&self, coords: GroupCoords) -> (GroupCoords, [Scalar; 3]) {
        self.differential_of_word(coords, &Self::monomial_word(coords))
    }

    /// As [`Self::differential_of_monomial`] on the v-first spelling of the
    /// same group element.
    pub fn differential_of_monomial_v_first(
        &self,
        coords: GroupCoords,
    ) -> (GroupCoords, [Scalar; 3]) {
        self.differential_of_word(coords, &Self::monomial_word_v_first(coords))
    }

    fn differential_of_word(
        &self,
        coords: GroupCoords,
        word: &[Letter],
    ) -> (GroupCoords, [Scalar; 3]) {
        let mut total: Option<(GroupCoords, [Scalar; 3])> = None;
        for (pos, &letter) in word.iter().enumerate() {
            let (form_idx, negate) = match letter {
                Letter::U(s) => (0usize, s < 0),
                Letter::V(s) => (1, s < 0),
                Letter::W(s) => (2, s < 0),
                Letter::Form(_) => unreachable!(),
            };
            // d(x^{±1}) = ±x^{±1} e^x: insert the form right after the letter
            let mut term = Vec::with_capacity(word.len() + 1);
            term.extend_from_slice(&word[..=pos]);
            term.push(Letter::Form(form_idx));
            term.extend_from_slice(&word[pos + 1..]);
            let ordered = self.normal_order(&term);
            let mut f = ordered.form.expect("differential term has a form");
            if negate {
                for c in f.iter_mut() {
                    *c = -c.clone();
                }
            }
            match &mut total {
                None => total = Some((ordered.group, f)),
                Some((g, acc)) => {
                    assert_eq!(
                        *g, ordered.group,
                        "differential terms of one monomial stay in its sector"
                    );
                    for (a, b) in acc.iter_mut().zip(f) {
                        *a = &*a + &b;
                    }
                }
            }
        }
        match total {
            Some(t) => t,
            None => (coords, [Scalar::zero(), Scalar::zero(), Scalar::zero()]),
        }
    }

    /// Conjugation of `e^i` by a whole monomial: `e^i · g = g · (…)`.
    pub fn conj_by_monomial(&self, coords: GroupCoords, i: usize) -> [Scalar; 3] {
        let mut word = vec![Letter::Form(i)];
        word.extend(Self::monomial_word(coords));
        let ordered = self.normal_order(&word);
        assert_eq!(ordered.group, coords);
        ordered.form.expect("form is preserved")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::int;

    #[test]
    fn group_law_matches_uv_eq_wvu() {
        // v·u = w^{-1}·u·v
        let vu = group_mul((0, 1, 0), (1, 0, 0));
        assert_eq!(vu, (1, 1, -1));
        let uv = group_mul((1, 0, 0), (0, 1, 0));
        assert_eq!(uv, (1, 1, 0));
        // powers
        assert_eq!(group_power((1, 1, 0), 3), (3, 3, -3));
        assert_eq!(group_power((1, 0, 0), -2), (-2, 0, 0));
    }

    #[test]
    fn oracle_differentials_match_hand_computations() {
        let rels = HeisenbergRelations::default();
        // d(1) = 0
        let (_, f) = rels.differential_of_monomial((0, 0, 0));
        assert_eq!(f, [int(0), int(0), int(0)]);
        // d(w) = w e^w
        let (g, f) = rels.differential_of_monomial((0, 0, 1));
        assert_eq!(g, (0, 0, 1));
        assert_eq!(f, [int(0), int(0), int(1)]);
        // d(uv) = uv (e^u + e^v + (1/2) e^w): the single cross term
        let (g, f) = rels.differential_of_monomial((1, 1, 0));
        assert_eq!(g, (1, 1, 0));
        assert_eq!(f, [int(1), int(1), frac(1, 2)]);
    }

    #[test]
    fn oracle_handles_negative_exponents() {
        let rels = HeisenbergRelations::default();
        // d(u^{-1}) = −u^{-1} e^u
        let (g, f) = rels.differential_of_monomial((-1, 0, 0));
        assert_eq!(g, (-1, 0, 0));
        assert_eq!(f, [int(-1), int(0), int(0)]);
    }

    #[test]
    fn conjugation_by_monomials() {
        let rels = HeisenbergRelations::default();
        // e^u · v^2 = v^2 (e^u + e^w)
        assert_eq!(
            rels.conj_by_monomial((0, 2, 0), 0),
            [int(1), int(0), int(1)]
        );
        // e^v · u = u (e^v − (1/2) e^w)
        assert_eq!(
            rels.conj_by_monomial((1, 0, 0), 1),
            [int(0), int(1), frac(-1, 2)]
        );
        // e^w central
        assert_eq!(
            rels.conj_by_monomial((2, -1, 3), 2),
            [int(0), int(0), int(1)]
        );
    }
}
