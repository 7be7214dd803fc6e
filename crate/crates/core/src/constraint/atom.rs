//! Linear atoms `term ⋈ 0` in gcd-normalized integer form.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::env::{VarEnv, VarId};
use crate::rational::{render_rat, Rat};

/// Comparison against zero. The declared order (`<`, `<=`, `=`, `>=`, `>`)
/// is also the canonical sort order of atoms sharing a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    /// Mirror image used when an atom is multiplied by a negative factor.
    pub fn flipped(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
            Relation::Gt => Relation::Lt,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    /// Does `value ⋈ 0` hold?
    pub fn eval(self, value: &Rat) -> bool {
        match self {
            Relation::Lt => value.is_negative(),
            Relation::Le => !value.is_positive(),
            Relation::Eq => value.is_zero(),
            Relation::Ge => !value.is_negative(),
            Relation::Gt => value.is_positive(),
        }
    }
}

/// A rational linear expression `Σ coeff·var + constant` over a [`VarEnv`].
///
/// This is the construction vehicle for atoms; coefficients stay rational
/// here and are cleared to integers on atom normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearTerm {
    pub coeffs: BTreeMap<VarId, Rat>,
    pub constant: Rat,
}

impl LinearTerm {
    pub fn constant(value: Rat) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn var(id: VarId) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(id, Rat::one());
        LinearTerm {
            coeffs,
            constant: Rat::zero(),
        }
    }

    pub fn add_term(&mut self, id: VarId, coeff: Rat) {
        let entry = self.coeffs.entry(id).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.coeffs.remove(&id);
        }
    }

    pub fn plus(mut self, other: &LinearTerm) -> Self {
        for (id, c) in &other.coeffs {
            self.add_term(*id, c.clone());
        }
        self.constant += &other.constant;
        self
    }

    pub fn minus(mut self, other: &LinearTerm) -> Self {
        for (id, c) in &other.coeffs {
            self.add_term(*id, -c.clone());
        }
        self.constant -= &other.constant;
        self
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.coeffs.keys().next_back().copied()
    }
}

/// Outcome of normalizing a linear atom: constant atoms collapse to a
/// truth value, everything else becomes a canonical [`Atom`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormAtom {
    True,
    False,
    Atom(Atom),
}

/// A canonical atom `coeffs·vars + constant ⋈ 0`: integer coefficients,
/// gcd 1 across coefficients and constant, first nonzero coefficient
/// positive (flipping the relation when normalization negates the term).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    coeffs: Vec<BigInt>,
    constant: BigInt,
    rel: Relation,
}

impl Atom {
    /// Normalizes `term ⋈ 0` over an environment of `width` variables.
    pub fn normalize(width: usize, term: &LinearTerm, rel: Relation) -> NormAtom {
        let mut denom_lcm = BigInt::one();
        for c in term.coeffs.values() {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        denom_lcm = denom_lcm.lcm(term.constant.denom());

        let mut coeffs = vec![BigInt::zero(); width];
        for (id, c) in &term.coeffs {
            assert!(*id < width, "variable {id} outside environment");
            coeffs[*id] = (c * &denom_lcm).to_integer();
        }
        let constant = (&term.constant * &denom_lcm).to_integer();
        Self::normalize_int(coeffs, constant, rel)
    }

    /// Normalizes an atom already in integer form.
    pub fn normalize_int(mut coeffs: Vec<BigInt>, mut constant: BigInt, mut rel: Relation) -> NormAtom {
        let first_nonzero = coeffs.iter().position(|c| !c.is_zero());
        let Some(first) = first_nonzero else {
            // Constant atom: decide it now.
            let value = Rat::from_integer(constant);
            return if rel.eval(&value) {
                NormAtom::True
            } else {
                NormAtom::False
            };
        };
        let mut gcd = BigInt::zero();
        for c in coeffs.iter().chain(std::iter::once(&constant)) {
            gcd = gcd.gcd(c);
        }
        if gcd > BigInt::one() {
            for c in coeffs.iter_mut() {
                *c /= &gcd;
            }
            constant /= &gcd;
        }
        if coeffs[first].is_negative() {
            for c in coeffs.iter_mut() {
                *c = -std::mem::take(c);
            }
            constant = -constant;
            rel = rel.flipped();
        }
        NormAtom::Atom(Atom {
            coeffs,
            constant,
            rel,
        })
    }

    /// The canonical unsatisfiable atom, used as the body of the empty
    /// polyhedron.
    pub fn contradiction(width: usize) -> Atom {
        Atom {
            coeffs: vec![BigInt::zero(); width],
            constant: -BigInt::one(),
            rel: Relation::Ge,
        }
    }

    pub fn is_contradiction(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, id: VarId) -> &BigInt {
        &self.coeffs[id]
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn relation(&self) -> Relation {
        self.rel
    }

    pub fn mentions(&self, id: VarId) -> bool {
        !self.coeffs[id].is_zero()
    }

    /// Negation as a union of atoms: a single atom except for equalities,
    /// which negate to two strict half-spaces.
    pub fn negations(&self) -> Vec<NormAtom> {
        let pieces: &[Relation] = match self.rel {
            Relation::Lt => &[Relation::Ge],
            Relation::Le => &[Relation::Gt],
            Relation::Ge => &[Relation::Lt],
            Relation::Gt => &[Relation::Le],
            Relation::Eq => &[Relation::Lt, Relation::Gt],
        };
        pieces
            .iter()
            .map(|rel| Self::normalize_int(self.coeffs.clone(), self.constant.clone(), *rel))
            .collect()
    }

    /// Evaluates the atom at a total point given as dense rationals.
    pub fn eval(&self, point: &[Rat]) -> bool {
        let mut value = Rat::from_integer(self.constant.clone());
        for (c, x) in self.coeffs.iter().zip(point) {
            if !c.is_zero() {
                value += Rat::from_integer(c.clone()) * x;
            }
        }
        self.rel.eval(&value)
    }

    fn sort_key(&self) -> (usize, &[BigInt], Relation, &BigInt) {
        let first = self
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(usize::MAX);
        (first, &self.coeffs, self.rel, &self.constant)
    }

    /// Splits the atom into `lhs ⋈ rhs` with all-positive sides for
    /// display: positive coefficients stay left, negative ones move right.
    pub fn render(&self, env: &VarEnv) -> String {
        let mut lhs: Vec<String> = Vec::new();
        let mut rhs: Vec<String> = Vec::new();
        for (id, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (side, magnitude) = if c.is_positive() {
                (&mut lhs, c.clone())
            } else {
                (&mut rhs, -c.clone())
            };
            if magnitude.is_one() {
                side.push(env.name(id).to_string());
            } else {
                side.push(format!("{}*{}", magnitude, env.name(id)));
            }
        }
        if self.constant.is_positive() {
            lhs.push(self.constant.to_string());
        } else if self.constant.is_negative() {
            rhs.push((-self.constant.clone()).to_string());
        }
        let join = |side: Vec<String>| {
            if side.is_empty() {
                "0".to_string()
            } else {
                side.join(" + ")
            }
        };
        format!("{} {} {}", join(lhs), self.rel.as_str(), join(rhs))
    }

    /// JSON form per the documented schema:
    /// `{coeffs: {var: "num/den"}, const: "num/den", rel: "<="}`.
    pub fn to_json(&self, env: &VarEnv) -> serde_json::Value {
        let mut coeffs = serde_json::Map::new();
        for (id, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs.insert(
                    env.name(id).to_string(),
                    serde_json::Value::String(render_rat(&Rat::from_integer(c.clone()))),
                );
            }
        }
        serde_json::json!({
            "coeffs": coeffs,
            "const": render_rat(&Rat::from_integer(self.constant.clone())),
            "rel": self.rel.as_str(),
        })
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn term(pairs: &[(VarId, i64)], constant: i64) -> LinearTerm {
        let mut t = LinearTerm::constant(rat_int(constant));
        for (id, c) in pairs {
            t.add_term(*id, rat_int(*c));
        }
        t
    }

    #[test]
    fn gcd_and_sign_normalization() {
        // 2x - 6 <= 0 normalizes to x - 3 <= 0.
        let NormAtom::Atom(a) = Atom::normalize(2, &term(&[(0, 2)], -6), Relation::Le) else {
            panic!("expected atom");
        };
        assert_eq!(a.coeffs(), &[BigInt::from(1), BigInt::from(0)]);
        assert_eq!(a.constant_part(), &BigInt::from(-3));
        assert_eq!(a.relation(), Relation::Le);

        // -x + 3 >= 0 flips to x - 3 <= 0: same canonical atom.
        let NormAtom::Atom(b) = Atom::normalize(2, &term(&[(0, -1)], 3), Relation::Ge) else {
            panic!("expected atom");
        };
        assert_eq!(a, b);
    }

    #[test]
    fn rational_coefficients_are_cleared() {
        // x/2 - 3/4 >= 0 becomes 2x - 3 >= 0.
        let mut t = LinearTerm::constant(rat(-3, 4));
        t.add_term(0, rat(1, 2));
        let NormAtom::Atom(a) = Atom::normalize(1, &t, Relation::Ge) else {
            panic!("expected atom");
        };
        assert_eq!(a.coeffs(), &[BigInt::from(2)]);
        assert_eq!(a.constant_part(), &BigInt::from(-3));
    }

    #[test]
    fn constant_atoms_collapse_to_truth_values() {
        assert_eq!(
            Atom::normalize(1, &term(&[], -1), Relation::Ge),
            NormAtom::False
        );
        assert_eq!(
            Atom::normalize(1, &term(&[], 0), Relation::Ge),
            NormAtom::True
        );
        assert_eq!(
            Atom::normalize(1, &term(&[], 0), Relation::Gt),
            NormAtom::False
        );
        assert_eq!(
            Atom::normalize(1, &term(&[], 0), Relation::Eq),
            NormAtom::True
        );
    }

    #[test]
    fn equality_negates_to_two_pieces() {
        let NormAtom::Atom(a) = Atom::normalize(1, &term(&[(0, 1)], -2), Relation::Eq) else {
            panic!("expected atom");
        };
        let negs = a.negations();
        assert_eq!(negs.len(), 2);
    }
}
