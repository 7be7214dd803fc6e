//! Exact Fourier-Motzkin elimination on integer-coefficient atoms.
//!
//! All satisfiability and projection decisions in the kernel funnel through
//! this module. Atoms here are kept in `>=`-oriented form; equalities are
//! eliminated by substitution rather than by splitting, which keeps them
//! intact in projection results.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::atom::{Atom, NormAtom, Relation};
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FmRel {
    Ge,
    Gt,
    Eq,
}

/// `coeffs · x + k  (>= | > | =)  0`.
#[derive(Debug, Clone)]
pub(crate) struct FmAtom {
    pub coeffs: Vec<BigInt>,
    pub k: BigInt,
    pub rel: FmRel,
}

impl FmAtom {
    pub fn from_atom(atom: &Atom, width: usize) -> FmAtom {
        let mut coeffs = vec![BigInt::zero(); width];
        coeffs[..atom.width()].clone_from_slice(atom.coeffs());
        let k = atom.constant_part().clone();
        match atom.relation() {
            Relation::Ge => FmAtom {
                coeffs,
                k,
                rel: FmRel::Ge,
            },
            Relation::Gt => FmAtom {
                coeffs,
                k,
                rel: FmRel::Gt,
            },
            Relation::Eq => FmAtom {
                coeffs,
                k,
                rel: FmRel::Eq,
            },
            Relation::Le => FmAtom {
                coeffs: coeffs.iter().map(|c| -c).collect(),
                k: -k,
                rel: FmRel::Ge,
            },
            Relation::Lt => FmAtom {
                coeffs: coeffs.iter().map(|c| -c).collect(),
                k: -k,
                rel: FmRel::Gt,
            },
        }
    }

    /// `var >= 0`.
    pub fn nonneg(width: usize, var: usize) -> FmAtom {
        let mut coeffs = vec![BigInt::zero(); width];
        coeffs[var] = BigInt::from(1);
        FmAtom {
            coeffs,
            k: BigInt::zero(),
            rel: FmRel::Ge,
        }
    }

    pub fn to_norm(&self, width: usize) -> NormAtom {
        let rel = match self.rel {
            FmRel::Ge => Relation::Ge,
            FmRel::Gt => Relation::Gt,
            FmRel::Eq => Relation::Eq,
        };
        let coeffs = self.coeffs[..width].to_vec();
        debug_assert!(self.coeffs[width..].iter().all(|c| c.is_zero()));
        Atom::normalize_int(coeffs, self.k.clone(), rel)
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn constant_holds(&self) -> bool {
        match self.rel {
            FmRel::Ge => !self.k.is_negative(),
            FmRel::Gt => self.k.is_positive(),
            FmRel::Eq => self.k.is_zero(),
        }
    }

    /// `a * scale_a + b * scale_b`, both scales positive.
    fn combine(a: &FmAtom, scale_a: &BigInt, b: &FmAtom, scale_b: &BigInt, rel: FmRel) -> FmAtom {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(ca, cb)| ca * scale_a + cb * scale_b)
            .collect();
        FmAtom {
            coeffs,
            k: &a.k * scale_a + &b.k * scale_b,
            rel,
        }
    }
}

/// Light normalization pass between elimination steps: evaluates constant
/// atoms (returning `None` on contradiction), divides each atom by its gcd,
/// and keeps only the tightest bound per coefficient direction.
pub(crate) fn cheap_prune(atoms: Vec<FmAtom>) -> Option<Vec<FmAtom>> {
    // direction -> (bound, strict); direction is the primitive coefficient
    // vector, the atom reads direction·x >= bound (or >).
    let mut bounds: BTreeMap<Vec<BigInt>, (Rat, bool)> = BTreeMap::new();
    // sign-normalized direction -> value, the atom reads direction·x = value.
    let mut equalities: BTreeMap<Vec<BigInt>, Rat> = BTreeMap::new();

    for atom in atoms {
        if atom.is_constant() {
            if atom.constant_holds() {
                continue;
            }
            return None;
        }
        let mut gcd = BigInt::zero();
        for c in &atom.coeffs {
            gcd = gcd.gcd(c);
        }
        let primitive: Vec<BigInt> = atom.coeffs.iter().map(|c| c / &gcd).collect();
        let value = Rat::new(-atom.k.clone(), gcd);
        match atom.rel {
            FmRel::Eq => {
                let first = primitive.iter().position(|c| !c.is_zero()).unwrap();
                let (dir, value) = if primitive[first].is_negative() {
                    (primitive.iter().map(|c| -c).collect::<Vec<_>>(), -value)
                } else {
                    (primitive, value)
                };
                match equalities.get(&dir) {
                    Some(existing) if *existing != value => return None,
                    Some(_) => {}
                    None => {
                        equalities.insert(dir, value);
                    }
                }
            }
            FmRel::Ge | FmRel::Gt => {
                let strict = atom.rel == FmRel::Gt;
                match bounds.get_mut(&primitive) {
                    Some((existing, existing_strict)) => {
                        if value > *existing || (value == *existing && strict) {
                            *existing = value;
                            *existing_strict = strict;
                        }
                    }
                    None => {
                        bounds.insert(primitive, (value, strict));
                    }
                }
            }
        }
    }

    let mut out = Vec::with_capacity(bounds.len() + equalities.len());
    for (dir, value) in equalities {
        let denom = value.denom().clone();
        let coeffs: Vec<BigInt> = dir.iter().map(|c| c * &denom).collect();
        out.push(FmAtom {
            coeffs,
            k: -value.numer().clone(),
            rel: FmRel::Eq,
        });
    }
    for (dir, (value, strict)) in bounds {
        let denom = value.denom().clone();
        let coeffs: Vec<BigInt> = dir.iter().map(|c| c * &denom).collect();
        out.push(FmAtom {
            coeffs,
            k: -value.numer().clone(),
            rel: if strict { FmRel::Gt } else { FmRel::Ge },
        });
    }
    Some(out)
}

/// Eliminates one column exactly. Uses Gaussian substitution when an
/// equality mentions the column, otherwise pairs lower with upper bounds;
/// strictness of a combination is strict iff either side is strict.
pub(crate) fn eliminate_col(atoms: Vec<FmAtom>, col: usize) -> Option<Vec<FmAtom>> {
    let atoms = cheap_prune(atoms)?;

    let pivot = atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.rel == FmRel::Eq && !a.coeffs[col].is_zero())
        .min_by_key(|(i, a)| (a.coeffs[col].abs(), *i))
        .map(|(i, _)| i);

    if let Some(pivot_idx) = pivot {
        let eq = atoms[pivot_idx].clone();
        let cv = eq.coeffs[col].clone();
        let sign = if cv.is_negative() {
            -BigInt::from(1)
        } else {
            BigInt::from(1)
        };
        let mut out = Vec::with_capacity(atoms.len() - 1);
        for (i, a) in atoms.into_iter().enumerate() {
            if i == pivot_idx {
                continue;
            }
            let d = a.coeffs[col].clone();
            if d.is_zero() {
                out.push(a);
                continue;
            }
            let rel = a.rel;
            let combined = FmAtom::combine(&a, &cv.abs(), &eq, &(-&sign * &d), rel);
            debug_assert!(combined.coeffs[col].is_zero());
            out.push(combined);
        }
        return cheap_prune(out);
    }

    let mut keep = Vec::new();
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for a in atoms {
        match a.coeffs[col].sign() {
            num_bigint::Sign::NoSign => keep.push(a),
            num_bigint::Sign::Plus => lowers.push(a),
            num_bigint::Sign::Minus => uppers.push(a),
        }
    }
    for lo in &lowers {
        for up in &uppers {
            let rel = if lo.rel == FmRel::Gt || up.rel == FmRel::Gt {
                FmRel::Gt
            } else {
                FmRel::Ge
            };
            let combined = FmAtom::combine(lo, &(-up.coeffs[col].clone()), up, &lo.coeffs[col], rel);
            debug_assert!(combined.coeffs[col].is_zero());
            keep.push(combined);
        }
    }
    cheap_prune(keep)
}

/// Decides satisfiability over the rationals by eliminating every column.
pub(crate) fn satisfiable(atoms: Vec<FmAtom>) -> bool {
    let Some(mut atoms) = cheap_prune(atoms) else {
        return false;
    };
    loop {
        if atoms.is_empty() {
            return true;
        }
        let width = atoms[0].coeffs.len();
        // Prefer a column with an equality pivot, otherwise the column
        // generating the fewest combinations.
        let mut best: Option<(usize, usize)> = None;
        let mut eq_col = None;
        for col in 0..width {
            let mut lowers = 0usize;
            let mut uppers = 0usize;
            let mut present = false;
            for a in &atoms {
                if a.coeffs[col].is_zero() {
                    continue;
                }
                present = true;
                if a.rel == FmRel::Eq {
                    eq_col = Some(col);
                    break;
                }
                if a.coeffs[col].is_positive() {
                    lowers += 1;
                } else {
                    uppers += 1;
                }
            }
            if eq_col.is_some() {
                break;
            }
            if present {
                let cost = lowers * uppers;
                if best.map(|(c, _)| cost < c).unwrap_or(true) {
                    best = Some((cost, col));
                }
            }
        }
        let col = match eq_col.or(best.map(|(_, col)| col)) {
            Some(col) => col,
            None => return true,
        };
        match eliminate_col(atoms, col) {
            Some(next) => atoms = next,
            None => return false,
        }
    }
}

/// Redundancy pruning on raw atoms: drops any atom entailed by the others.
/// Used mid-projection when intermediate systems grow large.
pub(crate) fn entailment_prune(atoms: Vec<FmAtom>) -> Vec<FmAtom> {
    let mut kept = atoms;
    let mut i = 0;
    while i < kept.len() {
        let negs = negate(&kept[i]);
        let entailed = negs.iter().all(|piece| {
            let mut trial: Vec<FmAtom> = kept
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, a)| a.clone())
                .collect();
            trial.push(piece.clone());
            !satisfiable(trial)
        });
        if entailed {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}

fn negate(atom: &FmAtom) -> Vec<FmAtom> {
    let flip = |rel| FmAtom {
        coeffs: atom.coeffs.iter().map(|c| -c).collect(),
        k: -atom.k.clone(),
        rel,
    };
    let same = |rel| FmAtom {
        coeffs: atom.coeffs.clone(),
        k: atom.k.clone(),
        rel,
    };
    match atom.rel {
        // not(t >= 0) is -t > 0
        FmRel::Ge => vec![flip(FmRel::Gt)],
        FmRel::Gt => vec![flip(FmRel::Ge)],
        // not(t = 0) is -t > 0 or t > 0
        FmRel::Eq => vec![flip(FmRel::Gt), same(FmRel::Gt)],
    }
}
