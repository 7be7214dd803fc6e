//! Convex polyhedra over clocks and parameters, with the zone operations
//! of the symbolic semantics.
//!
//! Non-negativity of every variable is part of the theory: it is conjoined
//! implicitly in every satisfiability, inclusion and projection decision
//! rather than stored as atoms. Canonicalization therefore also drops atoms
//! entailed by the remaining ones together with non-negativity, which gives
//! deterministic output and cheap syntactic equality on the fixtures.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use super::atom::{Atom, LinearTerm, NormAtom, Relation};
use super::env::{Valuation, VarEnv, VarId, VarKind};
use super::fm::{self, FmAtom};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("unknown variable id {0}")]
    UnknownVariable(usize),
    #[error("valuation misses parameter {0}")]
    MissingParameter(String),
    #[error("operands use different variable environments")]
    EnvMismatch,
    #[error("constraint mentions more than one variable: {0}")]
    MultiVariable(String),
}

/// A conjunction of canonical atoms. The empty atom list is the universe;
/// the unsatisfiable polyhedron is the single contradiction atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    env: Arc<VarEnv>,
    atoms: Vec<Atom>,
    empty: bool,
}

impl Polyhedron {
    pub fn universe(env: Arc<VarEnv>) -> Polyhedron {
        Polyhedron {
            env,
            atoms: Vec::new(),
            empty: false,
        }
    }

    pub fn empty(env: Arc<VarEnv>) -> Polyhedron {
        let width = env.len();
        Polyhedron {
            env,
            atoms: vec![Atom::contradiction(width)],
            empty: true,
        }
    }

    /// Builds a canonical polyhedron from `term ⋈ 0` pairs.
    pub fn from_terms(
        env: Arc<VarEnv>,
        atoms: &[(LinearTerm, Relation)],
    ) -> Result<Polyhedron, ConstraintError> {
        Polyhedron::universe(env).conjoin_terms(atoms)
    }

    pub fn env(&self) -> &Arc<VarEnv> {
        &self.env
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.empty
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Intersection with additional constraints, canonicalized.
    pub fn conjoin_terms(
        &self,
        atoms: &[(LinearTerm, Relation)],
    ) -> Result<Polyhedron, ConstraintError> {
        let width = self.env.len();
        for (term, _) in atoms {
            if let Some(max) = term.max_var() {
                if max >= width {
                    return Err(ConstraintError::UnknownVariable(max));
                }
            }
        }
        Ok(self.conjoin_norm(
            atoms
                .iter()
                .map(|(term, rel)| Atom::normalize(width, term, *rel)),
        ))
    }

    pub(crate) fn conjoin_norm(&self, additions: impl IntoIterator<Item = NormAtom>) -> Polyhedron {
        if self.empty {
            return self.clone();
        }
        let mut atoms = self.atoms.clone();
        for norm in additions {
            match norm {
                NormAtom::True => {}
                NormAtom::False => return Polyhedron::empty(self.env.clone()),
                NormAtom::Atom(a) => atoms.push(a),
            }
        }
        canonicalize(self.env.clone(), atoms)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron, ConstraintError> {
        if !VarEnv::same_env(&self.env, &other.env) {
            return Err(ConstraintError::EnvMismatch);
        }
        if self.empty || other.empty {
            return Ok(Polyhedron::empty(self.env.clone()));
        }
        Ok(self.conjoin_norm(other.atoms.iter().cloned().map(NormAtom::Atom)))
    }

    /// Future of the polyhedron under uniform clock delay: every clock
    /// grows by the same non-negative amount, parameters stay fixed.
    pub fn time_elapse(&self) -> Polyhedron {
        if self.empty {
            return self.clone();
        }
        let width = self.env.len();
        let delta = width;
        let clocks: Vec<VarId> = self.env.clocks().collect();
        if clocks.is_empty() {
            return self.clone();
        }
        let mut working: Vec<FmAtom> = Vec::with_capacity(self.atoms.len() + clocks.len() + 1);
        for atom in &self.atoms {
            let mut fm_atom = FmAtom::from_atom(atom, width + 1);
            // Substitute every clock x by x - delta.
            let shift: num_bigint::BigInt = clocks.iter().map(|&c| &fm_atom.coeffs[c]).sum();
            fm_atom.coeffs[delta] = -shift;
            working.push(fm_atom);
        }
        // Pre-elapse clock values were non-negative: x - delta >= 0.
        for &clock in &clocks {
            let mut nonneg = FmAtom::nonneg(width + 1, clock);
            nonneg.coeffs[delta] = -num_bigint::BigInt::from(1);
            working.push(nonneg);
        }
        working.push(FmAtom::nonneg(width + 1, delta));
        let atoms = fm::eliminate_col(working, delta)
            .and_then(|result| collect_norm(result.iter().map(|a| a.to_norm(width))));
        match atoms {
            None => Polyhedron::empty(self.env.clone()),
            Some(atoms) => canonicalize(self.env.clone(), atoms),
        }
    }

    /// Exact existential projection of the given variables, under the
    /// non-negative theory of the eliminated variables.
    pub fn eliminate(&self, vars: &BTreeSet<VarId>) -> Polyhedron {
        if self.empty || vars.is_empty() {
            return self.clone();
        }
        let width = self.env.len();
        let mut working: Vec<FmAtom> = self
            .atoms
            .iter()
            .map(|a| FmAtom::from_atom(a, width))
            .collect();
        for &var in vars {
            debug_assert!(var < width);
            working.push(FmAtom::nonneg(width, var));
            working = match fm::eliminate_col(working, var) {
                None => return Polyhedron::empty(self.env.clone()),
                Some(next) => next,
            };
            // Keep intermediate systems small; full canonical pruning
            // happens once at the end.
            if working.len() > 48 {
                working = fm::entailment_prune(working);
            }
        }
        match collect_norm(working.iter().map(|a| a.to_norm(width))) {
            None => Polyhedron::empty(self.env.clone()),
            Some(atoms) => canonicalize(self.env.clone(), atoms),
        }
    }

    /// Resets the given clocks to zero.
    pub fn reset(&self, clocks: &BTreeSet<VarId>) -> Polyhedron {
        if self.empty || clocks.is_empty() {
            return self.clone();
        }
        debug_assert!(clocks.iter().all(|&c| self.env.kind(c) == VarKind::Clock));
        let freed = self.eliminate(clocks);
        let width = self.env.len();
        freed.conjoin_norm(clocks.iter().map(|&c| {
            Atom::normalize(width, &LinearTerm::var(c), Relation::Eq)
        }))
    }

    /// Projection onto the parameters: eliminates every clock.
    pub fn project_params(&self) -> Polyhedron {
        let clocks: BTreeSet<VarId> = self.env.clocks().collect();
        self.eliminate(&clocks)
    }

    /// Replaces parameters by the values of `v`. Errors if a parameter
    /// occurs in the constraint but has no binding.
    pub fn instantiate(&self, v: &Valuation) -> Result<Polyhedron, ConstraintError> {
        if self.empty {
            return Ok(self.clone());
        }
        let width = self.env.len();
        let mut rebuilt: Vec<NormAtom> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let mut term = LinearTerm::constant(Rat::from_integer(atom.constant_part().clone()));
            for id in self.env.ids() {
                let coeff = atom.coeff(id);
                if coeff.is_zero() {
                    continue;
                }
                if self.env.kind(id) == VarKind::Parameter {
                    match v.get(id) {
                        Some(value) => {
                            term.constant += Rat::from_integer(coeff.clone()) * value;
                            continue;
                        }
                        None => {
                            return Err(ConstraintError::MissingParameter(
                                self.env.name(id).to_string(),
                            ))
                        }
                    }
                }
                term.add_term(id, Rat::from_integer(coeff.clone()));
            }
            rebuilt.push(Atom::normalize(width, &term, atom.relation()));
        }
        Ok(Polyhedron::universe(self.env.clone()).conjoin_norm(rebuilt))
    }

    /// `self ⊇ inner`, decided atom by atom: inner must be incompatible
    /// with the negation of every atom of `self`.
    pub fn includes(&self, inner: &Polyhedron) -> Result<bool, ConstraintError> {
        if !VarEnv::same_env(&self.env, &inner.env) {
            return Err(ConstraintError::EnvMismatch);
        }
        if inner.empty {
            return Ok(true);
        }
        if self.empty {
            return Ok(false);
        }
        for atom in &self.atoms {
            for piece in atom.negations() {
                match piece {
                    NormAtom::False => {}
                    NormAtom::True => return Ok(false),
                    NormAtom::Atom(neg) => {
                        if raw_sat(&self.env, &inner.atoms, Some(&neg)) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn equivalent(&self, other: &Polyhedron) -> Result<bool, ConstraintError> {
        Ok(self.includes(other)? && other.includes(self)?)
    }

    /// Membership of a total point, given densely in environment order.
    pub fn contains_point(&self, point: &[Rat]) -> bool {
        debug_assert_eq!(point.len(), self.env.len());
        !self.empty && self.atoms.iter().all(|a| a.eval(point))
    }

    pub fn render(&self) -> String {
        if self.empty {
            return "false".to_string();
        }
        if self.atoms.is_empty() {
            return "true".to_string();
        }
        self.atoms
            .iter()
            .map(|a| a.render(&self.env))
            .collect::<Vec<_>>()
            .join(" AND ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.atoms.iter().map(|a| a.to_json(&self.env)).collect())
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `None` when some atom normalized to false.
fn collect_norm(iter: impl Iterator<Item = NormAtom>) -> Option<Vec<Atom>> {
    let mut out = Vec::new();
    for norm in iter {
        match norm {
            NormAtom::True => {}
            NormAtom::False => return None,
            NormAtom::Atom(a) => out.push(a),
        }
    }
    Some(out)
}

/// Satisfiability of raw atoms under the non-negative theory.
fn raw_sat(env: &Arc<VarEnv>, atoms: &[Atom], extra: Option<&Atom>) -> bool {
    let width = env.len();
    let mut working: Vec<FmAtom> = atoms
        .iter()
        .chain(extra)
        .map(|a| FmAtom::from_atom(a, width))
        .collect();
    for var in env.ids() {
        working.push(FmAtom::nonneg(width, var));
    }
    fm::satisfiable(working)
}

/// Sorts, deduplicates, decides emptiness, and drops every atom entailed
/// by the remaining ones plus non-negativity.
fn canonicalize(env: Arc<VarEnv>, mut atoms: Vec<Atom>) -> Polyhedron {
    if atoms.iter().any(|a| a.is_contradiction()) {
        return Polyhedron::empty(env);
    }
    atoms.sort();
    atoms.dedup();
    if !raw_sat(&env, &atoms, None) {
        return Polyhedron::empty(env);
    }
    let mut i = 0;
    while i < atoms.len() {
        let mut others: Vec<Atom> = Vec::with_capacity(atoms.len() - 1);
        others.extend_from_slice(&atoms[..i]);
        others.extend_from_slice(&atoms[i + 1..]);
        let entailed = atoms[i].negations().into_iter().all(|piece| match piece {
            NormAtom::False => true,
            NormAtom::True => false,
            NormAtom::Atom(neg) => !raw_sat(&env, &others, Some(&neg)),
        });
        if entailed {
            atoms.remove(i);
        } else {
            i += 1;
        }
    }
    Polyhedron {
        env,
        atoms,
        empty: false,
    }
}
