//! Finite unions of polyhedra: synthesis results and duration sets.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::atom::NormAtom;
use super::env::{Valuation, VarEnv, VarId};
use super::poly::{ConstraintError, Polyhedron};
use crate::rational::Rat;

/// A union of satisfiable disjuncts. The empty list denotes `false`.
/// Normalization drops unsatisfiable disjuncts, sorts them canonically,
/// and removes any disjunct included in another one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    env: Arc<VarEnv>,
    disjuncts: Vec<Polyhedron>,
}

impl ConstraintSet {
    pub fn empty(env: Arc<VarEnv>) -> ConstraintSet {
        ConstraintSet {
            env,
            disjuncts: Vec::new(),
        }
    }

    pub fn universe(env: Arc<VarEnv>) -> ConstraintSet {
        let top = Polyhedron::universe(env.clone());
        ConstraintSet {
            env,
            disjuncts: vec![top],
        }
    }

    pub fn from_polys(
        env: Arc<VarEnv>,
        polys: impl IntoIterator<Item = Polyhedron>,
    ) -> Result<ConstraintSet, ConstraintError> {
        let mut disjuncts = Vec::new();
        for p in polys {
            if !VarEnv::same_env(&env, p.env()) {
                return Err(ConstraintError::EnvMismatch);
            }
            if p.is_satisfiable() {
                disjuncts.push(p);
            }
        }
        let mut set = ConstraintSet { env, disjuncts };
        set.normalize()?;
        Ok(set)
    }

    fn normalize(&mut self) -> Result<(), ConstraintError> {
        self.disjuncts.retain(|d| d.is_satisfiable());
        self.disjuncts
            .sort_by(|a, b| a.atoms().cmp(b.atoms()));
        self.disjuncts.dedup();
        // Pairwise-inclusion pruning only; no stronger union minimization.
        let mut i = 0;
        while i < self.disjuncts.len() {
            let mut absorbed = false;
            for j in 0..self.disjuncts.len() {
                if i != j && self.disjuncts[j].includes(&self.disjuncts[i])? {
                    absorbed = true;
                    break;
                }
            }
            if absorbed {
                self.disjuncts.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(())
    }

    pub fn env(&self) -> &Arc<VarEnv> {
        &self.env
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn union(&self, other: &ConstraintSet) -> Result<ConstraintSet, ConstraintError> {
        if !VarEnv::same_env(&self.env, &other.env) {
            return Err(ConstraintError::EnvMismatch);
        }
        ConstraintSet::from_polys(
            self.env.clone(),
            self.disjuncts
                .iter()
                .chain(other.disjuncts.iter())
                .cloned(),
        )
    }

    /// Intersection distributes pairwise over the disjuncts.
    pub fn intersection(&self, other: &ConstraintSet) -> Result<ConstraintSet, ConstraintError> {
        if !VarEnv::same_env(&self.env, &other.env) {
            return Err(ConstraintError::EnvMismatch);
        }
        let mut pieces = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                pieces.push(a.intersect(b)?);
            }
        }
        ConstraintSet::from_polys(self.env.clone(), pieces)
    }

    pub fn eliminate(&self, vars: &BTreeSet<VarId>) -> Result<ConstraintSet, ConstraintError> {
        ConstraintSet::from_polys(
            self.env.clone(),
            self.disjuncts.iter().map(|d| d.eliminate(vars)),
        )
    }

    pub fn instantiate(&self, v: &Valuation) -> Result<ConstraintSet, ConstraintError> {
        let mut out = Vec::new();
        for d in &self.disjuncts {
            out.push(d.instantiate(v)?);
        }
        ConstraintSet::from_polys(self.env.clone(), out)
    }

    pub fn contains_point(&self, point: &[Rat]) -> bool {
        self.disjuncts.iter().any(|d| d.contains_point(point))
    }

    /// Is the polyhedron covered by this union? Decided exactly by convex
    /// difference decomposition: carving each disjunct out of `poly` must
    /// leave nothing.
    pub fn includes_poly(&self, poly: &Polyhedron) -> Result<bool, ConstraintError> {
        if !VarEnv::same_env(&self.env, poly.env()) {
            return Err(ConstraintError::EnvMismatch);
        }
        let mut regions = vec![poly.clone()];
        regions.retain(|r| r.is_satisfiable());
        for disjunct in &self.disjuncts {
            let mut remaining = Vec::new();
            for region in regions {
                subtract(&region, disjunct, &mut remaining);
            }
            regions = remaining;
            if regions.is_empty() {
                return Ok(true);
            }
        }
        Ok(regions.is_empty())
    }

    pub fn includes_set(&self, other: &ConstraintSet) -> Result<bool, ConstraintError> {
        for d in &other.disjuncts {
            if !self.includes_poly(d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equivalent(&self, other: &ConstraintSet) -> Result<bool, ConstraintError> {
        Ok(self.includes_set(other)? && other.includes_set(self)?)
    }

    pub fn render(&self) -> String {
        if self.disjuncts.is_empty() {
            return "false".to_string();
        }
        self.disjuncts
            .iter()
            .map(|d| d.render())
            .collect::<Vec<_>>()
            .join(" OR ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.disjuncts.iter().map(|d| d.to_json()).collect())
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Appends the convex pieces of `region \ carve` to `out`.
fn subtract(region: &Polyhedron, carve: &Polyhedron, out: &mut Vec<Polyhedron>) {
    let mut running = region.clone();
    for atom in carve.atoms() {
        for piece in atom.negations() {
            match piece {
                NormAtom::False => {}
                NormAtom::True => {
                    if running.is_satisfiable() {
                        out.push(running.clone());
                    }
                }
                NormAtom::Atom(neg) => {
                    let part = running.conjoin_norm(std::iter::once(NormAtom::Atom(neg)));
                    if part.is_satisfiable() {
                        out.push(part);
                    }
                }
            }
        }
        running = running.conjoin_norm(std::iter::once(NormAtom::Atom(atom.clone())));
        if running.is_empty() {
            return;
        }
    }
}
