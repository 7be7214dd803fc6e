//! The parametric timed automaton model: locations, clocks, parameters
//! with sharing roles, guards, boolean discrete variables, and private
//! designations on locations or edges.

mod lu;
mod ops;

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::constraint::{LinearTerm, NormAtom, Relation, VarEnv, VarKind};
use crate::rational::Rat;

pub use lu::{LuClassification, ParamUse, UseSite};
pub use ops::DiscreteExpansion;

pub type LocId = usize;
pub type ClockId = usize;
pub type ParamId = usize;
pub type ActionId = usize;
pub type DiscreteId = usize;

/// Whether a parameter is common to both copies under self-composition
/// (system constants, secrets) or renamed per copy (per-run inputs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRole {
    Shared,
    Input,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("negative value for parameter {0}")]
    NegativeParameter(String),
    #[error("name collision on {0}")]
    NameCollision(String),
    #[error("model is not valid: {0}")]
    Invalid(String),
    #[error("operation requires an L/U model")]
    NotLowerUpper,
}

/// A linear expression over the parameters, `Σ coeff·param + constant`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamExpr {
    pub coeffs: BTreeMap<ParamId, Rat>,
    pub constant: Rat,
}

impl ParamExpr {
    pub fn constant(value: Rat) -> Self {
        ParamExpr {
            coeffs: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn param(id: ParamId) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(id, Rat::from_integer(1.into()));
        ParamExpr {
            coeffs,
            constant: Rat::zero(),
        }
    }

    pub fn add(&mut self, id: ParamId, coeff: Rat) {
        let entry = self.coeffs.entry(id).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.coeffs.remove(&id);
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn substitute(&self, bindings: &BTreeMap<ParamId, Rat>, remap: &[Option<ParamId>]) -> ParamExpr {
        let mut out = ParamExpr::constant(self.constant.clone());
        for (id, coeff) in &self.coeffs {
            match bindings.get(id) {
                Some(value) => out.constant += coeff * value,
                None => {
                    let new_id = remap[*id].expect("unbound parameter must be kept");
                    out.add(new_id, coeff.clone());
                }
            }
        }
        out
    }

    fn remap(&self, remap: &[ParamId]) -> ParamExpr {
        let mut out = ParamExpr::constant(self.constant.clone());
        for (id, coeff) in &self.coeffs {
            out.add(remap[*id], coeff.clone());
        }
        out
    }
}

/// `clock ⋈ parametric-linear-expression`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockAtom {
    pub clock: ClockId,
    pub rel: Relation,
    pub bound: ParamExpr,
}

/// A parameter-only comparison `expr ⋈ 0`. An extension over the paper's
/// guard shape, needed to compare program variables turned parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamAtom {
    pub expr: ParamExpr,
    pub rel: Relation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Guard {
    pub clock_atoms: Vec<ClockAtom>,
    pub param_atoms: Vec<ParamAtom>,
    pub bool_tests: Vec<(DiscreteId, bool)>,
}

impl Guard {
    pub fn always() -> Guard {
        Guard::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: LocId,
    pub guard: Guard,
    /// `None` is an internal (unobservable, never synchronized) action.
    pub action: Option<ActionId>,
    pub resets: BTreeSet<ClockId>,
    pub bool_updates: Vec<(DiscreteId, bool)>,
    pub target: LocId,
    pub private: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    /// Invariants are clock atoms only.
    pub invariant: Vec<ClockAtom>,
    pub private: bool,
}

/// The model tuple: actions, locations, initial location, clocks,
/// parameters, invariants and edges, plus boolean discrete variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pta {
    pub name: String,
    pub actions: Vec<String>,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub clocks: Vec<String>,
    pub params: Vec<(String, ParamRole)>,
    pub discretes: Vec<(String, bool)>,
    pub edges: Vec<Edge>,
}

impl Pta {
    pub fn location_id(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn param_id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|(n, _)| n == name)
    }

    pub fn clock_id(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|n| n == name)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|n| n == name)
    }

    pub fn discrete_id(&self, name: &str) -> Option<DiscreteId> {
        self.discretes.iter().position(|(n, _)| n == name)
    }

    pub fn private_locations(&self) -> BTreeSet<LocId> {
        self.locations
            .iter()
            .enumerate()
            .filter(|(_, l)| l.private)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn private_edges(&self) -> BTreeSet<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.private)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.clock_id(name).is_some()
            || self.param_id(name).is_some()
            || self.discrete_id(name).is_some()
            || self.action_id(name).is_some()
    }

    /// Structural validation: every reference resolves, names are unique
    /// within and across the clock/parameter/discrete namespaces.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for name in self
            .clocks
            .iter()
            .chain(self.params.iter().map(|(n, _)| n))
            .chain(self.discretes.iter().map(|(n, _)| n))
        {
            if !seen.insert(name.clone()) {
                return Err(ModelError::NameCollision(name.clone()));
            }
        }
        let mut loc_names = BTreeSet::new();
        for l in &self.locations {
            if !loc_names.insert(l.name.clone()) {
                return Err(ModelError::NameCollision(l.name.clone()));
            }
        }
        if self.initial >= self.locations.len() {
            return Err(ModelError::Invalid("initial location out of range".into()));
        }
        let check_clock_atom = |atom: &ClockAtom| -> Result<(), ModelError> {
            if atom.clock >= self.clocks.len() {
                return Err(ModelError::Invalid("clock id out of range".into()));
            }
            for id in atom.bound.coeffs.keys() {
                if *id >= self.params.len() {
                    return Err(ModelError::Invalid("parameter id out of range".into()));
                }
            }
            Ok(())
        };
        for l in &self.locations {
            for atom in &l.invariant {
                check_clock_atom(atom)?;
            }
        }
        for e in &self.edges {
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                return Err(ModelError::Invalid("edge endpoint out of range".into()));
            }
            for atom in &e.guard.clock_atoms {
                check_clock_atom(atom)?;
            }
            for atom in &e.guard.param_atoms {
                for id in atom.expr.coeffs.keys() {
                    if *id >= self.params.len() {
                        return Err(ModelError::Invalid("parameter id out of range".into()));
                    }
                }
            }
            for (d, _) in e.guard.bool_tests.iter().chain(&e.bool_updates) {
                if *d >= self.discretes.len() {
                    return Err(ModelError::Invalid("discrete id out of range".into()));
                }
            }
            if let Some(a) = e.action {
                if a >= self.actions.len() {
                    return Err(ModelError::Invalid("action id out of range".into()));
                }
            }
            if e.resets.iter().any(|&c| c >= self.clocks.len()) {
                return Err(ModelError::Invalid("reset clock out of range".into()));
            }
        }
        Ok(())
    }

    /// The constraint environment of this model: clocks first (declaration
    /// order), then parameters.
    pub fn var_env(&self) -> Arc<VarEnv> {
        let mut vars = Vec::with_capacity(self.clocks.len() + self.params.len());
        for name in &self.clocks {
            vars.push((name.clone(), VarKind::Clock));
        }
        for (name, _) in &self.params {
            vars.push((name.clone(), VarKind::Parameter));
        }
        VarEnv::new(vars)
    }

    pub fn clock_var(&self, clock: ClockId) -> usize {
        clock
    }

    pub fn param_var(&self, param: ParamId) -> usize {
        self.clocks.len() + param
    }

    /// Lowers a clock atom `x ⋈ expr` to a kernel atom `x - expr ⋈ 0`.
    pub fn clock_atom_term(&self, atom: &ClockAtom) -> (LinearTerm, Relation) {
        let mut term = LinearTerm::var(self.clock_var(atom.clock));
        for (p, coeff) in &atom.bound.coeffs {
            term.add_term(self.param_var(*p), -coeff.clone());
        }
        term.constant = -atom.bound.constant.clone();
        (term, atom.rel)
    }

    pub fn param_atom_term(&self, atom: &ParamAtom) -> (LinearTerm, Relation) {
        let mut term = LinearTerm::constant(atom.expr.constant.clone());
        for (p, coeff) in &atom.expr.coeffs {
            term.add_term(self.param_var(*p), coeff.clone());
        }
        (term, atom.rel)
    }

    /// Normalized kernel atoms of a guard, excluding boolean tests.
    pub fn guard_norm_atoms(&self, guard: &Guard, env: &Arc<VarEnv>) -> Vec<NormAtom> {
        let width = env.len();
        let mut out = Vec::with_capacity(guard.clock_atoms.len() + guard.param_atoms.len());
        for atom in &guard.clock_atoms {
            let (term, rel) = self.clock_atom_term(atom);
            out.push(crate::constraint::Atom::normalize(width, &term, rel));
        }
        for atom in &guard.param_atoms {
            let (term, rel) = self.param_atom_term(atom);
            out.push(crate::constraint::Atom::normalize(width, &term, rel));
        }
        out
    }

    pub fn invariant_norm_atoms(&self, loc: LocId, env: &Arc<VarEnv>) -> Vec<NormAtom> {
        let width = env.len();
        self.locations[loc]
            .invariant
            .iter()
            .map(|atom| {
                let (term, rel) = self.clock_atom_term(atom);
                crate::constraint::Atom::normalize(width, &term, rel)
            })
            .collect()
    }
}
