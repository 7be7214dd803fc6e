//! Variable environments: the ordered clock/parameter namespace every
//! polyhedron is expressed over.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::rational::Rat;

/// Index of a variable inside its [`VarEnv`].
pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Clock,
    Parameter,
}

/// An ordered, immutable list of variable descriptors. The order is fixed
/// for the lifetime of every polyhedron referencing the environment; it
/// drives canonical atom ordering and rendering.
#[derive(Debug, PartialEq, Eq)]
pub struct VarEnv {
    vars: Vec<(String, VarKind)>,
    by_name: BTreeMap<String, VarId>,
}

impl VarEnv {
    /// Builds an environment from `(name, kind)` descriptors.
    ///
    /// Panics on duplicate names: environments are always constructed from
    /// validated models, so a duplicate is a programming error.
    pub fn new(vars: Vec<(String, VarKind)>) -> Arc<Self> {
        let mut by_name = BTreeMap::new();
        for (id, (name, _)) in vars.iter().enumerate() {
            let previous = by_name.insert(name.clone(), id);
            assert!(previous.is_none(), "duplicate variable name {name:?}");
        }
        Arc::new(VarEnv { vars, by_name })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id].0
    }

    pub fn kind(&self, id: VarId) -> VarKind {
        self.vars[id].1
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        0..self.vars.len()
    }

    pub fn clocks(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|&id| self.kind(id) == VarKind::Clock)
    }

    pub fn parameters(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|&id| self.kind(id) == VarKind::Parameter)
    }

    /// Two polyhedra may be combined only when their environments agree.
    pub fn same_env(a: &Arc<VarEnv>, b: &Arc<VarEnv>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }
}

impl fmt::Display for VarEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, kind)) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match kind {
                VarKind::Clock => write!(f, "clock {name}")?,
                VarKind::Parameter => write!(f, "param {name}")?,
            }
        }
        Ok(())
    }
}

/// A partial map from variables to exact non-negative rationals. Used both
/// for parameter valuations and (in the concrete semantics) clock values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    values: BTreeMap<VarId, Rat>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    /// Inserts a binding. Negative values are rejected: clocks and
    /// parameters both range over non-negative rationals.
    pub fn set(&mut self, var: VarId, value: Rat) {
        use num_traits::Signed;
        assert!(!value.is_negative(), "valuations are non-negative");
        self.values.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<&Rat> {
        self.values.get(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Rat)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(VarId, Rat)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (VarId, Rat)>>(iter: I) -> Self {
        let mut v = Valuation::new();
        for (var, value) in iter {
            v.set(var, value);
        }
        v
    }
}
