//! Lower/upper parameter classification and the parameter-free
//! abstraction it enables.

use std::collections::BTreeSet;

use num_traits::Signed;

use super::{ClockAtom, Edge, Guard, LocId, Location, ModelError, ParamAtom, ParamExpr, ParamId, Pta};
use crate::constraint::Relation;

/// Where a parameter occurrence was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UseSite {
    Invariant { location: LocId, name: String },
    EdgeGuard { edge: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamUse {
    pub site: UseSite,
    pub atom: String,
}

/// Verdict of the lower/upper analysis. In the `Lu` case the two sets
/// partition the parameters; `NotLu` carries a parameter that is forced
/// onto both sides, with one witnessing occurrence each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LuClassification {
    Lu {
        lower: BTreeSet<ParamId>,
        upper: BTreeSet<ParamId>,
    },
    NotLu {
        param: ParamId,
        lower_use: ParamUse,
        upper_use: ParamUse,
    },
}

impl Pta {
    /// Decides whether each parameter can be consistently assigned to
    /// lower-bound or upper-bound use across every clock comparison.
    /// Parameter-only atoms never bound clocks and are ignored here;
    /// parameters without any clock occurrence go to the lower side.
    pub fn classify_lu(&self) -> LuClassification {
        let mut lower_use: Vec<Option<ParamUse>> = vec![None; self.params.len()];
        let mut upper_use: Vec<Option<ParamUse>> = vec![None; self.params.len()];

        let record = |atom: &ClockAtom, site: UseSite, this: &Pta,
                          lower_use: &mut Vec<Option<ParamUse>>,
                          upper_use: &mut Vec<Option<ParamUse>>| {
            for (&param, coeff) in &atom.bound.coeffs {
                let positive = coeff.is_positive();
                // The bound expression sits on the comparison's right-hand
                // side: with x ⋈ Σ α·p + d, a positive α in an upper bound
                // (⋈ ∈ {<, <=}) is an upper use, in a lower bound a lower
                // use; negative coefficients act dually. An equality uses
                // the parameter in both directions at once.
                let (lower_demand, upper_demand) = match atom.rel {
                    Relation::Le | Relation::Lt => (!positive, positive),
                    Relation::Ge | Relation::Gt => (positive, !positive),
                    Relation::Eq => (true, true),
                };
                let rendered = this.render_clock_atom(atom);
                if lower_demand && lower_use[param].is_none() {
                    lower_use[param] = Some(ParamUse {
                        site: site.clone(),
                        atom: rendered.clone(),
                    });
                }
                if upper_demand && upper_use[param].is_none() {
                    upper_use[param] = Some(ParamUse {
                        site: site.clone(),
                        atom: rendered.clone(),
                    });
                }
            }
        };

        for (loc_id, loc) in self.locations.iter().enumerate() {
            for atom in &loc.invariant {
                record(
                    atom,
                    UseSite::Invariant {
                        location: loc_id,
                        name: loc.name.clone(),
                    },
                    self,
                    &mut lower_use,
                    &mut upper_use,
                );
            }
        }
        for (edge_id, edge) in self.edges.iter().enumerate() {
            for atom in &edge.guard.clock_atoms {
                record(
                    atom,
                    UseSite::EdgeGuard { edge: edge_id },
                    self,
                    &mut lower_use,
                    &mut upper_use,
                );
            }
        }

        for param in 0..self.params.len() {
            if let (Some(lower), Some(upper)) = (&lower_use[param], &upper_use[param]) {
                return LuClassification::NotLu {
                    param,
                    lower_use: lower.clone(),
                    upper_use: upper.clone(),
                };
            }
        }
        let mut lower = BTreeSet::new();
        let mut upper = BTreeSet::new();
        for (param, upper_occurrence) in upper_use.iter().enumerate() {
            if upper_occurrence.is_some() {
                upper.insert(param);
            } else {
                lower.insert(param);
            }
        }
        LuClassification::Lu { lower, upper }
    }

    /// The parameter-free abstraction: lower-bound parameters are replaced
    /// by zero everywhere; any conjunct still mentioning an upper-bound
    /// parameter is removed (its bound pushed to infinity).
    pub fn lu_abstraction(&self, classification: &LuClassification) -> Result<Pta, ModelError> {
        let LuClassification::Lu { lower, upper } = classification else {
            return Err(ModelError::NotLowerUpper);
        };
        let abstract_expr = |expr: &ParamExpr| -> Option<ParamExpr> {
            if expr.coeffs.keys().any(|p| upper.contains(p)) {
                return None;
            }
            debug_assert!(expr.coeffs.keys().all(|p| lower.contains(p)));
            // Remaining occurrences are lower-bound parameters: replaced
            // by zero, leaving the constant part.
            Some(ParamExpr::constant(expr.constant.clone()))
        };
        let abstract_clock_atoms = |atoms: &[ClockAtom]| -> Vec<ClockAtom> {
            atoms
                .iter()
                .filter_map(|atom| {
                    abstract_expr(&atom.bound).map(|bound| ClockAtom {
                        clock: atom.clock,
                        rel: atom.rel,
                        bound,
                    })
                })
                .collect()
        };
        let abstract_guard = |guard: &Guard| Guard {
            clock_atoms: abstract_clock_atoms(&guard.clock_atoms),
            param_atoms: guard
                .param_atoms
                .iter()
                .filter_map(|atom| {
                    abstract_expr(&atom.expr).map(|expr| ParamAtom { expr, rel: atom.rel })
                })
                .collect(),
            bool_tests: guard.bool_tests.clone(),
        };
        Ok(Pta {
            name: format!("{}_lu0inf", self.name),
            actions: self.actions.clone(),
            locations: self
                .locations
                .iter()
                .map(|l| Location {
                    name: l.name.clone(),
                    invariant: abstract_clock_atoms(&l.invariant),
                    private: l.private,
                })
                .collect(),
            initial: self.initial,
            clocks: self.clocks.clone(),
            params: Vec::new(),
            discretes: self.discretes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    source: e.source,
                    guard: abstract_guard(&e.guard),
                    action: e.action,
                    resets: e.resets.clone(),
                    bool_updates: e.bool_updates.clone(),
                    target: e.target,
                    private: e.private,
                })
                .collect(),
        })
    }

    pub fn render_clock_atom(&self, atom: &ClockAtom) -> String {
        format!(
            "{} {} {}",
            self.clocks[atom.clock],
            atom.rel.as_str(),
            self.render_param_expr(&atom.bound)
        )
    }

    pub fn render_param_expr(&self, expr: &ParamExpr) -> String {
        use num_traits::{One, Zero};
        let mut parts: Vec<String> = Vec::new();
        for (param, coeff) in &expr.coeffs {
            let name = &self.params[*param].0;
            if coeff.is_one() {
                parts.push(name.clone());
            } else {
                parts.push(format!("{}*{}", crate::rational::render_rat(coeff), name));
            }
        }
        if !expr.constant.is_zero() || parts.is_empty() {
            parts.push(crate::rational::render_rat(&expr.constant));
        }
        parts.join(" + ")
    }
}
