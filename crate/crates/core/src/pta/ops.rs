//! Model transformations: parameter instantiation, synchronized product,
//! and compilation of boolean discrete variables into locations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Signed;

use super::{
    ActionId, ClockAtom, DiscreteId, Edge, Guard, LocId, Location, ModelError, ParamAtom,
    ParamRole, Pta,
};
use crate::rational::Rat;

impl Pta {
    /// Substitutes the named parameters by constants everywhere and drops
    /// them from the declaration list. A total valuation yields a plain
    /// timed automaton.
    pub fn instantiate_model(&self, bindings: &BTreeMap<String, Rat>) -> Result<Pta, ModelError> {
        let mut by_id: BTreeMap<usize, Rat> = BTreeMap::new();
        for (name, value) in bindings {
            let id = self
                .param_id(name)
                .ok_or_else(|| ModelError::UnknownParameter(name.clone()))?;
            if value.is_negative() {
                return Err(ModelError::NegativeParameter(name.clone()));
            }
            by_id.insert(id, value.clone());
        }
        let mut remap: Vec<Option<usize>> = Vec::with_capacity(self.params.len());
        let mut params = Vec::new();
        for (id, (name, role)) in self.params.iter().enumerate() {
            if by_id.contains_key(&id) {
                remap.push(None);
            } else {
                remap.push(Some(params.len()));
                params.push((name.clone(), *role));
            }
        }
        let subst_clock_atom = |atom: &ClockAtom| ClockAtom {
            clock: atom.clock,
            rel: atom.rel,
            bound: atom.bound.substitute(&by_id, &remap),
        };
        let subst_guard = |guard: &Guard| Guard {
            clock_atoms: guard.clock_atoms.iter().map(subst_clock_atom).collect(),
            param_atoms: guard
                .param_atoms
                .iter()
                .map(|a| ParamAtom {
                    expr: a.expr.substitute(&by_id, &remap),
                    rel: a.rel,
                })
                .collect(),
            bool_tests: guard.bool_tests.clone(),
        };
        Ok(Pta {
            name: self.name.clone(),
            actions: self.actions.clone(),
            locations: self
                .locations
                .iter()
                .map(|l| Location {
                    name: l.name.clone(),
                    invariant: l.invariant.iter().map(subst_clock_atom).collect(),
                    private: l.private,
                })
                .collect(),
            initial: self.initial,
            clocks: self.clocks.clone(),
            params,
            discretes: self.discretes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    source: e.source,
                    guard: subst_guard(&e.guard),
                    action: e.action,
                    resets: e.resets.clone(),
                    bool_updates: e.bool_updates.clone(),
                    target: e.target,
                    private: e.private,
                })
                .collect(),
        })
    }

    /// Synchronized product: strong broadcast on `sync`, interleaving for
    /// everything else. Clock and discrete-variable names must be disjoint
    /// across components, except for clocks explicitly allowed to be
    /// shared; parameters of the same name are identified.
    pub fn product(
        components: &[Pta],
        sync: &BTreeSet<String>,
        shared_clocks: &BTreeSet<String>,
    ) -> Result<Pta, ModelError> {
        assert!(!components.is_empty());
        if components.len() == 1 {
            return Ok(components[0].clone());
        }

        let mut actions: Vec<String> = Vec::new();
        for c in components {
            for a in &c.actions {
                if !actions.contains(a) {
                    actions.push(a.clone());
                }
            }
        }

        let mut clocks: Vec<String> = Vec::new();
        let mut clock_remap: Vec<Vec<usize>> = Vec::new();
        for c in components {
            let mut remap = Vec::with_capacity(c.clocks.len());
            for name in &c.clocks {
                if let Some(existing) = clocks.iter().position(|n| n == name) {
                    if !shared_clocks.contains(name) {
                        return Err(ModelError::NameCollision(name.clone()));
                    }
                    remap.push(existing);
                } else {
                    remap.push(clocks.len());
                    clocks.push(name.clone());
                }
            }
            clock_remap.push(remap);
        }

        let mut params: Vec<(String, ParamRole)> = Vec::new();
        let mut param_remap: Vec<Vec<usize>> = Vec::new();
        for c in components {
            let mut remap = Vec::with_capacity(c.params.len());
            for (name, role) in &c.params {
                if let Some(existing) = params.iter().position(|(n, _)| n == name) {
                    remap.push(existing);
                } else {
                    remap.push(params.len());
                    params.push((name.clone(), *role));
                }
            }
            param_remap.push(remap);
        }

        let mut discretes: Vec<(String, bool)> = Vec::new();
        let mut discrete_remap: Vec<Vec<usize>> = Vec::new();
        for c in components {
            let mut remap = Vec::with_capacity(c.discretes.len());
            for (name, init) in &c.discretes {
                if discretes.iter().any(|(n, _)| n == name) {
                    return Err(ModelError::NameCollision(name.clone()));
                }
                remap.push(discretes.len());
                discretes.push((name.clone(), *init));
            }
            discrete_remap.push(remap);
        }

        // Locations are tuples, enumerated with the last component varying
        // fastest; invariants are conjoined.
        let dims: Vec<usize> = components.iter().map(|c| c.locations.len()).collect();
        let flatten = |tuple: &[LocId]| -> LocId {
            let mut idx = 0;
            for (i, &l) in tuple.iter().enumerate() {
                idx = idx * dims[i] + l;
            }
            idx
        };
        let total: usize = dims.iter().product();
        let mut locations = Vec::with_capacity(total);
        let mut tuple = vec![0usize; components.len()];
        loop {
            let name = tuple
                .iter()
                .enumerate()
                .map(|(i, &l)| components[i].locations[l].name.clone())
                .collect::<Vec<_>>()
                .join("__");
            let mut invariant = Vec::new();
            let mut private = false;
            for (i, &l) in tuple.iter().enumerate() {
                for atom in &components[i].locations[l].invariant {
                    invariant.push(remap_clock_atom(atom, &clock_remap[i], &param_remap[i]));
                }
                private |= components[i].locations[l].private;
            }
            locations.push(Location {
                name,
                invariant,
                private,
            });
            // Advance the mixed-radix counter.
            let mut pos = components.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < dims[pos] {
                    break;
                }
                tuple[pos] = 0;
            }
            if tuple.iter().all(|&l| l == 0) {
                break;
            }
        }

        let initial: Vec<LocId> = components.iter().map(|c| c.initial).collect();

        let remap_guard = |guard: &Guard, i: usize| Guard {
            clock_atoms: guard
                .clock_atoms
                .iter()
                .map(|a| remap_clock_atom(a, &clock_remap[i], &param_remap[i]))
                .collect(),
            param_atoms: guard
                .param_atoms
                .iter()
                .map(|a| ParamAtom {
                    expr: a.expr.remap(&param_remap[i]),
                    rel: a.rel,
                })
                .collect(),
            bool_tests: guard
                .bool_tests
                .iter()
                .map(|(d, v)| (discrete_remap[i][*d], *v))
                .collect(),
        };

        let mut edges = Vec::new();

        // Interleaved edges: any action outside the synchronized set, and
        // every internal edge, fires alone while the other components stay.
        for (i, c) in components.iter().enumerate() {
            for e in &c.edges {
                let synced = e
                    .action
                    .map(|a| sync.contains(&c.actions[a]))
                    .unwrap_or(false);
                if synced {
                    continue;
                }
                for_each_context(&dims, i, |context| {
                    let mut src = context.to_vec();
                    let mut tgt = context.to_vec();
                    src[i] = e.source;
                    tgt[i] = e.target;
                    edges.push(Edge {
                        source: flatten(&src),
                        guard: remap_guard(&e.guard, i),
                        action: e.action.map(|a| {
                            actions
                                .iter()
                                .position(|n| n == &c.actions[a])
                                .expect("action collected")
                        }),
                        resets: e.resets.iter().map(|&cl| clock_remap[i][cl]).collect(),
                        bool_updates: e
                            .bool_updates
                            .iter()
                            .map(|(d, v)| (discrete_remap[i][*d], *v))
                            .collect(),
                        target: flatten(&tgt),
                        private: e.private,
                    });
                });
            }
        }

        // Synchronized edges: one product edge per combination of edges
        // labeled by the action, across the components declaring it.
        for sync_action in sync {
            let action_id = match actions.iter().position(|n| n == sync_action) {
                Some(id) => id,
                None => continue,
            };
            let participants: Vec<usize> = components
                .iter()
                .enumerate()
                .filter(|(_, c)| c.actions.iter().any(|a| a == sync_action))
                .map(|(i, _)| i)
                .collect();
            if participants.is_empty() {
                continue;
            }
            let edge_choices: Vec<Vec<&Edge>> = participants
                .iter()
                .map(|&i| {
                    components[i]
                        .edges
                        .iter()
                        .filter(|e| {
                            e.action
                                .map(|a| &components[i].actions[a] == sync_action)
                                .unwrap_or(false)
                        })
                        .collect()
                })
                .collect();
            if edge_choices.iter().any(|choices| choices.is_empty()) {
                continue;
            }
            let bystanders: Vec<usize> = (0..components.len())
                .filter(|i| !participants.contains(i))
                .collect();
            for combination in cartesian(&edge_choices) {
                for_each_assignment(&dims, &bystanders, |context| {
                    let mut src = vec![0usize; components.len()];
                    let mut tgt = vec![0usize; components.len()];
                    for (&i, l) in bystanders.iter().zip(context) {
                        src[i] = *l;
                        tgt[i] = *l;
                    }
                    let mut guard = Guard::always();
                    let mut resets = BTreeSet::new();
                    let mut bool_updates = Vec::new();
                    let mut private = false;
                    for (slot, &i) in participants.iter().enumerate() {
                        let e = combination[slot];
                        src[i] = e.source;
                        tgt[i] = e.target;
                        let g = remap_guard(&e.guard, i);
                        guard.clock_atoms.extend(g.clock_atoms);
                        guard.param_atoms.extend(g.param_atoms);
                        guard.bool_tests.extend(g.bool_tests);
                        resets.extend(e.resets.iter().map(|&cl| clock_remap[i][cl]));
                        bool_updates.extend(
                            e.bool_updates
                                .iter()
                                .map(|(d, v)| (discrete_remap[i][*d], *v)),
                        );
                        private |= e.private;
                    }
                    edges.push(Edge {
                        source: flatten(&src),
                        guard,
                        action: Some(action_id),
                        resets,
                        bool_updates,
                        target: flatten(&tgt),
                        private,
                    });
                });
            }
        }

        // Group edges by source location (keeping generation order within
        // a group), the shape the serializer emits and the parser rebuilds.
        edges.sort_by_key(|e| e.source);

        // Renumber actions by first use and drop the unused ones, again
        // matching what a reparse of the serialized product reconstructs.
        let mut first_use: Vec<ActionId> = Vec::new();
        for e in &edges {
            if let Some(a) = e.action {
                if !first_use.contains(&a) {
                    first_use.push(a);
                }
            }
        }
        let actions: Vec<String> = first_use.iter().map(|&a| actions[a].clone()).collect();
        for e in &mut edges {
            if let Some(a) = e.action.as_mut() {
                *a = first_use.iter().position(|&old| old == *a).expect("used action");
            }
        }

        let product = Pta {
            name: components
                .iter()
                .map(|c| c.name.clone())
                .collect::<Vec<_>>()
                .join("__"),
            actions,
            locations,
            initial: flatten(&initial),
            clocks,
            params,
            discretes,
            edges,
        };
        product.validate()?;
        Ok(product)
    }

    /// Compiles boolean discrete variables away: locations become
    /// (location, assignment) pairs reachable from the initial assignment.
    pub fn expand_discrete(&self) -> DiscreteExpansion {
        if self.discretes.is_empty() {
            return DiscreteExpansion {
                pta: self.clone(),
                base: (0..self.locations.len()).collect(),
                assignment: vec![Vec::new(); self.locations.len()],
            };
        }
        let initial_assignment: Vec<bool> = self.discretes.iter().map(|(_, v)| *v).collect();
        let mut index: BTreeMap<(LocId, Vec<bool>), LocId> = BTreeMap::new();
        let mut states: Vec<(LocId, Vec<bool>)> = Vec::new();
        let mut queue = VecDeque::new();
        let start = (self.initial, initial_assignment);
        index.insert(start.clone(), 0);
        states.push(start.clone());
        queue.push_back(start);
        let mut edges_out: Vec<Edge> = Vec::new();
        while let Some((loc, assignment)) = queue.pop_front() {
            let from = index[&(loc, assignment.clone())];
            for e in &self.edges {
                if e.source != loc {
                    continue;
                }
                if e.guard
                    .bool_tests
                    .iter()
                    .any(|(d, expected)| assignment[*d] != *expected)
                {
                    continue;
                }
                let mut next = assignment.clone();
                for (d, v) in &e.bool_updates {
                    next[*d] = *v;
                }
                let key = (e.target, next.clone());
                let to = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        index.insert(key.clone(), id);
                        states.push(key.clone());
                        queue.push_back(key);
                        id
                    }
                };
                edges_out.push(Edge {
                    source: from,
                    guard: Guard {
                        clock_atoms: e.guard.clock_atoms.clone(),
                        param_atoms: e.guard.param_atoms.clone(),
                        bool_tests: Vec::new(),
                    },
                    action: e.action,
                    resets: e.resets.clone(),
                    bool_updates: Vec::new(),
                    target: to,
                    private: e.private,
                });
            }
        }
        let locations: Vec<Location> = states
            .iter()
            .map(|(loc, assignment)| Location {
                name: self.expanded_location_name(*loc, assignment),
                invariant: self.locations[*loc].invariant.clone(),
                private: self.locations[*loc].private,
            })
            .collect();
        let pta = Pta {
            name: self.name.clone(),
            actions: self.actions.clone(),
            locations,
            initial: 0,
            clocks: self.clocks.clone(),
            params: self.params.clone(),
            discretes: Vec::new(),
            edges: edges_out,
        };
        DiscreteExpansion {
            pta,
            base: states.iter().map(|(loc, _)| *loc).collect(),
            assignment: states.iter().map(|(_, a)| a.clone()).collect(),
        }
    }

    fn expanded_location_name(&self, loc: LocId, assignment: &[bool]) -> String {
        let flags = self
            .discretes
            .iter()
            .zip(assignment)
            .map(|((name, _), v)| format!("{name}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        format!("{}{{{}}}", self.locations[loc].name, flags)
    }
}

/// Result of [`Pta::expand_discrete`]: the expanded model plus, for each
/// expanded location, its base location and discrete assignment.
#[derive(Debug, Clone)]
pub struct DiscreteExpansion {
    pub pta: Pta,
    pub base: Vec<LocId>,
    pub assignment: Vec<Vec<bool>>,
}

impl DiscreteExpansion {
    /// Expanded locations over `base` where `var` carries `value`. For
    /// models without discrete variables the value filter is vacuous.
    pub fn locations_where(
        &self,
        base: LocId,
        var: Option<DiscreteId>,
        value: bool,
    ) -> BTreeSet<LocId> {
        (0..self.base.len())
            .filter(|&i| {
                self.base[i] == base
                    && var
                        .map(|d| self.assignment[i].get(d) == Some(&value))
                        .unwrap_or(true)
            })
            .collect()
    }

    pub fn locations_of_base(&self, base: LocId) -> BTreeSet<LocId> {
        (0..self.base.len()).filter(|&i| self.base[i] == base).collect()
    }
}

fn remap_clock_atom(atom: &ClockAtom, clock_remap: &[usize], param_remap: &[usize]) -> ClockAtom {
    ClockAtom {
        clock: clock_remap[atom.clock],
        rel: atom.rel,
        bound: atom.bound.remap(param_remap),
    }
}

/// Invokes `f` with every assignment of locations to all components other
/// than `active`.
fn for_each_context(dims: &[usize], active: usize, mut f: impl FnMut(&[LocId])) {
    let others: Vec<usize> = (0..dims.len()).filter(|&i| i != active).collect();
    for_each_assignment(dims, &others, |assignment| {
        let mut context = vec![0usize; dims.len()];
        for (&i, &l) in others.iter().zip(assignment) {
            context[i] = l;
        }
        f(&context);
    });
}

fn for_each_assignment(dims: &[usize], positions: &[usize], mut f: impl FnMut(&[LocId])) {
    let mut assignment = vec![0usize; positions.len()];
    loop {
        f(&assignment);
        let mut pos = positions.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < dims[positions[pos]] {
                break;
            }
            assignment[pos] = 0;
        }
    }
}

fn cartesian<'a>(choices: &'a [Vec<&'a Edge>]) -> Vec<Vec<&'a Edge>> {
    let mut out: Vec<Vec<&Edge>> = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &option in options {
                let mut row = prefix.clone();
                row.push(option);
                next.push(row);
            }
        }
        out = next;
    }
    out
}
