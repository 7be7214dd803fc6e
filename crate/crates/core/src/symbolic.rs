//! Parametric zone-graph exploration and reachability synthesis.
//!
//! Exploration is breadth-first with the model's edge order, so state
//! numbering and outputs are reproducible. A successor whose zone is
//! included in a zone already stored at the same location is pruned; a
//! larger successor never replaces a stored state.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::{
    ConstraintError, ConstraintSet, LinearTerm, Polyhedron, Relation, VarEnv,
};
use crate::pta::{LocId, Pta};

#[derive(Debug, Error)]
pub enum SymbolicError {
    #[error("initial invariant excludes time zero")]
    UnsatisfiableInitial,
    #[error("unknown target location {0}")]
    UnknownTarget(String),
    #[error("symbolic exploration requires discrete variables to be expanded")]
    UnexpandedDiscretes,
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// A location paired with the satisfiable zone under which it is reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicState {
    pub location: LocId,
    pub zone: Polyhedron,
}

/// Caps on exploration. `None` means unlimited.
#[derive(Debug, Clone, Default)]
pub struct ExplorationBudget {
    pub max_depth: Option<usize>,
    pub max_states: Option<usize>,
}

impl ExplorationBudget {
    pub fn unlimited() -> ExplorationBudget {
        ExplorationBudget::default()
    }
}

#[derive(Debug, Clone)]
pub struct ZoneGraph {
    pub states: Vec<SymbolicState>,
    /// `(source state, edge index, target state)`.
    pub transitions: Vec<(usize, usize, usize)>,
    pub initial: usize,
    /// True when the frontier was emptied within budget.
    pub complete: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ExploreOptions {
    pub budget: ExplorationBudget,
    /// Locations whose states are stored but never expanded.
    pub stop: BTreeSet<LocId>,
    /// Disabled only to cross-check that pruning does not change results.
    pub disable_subsumption: bool,
}

pub fn initial_state(pta: &Pta) -> Result<SymbolicState, SymbolicError> {
    let env = pta.var_env();
    initial_state_in(pta, &env)
}

fn initial_state_in(pta: &Pta, env: &Arc<VarEnv>) -> Result<SymbolicState, SymbolicError> {
    if !pta.discretes.is_empty() {
        return Err(SymbolicError::UnexpandedDiscretes);
    }
    let width = env.len();
    let invariant = pta.invariant_norm_atoms(pta.initial, env);
    // Elapse from the clock origin, which must itself satisfy the initial
    // invariant: an invariant excluding time zero leaves no runs at all.
    let origin = Polyhedron::universe(env.clone())
        .conjoin_norm((0..pta.clocks.len()).map(|c| {
            crate::constraint::Atom::normalize(
                width,
                &LinearTerm::var(pta.clock_var(c)),
                Relation::Eq,
            )
        }))
        .conjoin_norm(invariant.iter().cloned());
    let zone = origin.time_elapse().conjoin_norm(invariant);
    if zone.is_empty() {
        return Err(SymbolicError::UnsatisfiableInitial);
    }
    Ok(SymbolicState {
        location: pta.initial,
        zone,
    })
}

/// The successor zone along an edge:
/// time-elapse of (reset of (zone ∧ guard) ∧ target invariant), again
/// intersected with the target invariant. `None` when unsatisfiable.
pub fn successor(
    pta: &Pta,
    env: &Arc<VarEnv>,
    state: &SymbolicState,
    edge_index: usize,
) -> Option<SymbolicState> {
    let edge = &pta.edges[edge_index];
    debug_assert_eq!(edge.source, state.location);
    debug_assert!(edge.guard.bool_tests.is_empty());
    let invariant = pta.invariant_norm_atoms(edge.target, env);
    let zone = state
        .zone
        .conjoin_norm(pta.guard_norm_atoms(&edge.guard, env))
        .reset(&edge.resets.iter().map(|&c| pta.clock_var(c)).collect())
        .conjoin_norm(invariant.iter().cloned())
        .time_elapse()
        .conjoin_norm(invariant);
    if zone.is_empty() {
        return None;
    }
    Some(SymbolicState {
        location: edge.target,
        zone,
    })
}

/// Breadth-first zone-graph construction under the given options.
pub fn explore(pta: &Pta, opts: &ExploreOptions) -> Result<ZoneGraph, SymbolicError> {
    let env = pta.var_env();
    let init = initial_state_in(pta, &env)?;

    let mut states: Vec<SymbolicState> = Vec::new();
    let mut by_location: BTreeMap<LocId, Vec<usize>> = BTreeMap::new();
    let mut transitions: Vec<(usize, usize, usize)> = Vec::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut complete = true;

    states.push(init);
    by_location.entry(states[0].location).or_default().push(0);
    queue.push_back((0, 0));

    'bfs: while let Some((index, depth)) = queue.pop_front() {
        let location = states[index].location;
        if opts.stop.contains(&location) {
            continue;
        }
        for edge_index in 0..pta.edges.len() {
            if pta.edges[edge_index].source != location {
                continue;
            }
            let state = states[index].clone();
            let Some(next) = successor(pta, &env, &state, edge_index) else {
                continue;
            };
            // Subsumption: a successor included in a stored zone at the
            // same location is folded onto it.
            let mut merged = None;
            for &stored in by_location.get(&next.location).into_iter().flatten() {
                let covers = if opts.disable_subsumption {
                    states[stored].zone == next.zone
                } else {
                    states[stored].zone.includes(&next.zone)?
                };
                if covers {
                    merged = Some(stored);
                    break;
                }
            }
            if let Some(stored) = merged {
                transitions.push((index, edge_index, stored));
                continue;
            }
            if let Some(cap) = opts.budget.max_depth {
                if depth + 1 > cap {
                    complete = false;
                    continue;
                }
            }
            if let Some(cap) = opts.budget.max_states {
                if states.len() >= cap {
                    complete = false;
                    break 'bfs;
                }
            }
            let new_index = states.len();
            states.push(next);
            by_location
                .entry(states[new_index].location)
                .or_default()
                .push(new_index);
            transitions.push((index, edge_index, new_index));
            queue.push_back((new_index, depth + 1));
        }
    }

    Ok(ZoneGraph {
        states,
        transitions,
        initial: 0,
        complete,
    })
}

/// Reachability synthesis: the parameter valuations under which some
/// target location is reachable. The result is exact when exploration
/// reached a fixpoint within budget (`conclusive`), otherwise a sound
/// under-approximation.
pub fn efsynth(
    pta: &Pta,
    targets: &BTreeSet<LocId>,
    budget: &ExplorationBudget,
) -> Result<(ConstraintSet, bool), SymbolicError> {
    let opts = ExploreOptions {
        budget: budget.clone(),
        stop: targets.clone(),
        disable_subsumption: false,
    };
    efsynth_with(pta, targets, &opts)
}

pub fn efsynth_with(
    pta: &Pta,
    targets: &BTreeSet<LocId>,
    opts: &ExploreOptions,
) -> Result<(ConstraintSet, bool), SymbolicError> {
    for &t in targets {
        if t >= pta.locations.len() {
            return Err(SymbolicError::UnknownTarget(format!("#{t}")));
        }
    }
    let mut opts = opts.clone();
    opts.stop.extend(targets.iter().copied());
    let graph = explore(pta, &opts)?;
    let env = pta.var_env();
    let pieces: Vec<Polyhedron> = graph
        .states
        .iter()
        .filter(|s| targets.contains(&s.location))
        .map(|s| s.zone.project_params())
        .collect();
    let constraint = ConstraintSet::from_polys(env, pieces)?;
    Ok((constraint, graph.complete))
}

/// Deterministic text listing of a zone graph, for golden comparisons.
pub fn render_zone_graph(pta: &Pta, graph: &ZoneGraph) -> String {
    let mut out = String::new();
    for (i, state) in graph.states.iter().enumerate() {
        out.push_str(&format!(
            "s{i} {}: {}\n",
            pta.locations[state.location].name,
            state.zone.render()
        ));
    }
    for (from, edge, to) in &graph.transitions {
        out.push_str(&format!("s{from} -e{edge}-> s{to}\n"));
    }
    if !graph.complete {
        out.push_str("incomplete: budget exhausted\n");
    }
    out
}

