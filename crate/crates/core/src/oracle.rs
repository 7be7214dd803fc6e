//! Concrete semantics of an instantiated model and a bounded, grid-valued
//! brute-force explorer for duration sets. This is the independent route
//! used to validate the symbolic engine; it makes no completeness claim
//! beyond its grid and bounds.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::constraint::Relation;
use crate::pta::{ClockAtom, Edge, LocId, ModelError, Pta};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum StepRejection {
    #[error("invariant violated")]
    InvariantViolated,
    #[error("guard unsatisfied")]
    GuardUnsatisfied,
}

/// A concrete state: location, discrete assignment, clock values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConcreteState {
    pub location: LocId,
    pub bools: Vec<bool>,
    pub clocks: Vec<Rat>,
}

impl ConcreteState {
    pub fn initial(pta: &Pta) -> ConcreteState {
        ConcreteState {
            location: pta.initial,
            bools: pta.discretes.iter().map(|(_, v)| *v).collect(),
            clocks: vec![Rat::zero(); pta.clocks.len()],
        }
    }
}

/// An alternating run: the initial state followed by (edge, delay) steps.
#[derive(Debug, Clone, Default)]
pub struct Run {
    pub steps: Vec<(usize, Rat)>,
}

impl Run {
    /// Total duration: the sum of the delays.
    pub fn duration(&self) -> Rat {
        self.steps.iter().map(|(_, d)| d).sum()
    }
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub grid_denominator: u64,
    pub time_bound: Rat,
    pub step_bound: usize,
}

impl OracleOptions {
    /// Grid 1/2, time bound twice the largest guard constant, step bound
    /// four times the number of expanded locations.
    pub fn defaults_for(pta: &Pta) -> OracleOptions {
        let mut largest = Rat::one();
        let mut consider = |atom: &ClockAtom| {
            let magnitude = atom.bound.constant.abs();
            if magnitude > largest {
                largest = magnitude;
            }
        };
        for loc in &pta.locations {
            loc.invariant.iter().for_each(&mut consider);
        }
        for edge in &pta.edges {
            edge.guard.clock_atoms.iter().for_each(&mut consider);
        }
        let expanded = pta.locations.len() << pta.discretes.len();
        OracleOptions {
            grid_denominator: 2,
            time_bound: largest * Rat::from_integer(2.into()),
            step_bound: expanded * 4,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OracleResult {
    pub visit_durations: BTreeSet<Rat>,
    pub avoid_durations: BTreeSet<Rat>,
    /// False when the step or time bound truncated exploration that could
    /// have continued.
    pub exhausted: bool,
}

fn ground(atom: &ClockAtom) -> Result<&Rat, ModelError> {
    if atom.bound.is_constant() {
        Ok(&atom.bound.constant)
    } else {
        Err(ModelError::Invalid(
            "concrete exploration requires a fully instantiated model".into(),
        ))
    }
}

fn holds(value: &Rat, rel: Relation, bound: &Rat) -> bool {
    match rel {
        Relation::Lt => value < bound,
        Relation::Le => value <= bound,
        Relation::Eq => value == bound,
        Relation::Ge => value >= bound,
        Relation::Gt => value > bound,
    }
}

/// One delay-then-edge transition of the timed transition system.
///
/// Invariants are conjunctions of one-sided clock bounds, so holding at
/// both endpoints of the delay implies holding throughout; the source
/// state is valid by construction, leaving the endpoint check.
pub fn step(
    pta: &Pta,
    state: &ConcreteState,
    edge_index: usize,
    delay: &Rat,
) -> Result<ConcreteState, StepRejection> {
    let edge = &pta.edges[edge_index];
    assert_eq!(edge.source, state.location, "edge leaves another location");
    assert!(!delay.is_negative());

    let delayed: Vec<Rat> = state.clocks.iter().map(|c| c + delay).collect();
    for atom in &pta.locations[state.location].invariant {
        let bound = ground(atom).expect("instantiated model");
        if !holds(&delayed[atom.clock], atom.rel, bound) {
            return Err(StepRejection::InvariantViolated);
        }
    }
    for (var, expected) in &edge.guard.bool_tests {
        if state.bools[*var] != *expected {
            return Err(StepRejection::GuardUnsatisfied);
        }
    }
    for atom in &edge.guard.param_atoms {
        if !atom.expr.is_constant() || !atom.rel.eval(&atom.expr.constant) {
            return Err(StepRejection::GuardUnsatisfied);
        }
    }
    for atom in &edge.guard.clock_atoms {
        let bound = ground(atom).expect("instantiated model");
        if !holds(&delayed[atom.clock], atom.rel, bound) {
            return Err(StepRejection::GuardUnsatisfied);
        }
    }
    let mut clocks = delayed;
    for &reset in &edge.resets {
        clocks[reset] = Rat::zero();
    }
    for atom in &pta.locations[edge.target].invariant {
        let bound = ground(atom).expect("instantiated model");
        if !holds(&clocks[atom.clock], atom.rel, bound) {
            return Err(StepRejection::InvariantViolated);
        }
    }
    let mut bools = state.bools.clone();
    for (var, value) in &edge.bool_updates {
        bools[*var] = *value;
    }
    Ok(ConcreteState {
        location: edge.target,
        bools,
        clocks,
    })
}

/// Breadth-first enumeration of grid-delay runs, stopping each run at its
/// first visit of `final_loc` and filing the duration under the visiting
/// or avoiding set. A run counts as visiting once it takes an edge into a
/// private location or an edge marked private, mirroring how the flag
/// construction of the synthesis pipeline records visits.
pub fn explore_durations(
    pta: &Pta,
    priv_locs: &BTreeSet<LocId>,
    priv_edges: &BTreeSet<usize>,
    final_loc: LocId,
    opts: &OracleOptions,
) -> Result<OracleResult, ModelError> {
    if !pta.params.is_empty() {
        return Err(ModelError::Invalid(
            "concrete exploration requires a fully instantiated model".into(),
        ));
    }
    for loc in &pta.locations {
        for atom in &loc.invariant {
            ground(atom)?;
        }
    }
    for edge in &pta.edges {
        for atom in &edge.guard.clock_atoms {
            ground(atom)?;
        }
    }

    let mut result = OracleResult {
        exhausted: true,
        ..OracleResult::default()
    };
    let start = ConcreteState::initial(pta);
    for atom in &pta.locations[start.location].invariant {
        if !holds(&start.clocks[atom.clock], atom.rel, ground(atom)?) {
            return Ok(result);
        }
    }

    let mut queue: VecDeque<(ConcreteState, bool, Rat, usize)> = VecDeque::new();
    queue.push_back((start, false, Rat::zero(), 0));
    while let Some((state, visited, total, steps)) = queue.pop_front() {
        if state.location == final_loc {
            if visited {
                result.visit_durations.insert(total);
            } else {
                result.avoid_durations.insert(total);
            }
            continue;
        }
        let mut successors: Vec<(ConcreteState, bool, Rat)> = Vec::new();
        for (edge_index, edge) in pta.edges.iter().enumerate() {
            if edge.source != state.location {
                continue;
            }
            let remaining = &opts.time_bound - &total;
            for delay in candidate_delays(pta, &state, edge, opts.grid_denominator, &remaining) {
                if let Ok(next) = step(pta, &state, edge_index, &delay) {
                    let next_visited = visited
                        || priv_locs.contains(&edge.target)
                        || priv_edges.contains(&edge_index);
                    successors.push((next, next_visited, &total + &delay));
                }
            }
        }
        if steps == opts.step_bound {
            if !successors.is_empty() {
                result.exhausted = false;
            }
            continue;
        }
        for (next, next_visited, next_total) in successors {
            queue.push_back((next, next_visited, next_total, steps + 1));
        }
    }
    Ok(result)
}

/// Grid delays for which the edge can fire from `state`: the window cut
/// out by the source invariant, the guard, the target invariant on
/// non-reset clocks, and the remaining time budget.
fn candidate_delays(
    pta: &Pta,
    state: &ConcreteState,
    edge: &Edge,
    denominator: u64,
    remaining: &Rat,
) -> Vec<Rat> {
    if remaining.is_negative() {
        return Vec::new();
    }
    let mut lo = Rat::zero();
    let mut lo_strict = false;
    let mut hi = remaining.clone();
    let mut hi_strict = false;

    let mut narrow = |value: &Rat, rel: Relation, bound: &Rat| -> bool {
        // value + d ⋈ bound, as a window on d.
        let offset = bound - value;
        match rel {
            Relation::Le | Relation::Lt => {
                let strict = rel == Relation::Lt;
                if offset < hi || (offset == hi && strict) {
                    hi = offset;
                    hi_strict = strict;
                }
            }
            Relation::Ge | Relation::Gt => {
                let strict = rel == Relation::Gt;
                if offset > lo || (offset == lo && strict) {
                    lo = offset;
                    lo_strict = strict;
                }
            }
            Relation::Eq => {
                if offset > lo || (offset == lo && lo_strict) {
                    lo = offset.clone();
                    lo_strict = false;
                }
                if offset < hi || (offset == hi && hi_strict) {
                    hi = offset;
                    hi_strict = false;
                }
            }
        }
        lo < hi || (lo == hi && !lo_strict && !hi_strict)
    };

    for atom in &pta.locations[state.location].invariant {
        let bound = ground(atom).expect("instantiated model");
        if !narrow(&state.clocks[atom.clock], atom.rel, bound) {
            return Vec::new();
        }
    }
    for atom in &edge.guard.clock_atoms {
        let bound = ground(atom).expect("instantiated model");
        if !narrow(&state.clocks[atom.clock], atom.rel, bound) {
            return Vec::new();
        }
    }
    for atom in &pta.locations[edge.target].invariant {
        if edge.resets.contains(&atom.clock) {
            continue;
        }
        let bound = ground(atom).expect("instantiated model");
        if !narrow(&state.clocks[atom.clock], atom.rel, bound) {
            return Vec::new();
        }
    }

    let step_size = Rat::new(1.into(), denominator.into());
    let mut k = (&lo / &step_size).ceil();
    if &k * &step_size == lo && lo_strict {
        k += Rat::one();
    }
    let mut out = Vec::new();
    loop {
        let delay = &k * &step_size;
        if delay > hi || (delay == hi && hi_strict) {
            break;
        }
        out.push(delay);
        k += Rat::one();
    }
    out
}
