//! Timed-opacity analyses.
//!
//! The pipeline enriches the model with a visit flag, an absolute clock
//! and an execution-time parameter, self-composes it synchronized on
//! termination, and reduces opacity questions to reachability synthesis:
//! a valuation is kept exactly when one run of the measured duration
//! reaches the final location having visited the private designation and
//! another run of the same duration reaches it without the visit.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::constraint::{
    to_intervals, ConstraintError, ConstraintSet, DurationIntervals, VarId,
};
use crate::pta::{
    ClockAtom, DiscreteExpansion, LocId, LuClassification, ModelError, ParamExpr, ParamRole, Pta,
};
use crate::rational::Rat;
use crate::symbolic::{efsynth_with, ExplorationBudget, ExploreOptions, SymbolicError};

/// Names introduced by [`enrich`]; the input model must not use them.
pub const FLAG_NAME: &str = "b";
pub const ABS_CLOCK: &str = "x_abs";
pub const ABS_PARAM: &str = "p_abs";
pub const FINISH_ACTION: &str = "finish";

#[derive(Debug, Error)]
pub enum OpacityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// An opacity question: which execution times (and, for parametric
/// models, internal timings) leave the private designation hidden from an
/// attacker observing only total execution time.
#[derive(Debug, Clone)]
pub struct OpacityProblem {
    pub model: Pta,
    pub private_locations: BTreeSet<LocId>,
    pub private_edges: BTreeSet<usize>,
    pub final_location: LocId,
    pub bindings: BTreeMap<String, Rat>,
    /// Parameter names kept in synthesis output; the execution-time
    /// parameter is always kept. `None` keeps the shared parameters.
    pub projection: Option<BTreeSet<String>>,
}

impl OpacityProblem {
    /// Builds a problem from the model's own private markers plus a final
    /// location name.
    pub fn new(model: Pta, final_location: &str) -> Result<OpacityProblem, ModelError> {
        let final_location = model
            .location_id(final_location)
            .ok_or_else(|| ModelError::UnknownLocation(final_location.to_string()))?;
        Ok(OpacityProblem {
            private_locations: model.private_locations(),
            private_edges: model.private_edges(),
            model,
            final_location,
            bindings: BTreeMap::new(),
            projection: None,
        })
    }

    pub fn mark_private(&mut self, location: &str) -> Result<(), ModelError> {
        let id = self
            .model
            .location_id(location)
            .ok_or_else(|| ModelError::UnknownLocation(location.to_string()))?;
        self.private_locations.insert(id);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpacityStatus {
    Opaque,
    NotOpaque,
    Inconclusive,
}

impl OpacityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OpacityStatus::Opaque => "Opaque",
            OpacityStatus::NotOpaque => "NotOpaque",
            OpacityStatus::Inconclusive => "Inconclusive",
        }
    }
}

/// Duration sets of the runs visiting and avoiding the private
/// designation, their intersection, and the equality verdict.
#[derive(Debug, Clone)]
pub struct OpacityVerdict {
    pub status: OpacityStatus,
    pub visit: DurationIntervals,
    pub avoid: DurationIntervals,
    pub opaque_times: DurationIntervals,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub constraint: ConstraintSet,
    pub conclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmptinessResult {
    Empty,
    NonEmpty {
        witness: BTreeMap<String, Rat>,
        witness_duration: Rat,
    },
    NotApplicable {
        reason: String,
    },
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct EmptinessOutcome {
    pub result: EmptinessResult,
    /// Set when the model compares parameters with each other; the
    /// lower/upper classification does not inspect such atoms.
    pub note: Option<String>,
}

/// Adds the visit flag, the never-reset absolute clock with its
/// execution-time parameter, and the termination action: the flag is set
/// on every edge into a private location and on every edge marked
/// private; every edge into the final location is guarded by
/// `x_abs = p_abs` and synchronizes on `finish`.
pub fn enrich(
    model: &Pta,
    private_locations: &BTreeSet<LocId>,
    private_edges: &BTreeSet<usize>,
    final_location: LocId,
) -> Result<Pta, ModelError> {
    for name in [FLAG_NAME, ABS_CLOCK, ABS_PARAM, FINISH_ACTION] {
        if model.has_symbol(name) {
            return Err(ModelError::NameCollision(name.to_string()));
        }
    }
    let mut enriched = model.clone();
    let flag = enriched.discretes.len();
    enriched.discretes.push((FLAG_NAME.to_string(), false));
    let abs_clock = enriched.clocks.len();
    enriched.clocks.push(ABS_CLOCK.to_string());
    let abs_param = enriched.params.len();
    enriched
        .params
        .push((ABS_PARAM.to_string(), ParamRole::Shared));
    let finish = enriched.actions.len();
    enriched.actions.push(FINISH_ACTION.to_string());

    for (index, edge) in enriched.edges.iter_mut().enumerate() {
        if private_locations.contains(&edge.target) || private_edges.contains(&index) {
            edge.bool_updates.push((flag, true));
        }
        if edge.target == final_location {
            edge.guard.clock_atoms.push(ClockAtom {
                clock: abs_clock,
                rel: crate::constraint::Relation::Eq,
                bound: ParamExpr::param(abs_param),
            });
            edge.action = Some(finish);
        }
    }
    Ok(enriched)
}

/// Product of the enriched model with a renamed copy of itself,
/// synchronized on the termination action. The absolute clock and the
/// execution-time parameter are shared between the copies (the clock is
/// never reset and both copies finish together); input-role parameters
/// are renamed per copy, shared-role parameters are common.
pub fn self_compose(enriched: &Pta) -> Result<Pta, ModelError> {
    let mut copy = enriched.clone();
    copy.name = format!("{}_2", enriched.name);
    for loc in &mut copy.locations {
        loc.name = format!("{}_2", loc.name);
    }
    for clock in &mut copy.clocks {
        if clock != ABS_CLOCK {
            *clock = format!("{clock}_2");
        }
    }
    for (name, _) in &mut copy.discretes {
        *name = format!("{name}_2");
    }
    for (name, role) in &mut copy.params {
        if *role == ParamRole::Input {
            *name = format!("{name}_2");
        }
    }
    Pta::product(
        &[enriched.clone(), copy],
        &BTreeSet::from([FINISH_ACTION.to_string()]),
        &BTreeSet::from([ABS_CLOCK.to_string()]),
    )
}

struct Prepared {
    expansion: DiscreteExpansion,
    abs_param_var: VarId,
}

fn prepare(model: &Pta) -> Result<Prepared, OpacityError> {
    let expansion = model.expand_discrete();
    let env = expansion.pta.var_env();
    let abs_param_var = env
        .lookup(ABS_PARAM)
        .expect("enriched model declares the execution-time parameter");
    Ok(Prepared {
        expansion,
        abs_param_var,
    })
}

/// Synthesis of internal timings and execution times preserving opacity
/// (the full parametric analysis).
pub fn synth_opacity(
    problem: &OpacityProblem,
    budget: &ExplorationBudget,
) -> Result<SynthesisResult, OpacityError> {
    synth_opacity_goal(problem, budget, false)
}

/// `swap_goal` flips which copy must have visited the private
/// designation; the two synthesis goals are symmetric.
pub fn synth_opacity_goal(
    problem: &OpacityProblem,
    budget: &ExplorationBudget,
    swap_goal: bool,
) -> Result<SynthesisResult, OpacityError> {
    let model = problem.model.instantiate_model(&problem.bindings)?;
    let enriched = enrich(
        &model,
        &problem.private_locations,
        &problem.private_edges,
        problem.final_location,
    )?;
    let composed = self_compose(&enriched)?;
    let prepared = prepare(&composed)?;
    let expansion = &prepared.expansion;

    // Product locations are pairs enumerated with the copy varying
    // fastest: composed id = first * n + second.
    let n = enriched.locations.len();
    let final_pair = problem.final_location * n + problem.final_location;
    let stop: BTreeSet<LocId> = (0..expansion.base.len())
        .filter(|&i| {
            let base = expansion.base[i];
            base / n == problem.final_location || base % n == problem.final_location
        })
        .collect();

    let flag_first = composed
        .discrete_id(FLAG_NAME)
        .expect("first copy carries the visit flag");
    let flag_second = composed
        .discrete_id(&format!("{FLAG_NAME}_2"))
        .expect("second copy carries the renamed visit flag");
    let (want_first, want_second) = if swap_goal {
        (false, true)
    } else {
        (true, false)
    };
    let targets: BTreeSet<LocId> = (0..expansion.base.len())
        .filter(|&i| {
            expansion.base[i] == final_pair
                && expansion.assignment[i][flag_first] == want_first
                && expansion.assignment[i][flag_second] == want_second
        })
        .collect();

    let opts = ExploreOptions {
        budget: budget.clone(),
        stop,
        disable_subsumption: false,
    };
    let (raw, conclusive) = efsynth_with(&expansion.pta, &targets, &opts)?;

    // Keep the requested parameters plus the execution-time parameter;
    // by default the shared ones.
    let env = expansion.pta.var_env();
    let keep: BTreeSet<String> = match &problem.projection {
        Some(names) => {
            let mut keep: BTreeSet<String> = names.clone();
            keep.insert(ABS_PARAM.to_string());
            keep
        }
        None => composed
            .params
            .iter()
            .filter(|(_, role)| *role == ParamRole::Shared)
            .map(|(name, _)| name.clone())
            .collect(),
    };
    let drop: BTreeSet<VarId> = composed
        .params
        .iter()
        .filter(|(name, _)| !keep.contains(name))
        .map(|(name, _)| env.lookup(name).expect("declared parameter"))
        .collect();
    let constraint = raw.eliminate(&drop)?;
    Ok(SynthesisResult {
        constraint,
        conclusive,
    })
}

/// The duration sets of a (possibly partially bound) model, projected to
/// the execution-time axis, and the opacity verdict their equality gives.
pub fn compute_opaque_times(
    problem: &OpacityProblem,
    budget: &ExplorationBudget,
) -> Result<OpacityVerdict, OpacityError> {
    let model = problem.model.instantiate_model(&problem.bindings)?;
    let enriched = enrich(
        &model,
        &problem.private_locations,
        &problem.private_edges,
        problem.final_location,
    )?;
    let prepared = prepare(&enriched)?;
    let expansion = &prepared.expansion;
    let flag = enriched.discrete_id(FLAG_NAME).expect("visit flag");

    let stop = expansion.locations_of_base(problem.final_location);
    let run = |want: bool| -> Result<(DurationIntervals, bool), OpacityError> {
        let targets = expansion.locations_where(problem.final_location, Some(flag), want);
        let opts = ExploreOptions {
            budget: budget.clone(),
            stop: stop.clone(),
            disable_subsumption: false,
        };
        let (raw, conclusive) = efsynth_with(&expansion.pta, &targets, &opts)?;
        let env = expansion.pta.var_env();
        let drop: BTreeSet<VarId> = env
            .parameters()
            .filter(|&v| v != prepared.abs_param_var)
            .collect();
        let times = raw.eliminate(&drop)?;
        Ok((to_intervals(&times, prepared.abs_param_var)?, conclusive))
    };

    let (visit, visit_conclusive) = run(true)?;
    let (avoid, avoid_conclusive) = run(false)?;
    let opaque_times = visit.intersect(&avoid);
    let status = if !(visit_conclusive && avoid_conclusive) {
        OpacityStatus::Inconclusive
    } else if visit == avoid {
        OpacityStatus::Opaque
    } else {
        OpacityStatus::NotOpaque
    };
    Ok(OpacityVerdict {
        status,
        visit,
        avoid,
        opaque_times,
    })
}

/// Emptiness of the opacity synthesis problem, decided through the
/// zero/infinity abstraction when the model is lower/upper.
pub fn lu_emptiness(
    problem: &OpacityProblem,
    budget: &ExplorationBudget,
) -> Result<EmptinessOutcome, OpacityError> {
    let model = problem.model.instantiate_model(&problem.bindings)?;
    let note = if model
        .edges
        .iter()
        .flat_map(|e| e.guard.param_atoms.iter())
        .any(|a| !a.expr.is_constant())
    {
        Some(
            "guards compare parameters with each other; the lower/upper \
             classification ignores those atoms"
                .to_string(),
        )
    } else {
        None
    };
    let classification = model.classify_lu();
    let LuClassification::Lu { lower, upper } = &classification else {
        let LuClassification::NotLu {
            param,
            lower_use,
            upper_use,
        } = &classification
        else {
            unreachable!()
        };
        return Ok(EmptinessOutcome {
            result: EmptinessResult::NotApplicable {
                reason: format!(
                    "parameter {} is used as a lower bound ({}) and as an upper bound ({})",
                    model.params[*param].0, lower_use.atom, upper_use.atom
                ),
            },
            note,
        });
    };

    let abstraction = model.lu_abstraction(&classification)?;
    let sub_problem = OpacityProblem {
        model: abstraction,
        private_locations: problem.private_locations.clone(),
        private_edges: problem.private_edges.clone(),
        final_location: problem.final_location,
        bindings: BTreeMap::new(),
        projection: None,
    };
    let verdict = compute_opaque_times(&sub_problem, budget)?;
    if verdict.status == OpacityStatus::Inconclusive {
        return Ok(EmptinessOutcome {
            result: EmptinessResult::Inconclusive,
            note,
        });
    }
    let Some(duration) = verdict.opaque_times.pick_point() else {
        return Ok(EmptinessOutcome {
            result: EmptinessResult::Empty,
            note,
        });
    };
    // The witness valuation from the decidability argument: zero for
    // lower-bound parameters, the chosen duration for upper-bound ones.
    let mut witness = BTreeMap::new();
    for &p in lower {
        witness.insert(model.params[p].0.clone(), Rat::zero());
    }
    for &p in upper {
        witness.insert(model.params[p].0.clone(), duration.clone());
    }
    Ok(EmptinessOutcome {
        result: EmptinessResult::NonEmpty {
            witness,
            witness_duration: duration,
        },
        note,
    })
}
