//! End-to-end opacity analyses on the bundled fixtures, checked against
//! the published duration sets and synthesis constraints.

use std::collections::BTreeSet;
use std::path::PathBuf;

use topacity::constraint::{ConstraintSet, LinearTerm, Polyhedron, Relation};
use topacity::model::parse;
use topacity::opacity::{
    compute_opaque_times, enrich, lu_emptiness, self_compose, synth_opacity, EmptinessResult,
    OpacityProblem, OpacityStatus,
};
use topacity::pta::Pta;
use topacity::rational::{parse_rat, rat, rat_int, Rat};
use topacity::symbolic::ExplorationBudget;

fn load(name: &str) -> Pta {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    parse(&std::fs::read_to_string(path).unwrap())
        .unwrap()
        .compose()
        .unwrap()
}

fn problem(model: Pta, final_loc: &str, bindings: &[(&str, &str)]) -> OpacityProblem {
    let mut p = OpacityProblem::new(model, final_loc).unwrap();
    p.bindings = bindings
        .iter()
        .map(|(n, v)| (n.to_string(), parse_rat(v).unwrap()))
        .collect();
    p
}

fn budget() -> ExplorationBudget {
    ExplorationBudget {
        max_depth: None,
        max_states: Some(100_000),
    }
}

#[test]
fn fig1_opacity_computation() {
    let p = problem(load("fig1.pta"), "l1", &[("p1", "1"), ("p2", "2")]);
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert_eq!(verdict.visit.render(), "[1, 3]");
    assert_eq!(verdict.avoid.render(), "[2, 3]");
    assert_eq!(verdict.opaque_times.render(), "[2, 3]");
    assert_eq!(verdict.status, OpacityStatus::NotOpaque);
}

#[test]
fn fig1_opacity_symmetric_valuation() {
    let p = problem(load("fig1.pta"), "l1", &[("p1", "1.5"), ("p2", "1.5")]);
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert_eq!(verdict.visit.render(), "[3/2, 3]");
    assert_eq!(verdict.avoid.render(), "[3/2, 3]");
    assert_eq!(verdict.status, OpacityStatus::Opaque);
}

#[test]
fn fig3_opacity_computation_first_valuation() {
    let p = problem(load("fig3.pta"), "l_f", &[("eps", "1"), ("p", "2")]);
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert_eq!(verdict.visit.render(), "[1024, 1029]");
    assert_eq!(verdict.avoid.render(), "[2048, 2053]");
    assert!(verdict.opaque_times.is_empty());
    assert_eq!(verdict.status, OpacityStatus::NotOpaque);
}

#[test]
fn fig3_opacity_computation_second_valuation() {
    let p = problem(load("fig3.pta"), "l_f", &[("eps", "2"), ("p", "1.002")]);
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert_eq!(verdict.visit.render(), "[1024, 1034]");
    assert_eq!(verdict.avoid.render(), "[128256/125, 129506/125]");
    assert_eq!(verdict.opaque_times.render(), "[128256/125, 1034]");
    assert_eq!(verdict.status, OpacityStatus::NotOpaque);
}

#[test]
fn two_branch_opacity_computation() {
    let p = problem(load("two_branch.pta"), "l2", &[]);
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert_eq!(verdict.visit.render(), "(30, inf)");
    assert_eq!(verdict.avoid.render(), "[0, inf)");
    assert_eq!(verdict.opaque_times.render(), "(30, inf)");
    assert_eq!(verdict.status, OpacityStatus::NotOpaque);
}

/// The published three-parameter synthesis constraint, over the model's
/// composed environment.
fn fig3_expected_constraint(env: &std::sync::Arc<topacity::constraint::VarEnv>) -> Polyhedron {
    let eps = env.lookup("eps").unwrap();
    let p = env.lookup("p").unwrap();
    let p_abs = env.lookup("p_abs").unwrap();
    let atom = |pairs: &[(usize, i64)], constant: i64, rel: Relation| {
        let mut term = LinearTerm::constant(rat_int(constant));
        for (var, c) in pairs {
            term.add_term(*var, rat_int(*c));
        }
        (term, rel)
    };
    Polyhedron::from_terms(
        env.clone(),
        &[
            // 5 eps + 1024 >= p_abs >= 1024
            atom(&[(eps, 5), (p_abs, -1)], 1024, Relation::Ge),
            atom(&[(p_abs, 1)], -1024, Relation::Ge),
            // 1024 p + 5 eps >= p_abs >= 1024 p >= 0
            atom(&[(eps, 5), (p, 1024), (p_abs, -1)], 0, Relation::Ge),
            atom(&[(p_abs, 1), (p, -1024)], 0, Relation::Ge),
            atom(&[(p, 1)], 0, Relation::Ge),
        ],
    )
    .unwrap()
}

#[test]
fn fig3_full_synthesis_matches_published_constraint() {
    let mut p = problem(load("fig3.pta"), "l_f", &[]);
    p.projection = Some(
        ["eps", "p"]
            .iter()
            .map(|s| s.to_string())
            .collect::<BTreeSet<String>>(),
    );
    let result = synth_opacity(&p, &budget()).unwrap();
    assert!(result.conclusive);

    let env = result.constraint.env().clone();
    let expected =
        ConstraintSet::from_polys(env.clone(), [fig3_expected_constraint(&env)]).unwrap();
    assert!(
        result.constraint.equivalent(&expected).unwrap(),
        "got {}",
        result.constraint.render()
    );
}

#[test]
fn fig3_bound_synthesis_matches_examples() {
    // eps = 1, p = 2: no execution time admits both behaviors.
    let p = problem(load("fig3.pta"), "l_f", &[("eps", "1"), ("p", "2")]);
    let result = synth_opacity(&p, &budget()).unwrap();
    assert!(result.conclusive);
    assert!(result.constraint.is_empty());

    // eps = 2, p = 1.002: execution times in [1026.048, 1034].
    let p = problem(load("fig3.pta"), "l_f", &[("eps", "2"), ("p", "1.002")]);
    let result = synth_opacity(&p, &budget()).unwrap();
    assert!(result.conclusive);
    let env = result.constraint.env().clone();
    let p_abs = env.lookup("p_abs").unwrap();
    let intervals = topacity::constraint::to_intervals(&result.constraint, p_abs).unwrap();
    assert_eq!(intervals.render(), "[128256/125, 1034]");
}

#[test]
fn instantiation_commutes_with_synthesis() {
    // Substituting the published triple into the unconstrained constraint
    // agrees with synthesizing under those bindings directly.
    let mut unconstrained = problem(load("fig3.pta"), "l_f", &[]);
    unconstrained.projection = Some(
        ["eps", "p"]
            .iter()
            .map(|s| s.to_string())
            .collect::<BTreeSet<String>>(),
    );
    let full = synth_opacity(&unconstrained, &budget()).unwrap();
    assert!(full.conclusive);
    let env = full.constraint.env().clone();
    let p_abs = env.lookup("p_abs").unwrap();

    for (eps, p, expected) in [
        ("1", "2", "empty"),
        ("2", "1.002", "[128256/125, 1034]"),
    ] {
        // Substitute eps and p by pinning them and projecting them away,
        // leaving the execution-time parameter free.
        let eps_var = env.lookup("eps").unwrap();
        let p_var = env.lookup("p").unwrap();
        let pin = |var: usize, value: &str| {
            let mut term = LinearTerm::var(var);
            term.constant = -parse_rat(value).unwrap();
            (term, Relation::Eq)
        };
        let pinned = ConstraintSet::from_polys(
            env.clone(),
            [Polyhedron::from_terms(env.clone(), &[pin(eps_var, eps), pin(p_var, p)]).unwrap()],
        )
        .unwrap();
        let substituted = full
            .constraint
            .intersection(&pinned)
            .unwrap()
            .eliminate(&BTreeSet::from([eps_var, p_var]))
            .unwrap();
        let via_substitution =
            topacity::constraint::to_intervals(&substituted, p_abs).unwrap();
        assert_eq!(via_substitution.render(), expected);

        let bound = problem(load("fig3.pta"), "l_f", &[("eps", eps), ("p", p)]);
        let direct = synth_opacity(&bound, &budget()).unwrap();
        let direct_p_abs = direct.constraint.env().lookup("p_abs").unwrap();
        let via_direct =
            topacity::constraint::to_intervals(&direct.constraint, direct_p_abs).unwrap();
        assert_eq!(via_direct, via_substitution);
    }
}

#[test]
fn enrichment_structure_on_fig3() {
    let fig3 = load("fig3.pta");
    let p = OpacityProblem::new(fig3.clone(), "l_f").unwrap();
    let enriched = enrich(
        &fig3,
        &p.private_locations,
        &p.private_edges,
        p.final_location,
    )
    .unwrap();
    let flag = enriched.discrete_id("b").unwrap();
    let priv_loc = enriched.location_id("l_priv").unwrap();
    let final_loc = enriched.location_id("l_f").unwrap();
    let finish = enriched.action_id("finish").unwrap();
    let x_abs = enriched.clock_id("x_abs").unwrap();
    for edge in &enriched.edges {
        assert_eq!(
            edge.bool_updates.contains(&(flag, true)),
            edge.target == priv_loc,
        );
        let measured = edge
            .guard
            .clock_atoms
            .iter()
            .any(|a| a.clock == x_abs && a.rel == Relation::Eq);
        assert_eq!(measured, edge.target == final_loc);
        assert_eq!(edge.action == Some(finish), edge.target == final_loc);
    }
    // x_abs is never reset.
    assert!(enriched.edges.iter().all(|e| !e.resets.contains(&x_abs)));

    // Name collisions are rejected: enriching twice must fail.
    let again = enrich(
        &enriched,
        &BTreeSet::new(),
        &BTreeSet::new(),
        p.final_location,
    );
    assert!(again.is_err());
}

#[test]
fn self_composition_shares_declared_symbols() {
    let fig1 = load("fig1.pta");
    let p = OpacityProblem::new(fig1.clone(), "l1").unwrap();
    let enriched = enrich(
        &fig1,
        &p.private_locations,
        &p.private_edges,
        p.final_location,
    )
    .unwrap();
    let composed = self_compose(&enriched).unwrap();

    // Clocks: x, x_abs (shared), x_2. Parameters: p1, p2, p_abs, all
    // shared between the copies.
    assert_eq!(composed.clocks, vec!["x", "x_abs", "x_2"]);
    let names: Vec<&str> = composed.params.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, vec!["p1", "p2", "p_abs"]);
    assert_eq!(composed.locations.len(), 9);

    // Interleавings of the one non-finishing edge per copy, plus the four
    // joint finish combinations.
    assert_eq!(composed.edges.len(), 10);
    let finish = composed.action_id("finish").unwrap();
    let joint = composed
        .edges
        .iter()
        .filter(|e| e.action == Some(finish))
        .count();
    assert_eq!(joint, 4);
}

#[test]
fn self_composition_renames_input_parameters() {
    let fig3 = load("fig3.pta");
    let p = OpacityProblem::new(fig3.clone(), "l_f").unwrap();
    let enriched = enrich(
        &fig3,
        &p.private_locations,
        &p.private_edges,
        p.final_location,
    )
    .unwrap();
    let composed = self_compose(&enriched).unwrap();
    let names: Vec<&str> = composed.params.iter().map(|(n, _)| n.as_str()).collect();
    // x is a per-run input and is duplicated; eps, p, secret, p_abs are
    // common to both copies.
    assert_eq!(names, vec!["eps", "p", "x", "secret", "p_abs", "x_2"]);
}

#[test]
fn lu_emptiness_on_fixtures() {
    let fig1 = problem(load("fig1.pta"), "l1", &[]);
    let outcome = lu_emptiness(&fig1, &budget()).unwrap();
    let EmptinessResult::NonEmpty {
        witness,
        witness_duration,
    } = &outcome.result
    else {
        panic!("expected NonEmpty, got {:?}", outcome.result);
    };
    assert_eq!(*witness_duration, Rat::from_integer(0.into()));
    assert_eq!(witness.get("p1"), Some(&rat_int(0)));
    assert_eq!(witness.get("p2"), Some(&rat_int(0)));

    // The witness valuation indeed has a non-empty set of opaque times.
    let confirm = problem(load("fig1.pta"), "l1", &[("p1", "0"), ("p2", "0")]);
    let verdict = compute_opaque_times(&confirm, &budget()).unwrap();
    assert!(verdict.opaque_times.contains(witness_duration));
    assert_eq!(verdict.visit.render(), "[0, 3]");
    assert_eq!(verdict.avoid.render(), "[0, 3]");

    let fig3 = problem(load("fig3.pta"), "l_f", &[]);
    let outcome = lu_emptiness(&fig3, &budget()).unwrap();
    let EmptinessResult::NotApplicable { reason } = &outcome.result else {
        panic!("expected NotApplicable, got {:?}", outcome.result);
    };
    assert!(reason.contains("parameter p "), "{reason}");
}

#[test]
fn private_unreachable_for_all_valuations_is_empty() {
    // L/U model whose private location sits behind an unsatisfiable guard.
    let text = "
pta dead
clock x;
param lo;
automaton dead {
  init loc a: invariant x <= 2 {
    when x >= lo && x < 0 goto secretive;
    when true goto b;
  }
  private loc secretive {
    when true goto b;
  }
  loc b {
  }
}";
    let model = parse(text).unwrap().compose().unwrap();
    let p = OpacityProblem::new(model, "b").unwrap();
    let outcome = lu_emptiness(&p, &budget()).unwrap();
    assert_eq!(outcome.result, EmptinessResult::Empty);
}

#[test]
fn private_equal_final_counts_entering_edges_as_visits() {
    // Three locations; the final location itself is private. Every edge
    // into it sets the flag, so no avoiding run exists.
    let text = "
pta pf
clock x;
automaton pf {
  init loc a: invariant x <= 5 {
    when x >= 1 goto f;
    when true goto m;
  }
  loc m: invariant x <= 4 {
    when x >= 2 goto f;
  }
  private loc f {
  }
}";
    let model = parse(text).unwrap().compose().unwrap();
    let p = problem(model.clone(), "f", &[]);
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert_eq!(verdict.visit.render(), "[1, 5]");
    assert!(verdict.avoid.is_empty());
    assert!(verdict.opaque_times.is_empty());
    assert_eq!(verdict.status, OpacityStatus::NotOpaque);

    // The concrete oracle agrees: every final-reaching run is a visit.
    use topacity::oracle::{explore_durations, OracleOptions};
    let result = explore_durations(
        &model,
        &model.private_locations(),
        &model.private_edges(),
        model.location_id("f").unwrap(),
        &OracleOptions {
            grid_denominator: 2,
            time_bound: rat_int(5),
            step_bound: 8,
        },
    )
    .unwrap();
    assert!(result.avoid_durations.is_empty());
    assert_eq!(result.visit_durations.first(), Some(&rat_int(1)));
    assert_eq!(result.visit_durations.last(), Some(&rat_int(5)));
    assert!(result.visit_durations.contains(&rat(5, 2)));
}

#[test]
fn unreachable_final_still_enriches_and_synthesizes_empty() {
    let text = "
pta stuck
clock x;
automaton stuck {
  init loc a {
    when x >= 1 goto a;
  }
  private loc hidden {
    when true goto done;
  }
  loc done {
  }
}";
    let model = parse(text).unwrap().compose().unwrap();
    let p = problem(model, "done", &[]);
    let result = synth_opacity(&p, &budget()).unwrap();
    assert!(result.constraint.is_empty());
    let verdict = compute_opaque_times(&p, &budget()).unwrap();
    assert!(verdict.visit.is_empty());
    assert!(verdict.avoid.is_empty());
    // Equal (empty) duration sets: opaque by the set-equality reading.
    assert_eq!(verdict.status, OpacityStatus::Opaque);
}
