//! Grid exploration of the bundled fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use topacity::model::parse;
use topacity::oracle::{explore_durations, step, ConcreteState, OracleOptions};
use topacity::pta::Pta;
use topacity::rational::{rat, rat_int, Rat};

fn load(name: &str) -> Pta {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    parse(&std::fs::read_to_string(path).unwrap())
        .unwrap()
        .compose()
        .unwrap()
}

fn bind(pta: &Pta, pairs: &[(&str, Rat)]) -> Pta {
    let bindings: BTreeMap<String, Rat> = pairs
        .iter()
        .map(|(n, v)| (n.to_string(), v.clone()))
        .collect();
    pta.instantiate_model(&bindings).unwrap()
}

fn durations(values: &[Rat]) -> BTreeSet<Rat> {
    values.iter().cloned().collect()
}

#[test]
fn paper_style_run_on_fig1() {
    let fig1 = bind(&load("fig1.pta"), &[("p1", rat_int(1)), ("p2", rat_int(2))]);
    let l2 = fig1.location_id("l2").unwrap();
    let l1 = fig1.location_id("l1").unwrap();
    let to_l2 = fig1.edges.iter().position(|e| e.target == l2).unwrap();
    let to_l1 = fig1
        .edges
        .iter()
        .position(|e| e.source == l2 && e.target == l1)
        .unwrap();

    let start = ConcreteState::initial(&fig1);
    let mid = step(&fig1, &start, to_l2, &rat(7, 5)).unwrap();
    assert_eq!(mid.location, l2);
    assert_eq!(mid.clocks[0], rat(7, 5));
    let end = step(&fig1, &mid, to_l1, &rat(13, 10)).unwrap();
    assert_eq!(end.location, l1);
    assert_eq!(end.clocks[0], rat(27, 10));

    // The same edge rejects a delay below the instantiated guard.
    assert!(step(&fig1, &start, to_l2, &rat(1, 2)).is_err());
}

#[test]
fn fig1_grid_durations() {
    let fig1 = bind(&load("fig1.pta"), &[("p1", rat_int(1)), ("p2", rat_int(2))]);
    let opts = OracleOptions {
        grid_denominator: 2,
        time_bound: rat_int(3),
        step_bound: 12,
    };
    let result = explore_durations(
        &fig1,
        &fig1.private_locations(),
        &fig1.private_edges(),
        fig1.location_id("l1").unwrap(),
        &opts,
    )
    .unwrap();
    assert!(result.exhausted);
    assert_eq!(
        result.visit_durations,
        durations(&[rat_int(1), rat(3, 2), rat_int(2), rat(5, 2), rat_int(3)])
    );
    assert_eq!(
        result.avoid_durations,
        durations(&[rat_int(2), rat(5, 2), rat_int(3)])
    );
    // Containment in the exact duration sets [1, 3] and [2, 3].
    for d in &result.visit_durations {
        assert!(*d >= rat_int(1) && *d <= rat_int(3));
    }
    for d in &result.avoid_durations {
        assert!(*d >= rat_int(2) && *d <= rat_int(3));
    }
}

#[test]
fn fig1_grid_durations_symmetric_valuation() {
    let fig1 = bind(
        &load("fig1.pta"),
        &[("p1", rat(3, 2)), ("p2", rat(3, 2))],
    );
    let opts = OracleOptions {
        grid_denominator: 2,
        time_bound: rat_int(3),
        step_bound: 12,
    };
    let result = explore_durations(
        &fig1,
        &fig1.private_locations(),
        &fig1.private_edges(),
        fig1.location_id("l1").unwrap(),
        &opts,
    )
    .unwrap();
    let expected = durations(&[rat(3, 2), rat_int(2), rat(5, 2), rat_int(3)]);
    assert_eq!(result.visit_durations, expected);
    assert_eq!(result.avoid_durations, expected);
}

#[test]
fn first_visit_semantics_ignores_edges_after_final() {
    let fig1 = bind(&load("fig1.pta"), &[("p1", rat_int(1)), ("p2", rat_int(2))]);
    let mut looped = fig1.clone();
    // Give the final location a way back; recorded durations must not move.
    let l1 = looped.location_id("l1").unwrap();
    let l0 = looped.location_id("l0").unwrap();
    looped.edges.push(topacity::pta::Edge {
        source: l1,
        guard: topacity::pta::Guard::always(),
        action: None,
        resets: BTreeSet::from([0]),
        bool_updates: vec![],
        target: l0,
        private: false,
    });
    let opts = OracleOptions {
        grid_denominator: 2,
        time_bound: rat_int(3),
        step_bound: 12,
    };
    let priv_locs = fig1.private_locations();
    let no_edges = BTreeSet::new();
    let base = explore_durations(&fig1, &priv_locs, &no_edges, l1, &opts).unwrap();
    let with_loop = explore_durations(&looped, &priv_locs, &no_edges, l1, &opts).unwrap();
    assert_eq!(base.visit_durations, with_loop.visit_durations);
    assert_eq!(base.avoid_durations, with_loop.avoid_durations);
}

#[test]
fn two_branch_grid_durations() {
    let model = bind(&load("two_branch.pta"), &[("h", rat_int(5))]);
    let opts = OracleOptions {
        grid_denominator: 2,
        time_bound: rat_int(35),
        step_bound: 8,
    };
    let result = explore_durations(
        &model,
        &model.private_locations(),
        &model.private_edges(),
        model.location_id("l2").unwrap(),
        &opts,
    )
    .unwrap();
    // The private branch needs cl > 30: first grid point 30.5. With h
    // fixed positive the public branch cannot fire at all.
    assert_eq!(result.visit_durations.iter().next(), Some(&rat(61, 2)));
    assert!(result.avoid_durations.is_empty());
    assert!(result.exhausted);

    // With h = 0 only the public branch runs, from time 0 onwards.
    let model = bind(&load("two_branch.pta"), &[("h", rat_int(0))]);
    let result = explore_durations(
        &model,
        &model.private_locations(),
        &model.private_edges(),
        model.location_id("l2").unwrap(),
        &opts,
    )
    .unwrap();
    assert!(result.visit_durations.is_empty());
    assert_eq!(
        result.avoid_durations.iter().next(),
        Some(&Rat::from_integer(0.into()))
    );
    assert_eq!(result.avoid_durations.len(), 71);
}

#[test]
fn default_options_track_model_constants() {
    let fig1 = bind(&load("fig1.pta"), &[("p1", rat_int(1)), ("p2", rat_int(2))]);
    let opts = OracleOptions::defaults_for(&fig1);
    assert_eq!(opts.grid_denominator, 2);
    // Twice the largest guard constant, four steps per expanded location.
    assert_eq!(opts.time_bound, rat_int(6));
    assert_eq!(opts.step_bound, 12);
}

#[test]
fn expansion_preserves_oracle_verdicts() {
    // Compare exploration of a discretely-extended model before and after
    // compiling the boolean away.
    let text = "
pta gated
clock x;
bool armed = false;
automaton gated {
  init loc a: invariant x <= 2 {
    when x >= 1 do armed := true, x := 0 goto a;
    when armed && x >= 1 goto b;
  }
  loc b {
  }
}";
    let model = parse(text).unwrap().compose().unwrap();
    let expansion = model.expand_discrete();
    let opts = OracleOptions {
        grid_denominator: 2,
        time_bound: rat_int(4),
        step_bound: 6,
    };
    let final_base = model.location_id("b").unwrap();
    let direct = explore_durations(
        &model,
        &BTreeSet::new(),
        &BTreeSet::new(),
        final_base,
        &opts,
    )
    .unwrap();
    let finals = expansion.locations_of_base(final_base);
    // The expanded model reaches b only with armed = true; explore to the
    // single reachable variant.
    assert_eq!(finals.len(), 1);
    let expanded_final = finals.into_iter().next().unwrap();
    let expanded = explore_durations(
        &expansion.pta,
        &BTreeSet::new(),
        &BTreeSet::new(),
        expanded_final,
        &opts,
    )
    .unwrap();
    assert_eq!(direct.visit_durations, expanded.visit_durations);
    assert_eq!(direct.avoid_durations, expanded.avoid_durations);
    assert!(!direct.avoid_durations.is_empty());
}
