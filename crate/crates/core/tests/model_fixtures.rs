//! Parser, serializer and model-operation tests on the bundled fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use topacity::model::{parse, serialize};
use topacity::pta::{LuClassification, ParamRole, Pta};
use topacity::rational::{parse_rat, rat_int};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn load(name: &str) -> Pta {
    parse(&fixture(name)).unwrap().compose().unwrap()
}

#[test]
fn fig1_structure() {
    let source = parse(&fixture("fig1.pta")).unwrap();
    assert_eq!(source.components.len(), 1);
    let pta = source.compose().unwrap();
    assert_eq!(pta.clocks, vec!["x"]);
    assert_eq!(pta.params.len(), 2);
    assert_eq!(pta.locations.len(), 3);
    assert_eq!(pta.edges.len(), 3);
    assert_eq!(pta.private_locations(), BTreeSet::from([pta.location_id("l2").unwrap()]));
    assert!(pta.private_edges().is_empty());
}

#[test]
fn fig3_structure() {
    let pta = load("fig3.pta");
    assert_eq!(pta.locations.len(), 7);
    assert_eq!(pta.clocks, vec!["cl"]);
    let roles: Vec<(String, ParamRole)> = pta.params.clone();
    assert_eq!(
        roles,
        vec![
            ("eps".to_string(), ParamRole::Shared),
            ("p".to_string(), ParamRole::Shared),
            ("x".to_string(), ParamRole::Input),
            ("secret".to_string(), ParamRole::Shared),
        ]
    );
    // The scaled sleep guard parses with an exact coefficient of 1024.
    let l5 = pta.location_id("l5").unwrap();
    let sleep = pta.edges.iter().find(|e| e.source == l5).unwrap();
    let lower = &sleep.guard.clock_atoms[0];
    let p = pta.param_id("p").unwrap();
    assert_eq!(lower.bound.coeffs[&p], rat_int(1024));
}

#[test]
fn two_branch_structure() {
    let pta = load("two_branch.pta");
    assert_eq!(pta.locations.len(), 2);
    assert_eq!(pta.private_edges().len(), 1);
    assert!(pta.private_locations().is_empty());
}

#[test]
fn duplicate_declaration_is_diagnosed() {
    let err = parse("pta m clock x; clock x; automaton m { init loc a { } }").unwrap_err();
    assert!(err.message.contains("duplicate declaration"), "{err}");
    assert_eq!(err.line, 1);
}

#[test]
fn clock_comparison_is_rejected() {
    let text = "pta m clock x, y; automaton m { init loc a { when x <= y goto a; } }";
    let err = parse(text).unwrap_err();
    assert!(err.message.contains("clocks"), "{err}");
}

#[test]
fn diagnostics_carry_positions() {
    let text = "pta m\nclock x;\nautomaton m {\n  init loc a {\n    when x <= zz goto a;\n  }\n}\n";
    let err = parse(text).unwrap_err();
    assert_eq!(err.line, 5);
    assert!(err.message.contains("zz"), "{err}");
}

#[test]
fn round_trip_is_a_fixpoint_on_fixtures() {
    for name in ["fig1.pta", "fig3.pta", "two_branch.pta"] {
        let first = parse(&fixture(name)).unwrap().compose().unwrap();
        let text = serialize(&first);
        let second = parse(&text).unwrap().compose().unwrap();
        assert_eq!(first, second, "round trip changed {name}");
        let text_again = serialize(&second);
        assert_eq!(text, text_again, "serializer not a fixpoint on {name}");
    }
}

#[test]
fn round_trip_holds_on_generated_models() {
    use topacity::opacity::{enrich, self_compose, OpacityProblem};
    for (name, final_loc) in [("fig1.pta", "l1"), ("fig3.pta", "l_f"), ("two_branch.pta", "l2")] {
        let model = load(name);
        let p = OpacityProblem::new(model.clone(), final_loc).unwrap();
        let enriched = enrich(
            &model,
            &p.private_locations,
            &p.private_edges,
            p.final_location,
        )
        .unwrap();
        let text = serialize(&enriched);
        let again = parse(&text).unwrap().compose().unwrap();
        assert_eq!(enriched, again, "enriched {name} does not round-trip");

        let composed = self_compose(&enriched).unwrap();
        let text = serialize(&composed);
        let again = parse(&text).unwrap().compose().unwrap();
        assert_eq!(composed, again, "composed {name} does not round-trip");
    }
}

#[test]
fn classify_fixtures() {
    let fig1 = load("fig1.pta");
    match fig1.classify_lu() {
        LuClassification::Lu { lower, upper } => {
            assert_eq!(
                lower,
                BTreeSet::from([fig1.param_id("p1").unwrap(), fig1.param_id("p2").unwrap()])
            );
            assert!(upper.is_empty());
        }
        other => panic!("expected L/U verdict, got {other:?}"),
    }

    let fig3 = load("fig3.pta");
    match fig3.classify_lu() {
        LuClassification::NotLu { param, .. } => {
            assert_eq!(param, fig3.param_id("p").unwrap());
        }
        other => panic!("expected NotLu, got {other:?}"),
    }
}

#[test]
fn no_panics_on_mangled_input() {
    let base = fixture("fig1.pta");
    for cut in (0..base.len()).step_by(7) {
        let _ = parse(&base[..cut]);
    }
    let garbage = ["\u{0}\u{1}", "pta", "pta x automaton", "}{;;", "pta m clock ;"];
    for g in garbage {
        let _ = parse(g);
    }
}

mod fuzz {
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        /// The parser returns diagnostics, never panics, on arbitrary
        /// byte soup and on keyword-shaped fragments alike.
        #[test]
        fn parser_never_panics(input in "\\PC*") {
            let _ = super::parse(&input);
        }

        #[test]
        fn parser_never_panics_on_fragmentish_input(
            input in "(pta|clock|param|loc|when|goto|init|private|[a-z]{1,3}|[0-9]{1,4}|[;{}=<>,:&!*+.-]| |\n){0,40}"
        ) {
            let _ = super::parse(&input);
        }
    }
}

#[test]
fn instantiation_yields_constant_guards() {
    let pta = load("fig3.pta");
    let mut bindings = BTreeMap::new();
    bindings.insert("eps".to_string(), parse_rat("1").unwrap());
    bindings.insert("p".to_string(), parse_rat("2").unwrap());
    let fixed = pta.instantiate_model(&bindings).unwrap();
    assert_eq!(fixed.params.len(), 2);

    // Sleep guards become 1024 <= cl <= 1025 and 2048 <= cl <= 2049.
    let priv_loc = fixed.location_id("l_priv").unwrap();
    let edge = fixed.edges.iter().find(|e| e.source == priv_loc).unwrap();
    let bounds: Vec<String> = edge
        .guard
        .clock_atoms
        .iter()
        .map(|a| fixed.render_clock_atom(a))
        .collect();
    assert_eq!(bounds, vec!["cl >= 1024", "cl <= 1025"]);

    let l5 = fixed.location_id("l5").unwrap();
    let edge = fixed.edges.iter().find(|e| e.source == l5).unwrap();
    let bounds: Vec<String> = edge
        .guard
        .clock_atoms
        .iter()
        .map(|a| fixed.render_clock_atom(a))
        .collect();
    assert_eq!(bounds, vec!["cl >= 2048", "cl <= 2049"]);

    // Identity when nothing is bound.
    let same = pta.instantiate_model(&BTreeMap::new()).unwrap();
    assert_eq!(same, pta);

    // Unknown names are rejected.
    let mut unknown = BTreeMap::new();
    unknown.insert("nope".to_string(), rat_int(1));
    assert!(pta.instantiate_model(&unknown).is_err());
}

#[test]
fn expand_discrete_identity_without_bools() {
    let pta = load("fig1.pta");
    let expansion = pta.expand_discrete();
    assert_eq!(expansion.pta, pta);
}

#[test]
fn lu_abstraction_zeroes_lower_parameters() {
    let fig1 = load("fig1.pta");
    let classification = fig1.classify_lu();
    let abstracted = fig1.lu_abstraction(&classification).unwrap();
    assert!(abstracted.params.is_empty());
    for edge in &abstracted.edges {
        for atom in &edge.guard.clock_atoms {
            assert!(atom.bound.is_constant());
        }
    }
    // Guards became x >= 0; invariants keep x <= 3.
    let l0 = abstracted.location_id("l0").unwrap();
    let guards: Vec<String> = abstracted
        .edges
        .iter()
        .filter(|e| e.source == l0)
        .flat_map(|e| e.guard.clock_atoms.iter())
        .map(|a| abstracted.render_clock_atom(a))
        .collect();
    assert_eq!(guards, vec!["x >= 0", "x >= 0"]);

    // A parameter-free model classifies as trivially L/U and abstracts to
    // itself.
    match abstracted.classify_lu() {
        LuClassification::Lu { lower, upper } => {
            assert!(lower.is_empty() && upper.is_empty());
        }
        other => panic!("unexpected {other:?}"),
    }
    let again = abstracted
        .lu_abstraction(&abstracted.classify_lu())
        .unwrap();
    assert_eq!(again.locations, abstracted.locations);
    assert_eq!(again.edges, abstracted.edges);
}

#[test]
fn upper_bound_conjuncts_are_deleted_not_weakened() {
    // x <= q + 3 with q an upper-bound parameter: the whole conjunct goes,
    // it does not become x <= 3.
    let text = "pta m clock x; param q; automaton m { init loc a { when x <= q + 3 goto b; } loc b { } }";
    let pta = parse(text).unwrap().compose().unwrap();
    let classification = pta.classify_lu();
    match &classification {
        LuClassification::Lu { upper, .. } => {
            assert_eq!(upper, &BTreeSet::from([0]));
        }
        other => panic!("unexpected {other:?}"),
    }
    let abstracted = pta.lu_abstraction(&classification).unwrap();
    assert!(abstracted.edges[0].guard.clock_atoms.is_empty());
}
