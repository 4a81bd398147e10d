mod common;

use std::sync::OnceLock;

use graphlift::encode::{build_learning_model, build_verification_model, decode_model, Decoded, EncodeOptions, Encoding, VarMap};
use graphlift::generators::{generate, listing_domain, DomainSpec, BLOCKS2_LISTING, HANOI_LISTING};
use graphlift::graphio::{corrupt_noise, sample_partial, LabeledGraph};
use graphlift::isocheck::{accounts_for, partial_witness_check};
use graphlift::learner::{self, Limits, SearchConfig};
use graphlift::model::{cost_of, validate, Bounds, Domain};
use graphlift::sat::{Budget, SolverConfig, Status};
use graphlift::semantics::{check_invariants, expand, Caps};
use graphlift::solve::{find_model, optimize_lex, Internal, Oracle};
use proptest::prelude::*;

fn graph(name: &str) -> LabeledGraph {
    generate(&DomainSpec::from_name(name).unwrap()).unwrap()
}

fn optimize(enc: &mut Encoding, conflicts: u64) -> (Status, Option<Decoded>) {
    let mut o = Internal::new(&enc.model, SolverConfig::default());
    let r = optimize_lex(enc, &mut o, &Budget::conflicts(conflicts)).unwrap();
    let d = r.best.map(|b| decode_model(&b, &enc.varmap).unwrap());
    (r.status, d)
}

fn satisfiable(enc: &mut Encoding) -> Option<Decoded> {
    let mut o = Internal::new(&enc.model, SolverConfig::default());
    match find_model(enc, &mut o, &Budget::conflicts(2_000_000)).unwrap() {
        Status::Sat => Some(decode_model(&o.model(), &enc.varmap).unwrap()),
        Status::Unsat => None,
        Status::Unknown => panic!("budget ran out"),
    }
}

fn identity_map(d: &Domain, g: &LabeledGraph) -> Vec<usize> {
    g.labels.iter().map(|l| d.schema_by_label(l).unwrap()).collect()
}

/// Blocks2-2 learned once, shared by the property tests.
fn blocks2_2() -> &'static (LabeledGraph, Decoded) {
    static CELL: OnceLock<(LabeledGraph, Decoded)> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = graph("blocks2-2");
        let mut enc = build_learning_model(std::slice::from_ref(&g), &Bounds::default(), 2, &EncodeOptions::default())
            .unwrap();
        let (st, d) = optimize(&mut enc, 5_000_000);
        assert_eq!(st, Status::Sat);
        (g, d.unwrap())
    })
}

#[test]
fn blocks2_2_learned_model_accounts_for_input() {
    let (g, d) = blocks2_2();
    assert!(validate(&d.domain, Some(&d.instances[0]), &Bounds::default()).is_empty());
    let e = expand(&d.domain, &d.instances[0], Caps::default()).unwrap();
    assert!(accounts_for(&e.graph, g).is_some());
    assert_eq!((e.graph.num_nodes, e.graph.edges.len()), (g.num_nodes, g.edges.len()));
    assert_eq!(cost_of(&d.domain, &e.states), d.cost);
    assert!(check_invariants(&d.domain.invariants, &e.table, &e.statics, &e.states).is_empty());
}

#[test]
fn single_node_without_edges_is_satisfiable() {
    let g = LabeledGraph::new(1, vec!["a".into()], vec![]);
    let mut enc = build_learning_model(&[g], &Bounds::default(), 1, &EncodeOptions::default()).unwrap();
    let d = satisfiable(&mut enc).expect("sat");
    assert_eq!(d.domain.schemas.len(), 1);
}

#[test]
fn edge_that_must_both_change_and_keep_the_state_is_unsat() {
    let g = LabeledGraph::new(2, vec!["a".into()], vec![(0, 1, 0), (0, 0, 0)]);
    let b = Bounds {
        max_predicates: 1,
        max_static_predicates: 0,
        max_pred_arity: 1,
        ..Bounds::default()
    };
    let mut enc = build_learning_model(&[g], &b, 1, &EncodeOptions::default()).unwrap();
    assert!(satisfiable(&mut enc).is_none());
}

#[test]
fn blocks2_fixture_verifies_on_blocks2_4() {
    let d = listing_domain(BLOCKS2_LISTING);
    let g = graph("blocks2-4");
    let b = Bounds::default().widened_for(&d);
    let mut enc = build_verification_model(&d, &g, &identity_map(&d, &g), &b, 4, &EncodeOptions::default()).unwrap();
    let dec = satisfiable(&mut enc).expect("sat");
    assert_eq!(dec.domain, d);
    let e = expand(&d, &dec.instances[0], Caps::default()).unwrap();
    assert!(accounts_for(&e.graph, &g).is_some());
}

#[test]
fn hanoi_fixture_verifies_on_hanoi_3x4() {
    let d = listing_domain(HANOI_LISTING);
    let g = graph("hanoi-3x4");
    let b = Bounds::default().widened_for(&d);
    // one object per disk and per peg: 4 + 3
    let mut enc = build_verification_model(&d, &g, &identity_map(&d, &g), &b, 7, &EncodeOptions::default()).unwrap();
    let dec = satisfiable(&mut enc).expect("sat");
    assert_eq!(dec.domain, d);
    let e = expand(&d, &dec.instances[0], Caps::default()).unwrap();
    assert!(accounts_for(&e.graph, &g).is_some());
}

#[test]
fn blocks2_fixture_does_not_produce_gripper_2() {
    let d = listing_domain(BLOCKS2_LISTING);
    let cfg = SearchConfig {
        min_objects: 1,
        max_objects: 6,
        limits: Limits::conflicts(5_000_000),
        ..SearchConfig::default()
    };
    let out = learner::verify(&d, &[("gripper-2".into(), graph("gripper-2"))], &cfg).unwrap();
    assert_eq!(out[0].status, Status::Unsat);
}

#[test]
fn varmap_text_round_trips() {
    let g = graph("blocks2-2");
    let mut enc =
        build_learning_model(std::slice::from_ref(&g), &Bounds::default(), 2, &EncodeOptions::default()).unwrap();
    let text = enc.varmap.to_text();
    let back = VarMap::from_text(&text).unwrap();
    assert_eq!(back.to_text(), text);
    let mut o = Internal::new(&enc.model, SolverConfig::default());
    assert_eq!(find_model(&mut enc, &mut o, &Budget::conflicts(1_000_000)).unwrap(), Status::Sat);
    let a = decode_model(&o.model(), &enc.varmap).unwrap();
    let b = decode_model(&o.model(), &back).unwrap();
    assert_eq!(a.domain, b.domain);
    assert_eq!(a.instances, b.instances);

    let d = listing_domain(BLOCKS2_LISTING);
    let enc = build_verification_model(
        &d,
        &g,
        &identity_map(&d, &g),
        &Bounds::default().widened_for(&d),
        2,
        &EncodeOptions::default(),
    )
    .unwrap();
    let back = VarMap::from_text(&enc.varmap.to_text()).unwrap();
    assert_eq!(back.fixed_domain.as_ref(), Some(&d));
}

#[test]
fn micro_encoding_is_complete() {
    let g = common::micro_graph();
    let b = common::micro_bounds();
    let expected = common::brute_force_models(&g, &b);
    assert!(!expected.is_empty());
    assert_eq!(common::enumerate_models(&g, &b), expected);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn partial_samples_keep_the_complete_solution(p in 1u32..=100, seed in any::<u64>()) {
        let (g, d) = blocks2_2();
        let part = sample_partial(g, p, seed).unwrap();
        let e = expand(&d.domain, &d.instances[0], Caps::default()).unwrap();
        prop_assert!(partial_witness_check(&e.graph, &part));
        let b = Bounds::default().widened_for(&d.domain);
        let mut enc = build_verification_model(&d.domain, &part, &identity_map(&d.domain, &part), &b, 2, &EncodeOptions::default()).unwrap();
        prop_assert!(satisfiable(&mut enc).is_some());
    }

    #[test]
    fn noisy_copies_keep_the_complete_solution(q in 0u32..=100, seed in any::<u64>()) {
        let (g, d) = blocks2_2();
        let noisy = corrupt_noise(g, q, seed).unwrap();
        let e = expand(&d.domain, &d.instances[0], Caps::default()).unwrap();
        prop_assert!(partial_witness_check(&e.graph, &noisy));
        let b = Bounds::default().widened_for(&d.domain);
        let mut enc = build_verification_model(&d.domain, &noisy, &identity_map(&d.domain, &noisy), &b, 2, &EncodeOptions::default()).unwrap();
        prop_assert!(satisfiable(&mut enc).is_some());
    }
}
