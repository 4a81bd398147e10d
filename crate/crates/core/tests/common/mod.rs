//! Helpers shared by integration test targets.

use std::collections::BTreeSet;

use graphlift::encode::{build_learning_model, decode_model, BLit, EncodeOptions, VarMap};
use graphlift::graphio::LabeledGraph;
use graphlift::isocheck::accounts_for;
use graphlift::model::{validate, ActionSchema, Atom, Bounds, Domain, Instance, Invariant, PredicateSym, SchemaLiteral};
use graphlift::sat::{Budget, SolverConfig, Status};
use graphlift::semantics::{check_invariants, expand, Caps};
use graphlift::solve::{find_model, Internal, Oracle};

pub fn micro_bounds() -> Bounds {
    Bounds {
        max_predicates: 1,
        max_static_predicates: 0,
        max_pred_arity: 1,
        max_action_arity: 1,
        ..Bounds::default()
    }
}

/// Every well-formed model with one unary fluent and one unary schema over a
/// single object, kept when it produces the graph.
pub fn brute_force_models(g: &LabeledGraph, b: &Bounds) -> BTreeSet<String> {
    let lit = |value| SchemaLiteral {
        pred: 0,
        args: vec![1],
        value,
    };
    let mut out = BTreeSet::new();
    let prec_sets: Vec<Vec<SchemaLiteral>> = vec![vec![], vec![lit(true)], vec![lit(false)], vec![lit(true), lit(false)]];
    let eff_sets: Vec<Vec<SchemaLiteral>> = vec![vec![lit(true)], vec![lit(false)]];
    let inv_sets: Vec<Vec<Invariant>> = vec![vec![], vec![Invariant { members: vec![(0, 1)] }]];
    for precs in &prec_sets {
        for effs in &eff_sets {
            for invs in &inv_sets {
                for init in [false, true] {
                    let d = Domain {
                        predicates: vec![PredicateSym {
                            name: "p1".into(),
                            arity: 1,
                            is_static: false,
                        }],
                        schemas: vec![ActionSchema::new(&g.labels[0], 1, precs.clone(), effs.clone())],
                        invariants: invs.clone(),
                    };
                    let mut inst = Instance {
                        num_objects: 1,
                        ..Instance::default()
                    };
                    if init {
                        inst.init_true.insert(Atom::new(0, &[0]));
                    }
                    if !validate(&d, Some(&inst), b).is_empty() {
                        continue;
                    }
                    let e = expand(&d, &inst, Caps::default()).unwrap();
                    if accounts_for(&e.graph, g).is_none() {
                        continue;
                    }
                    if !check_invariants(&d.invariants, &e.table, &e.statics, &e.states).is_empty() {
                        continue;
                    }
                    out.insert(format!("{d:?} {inst:?}"));
                }
            }
        }
    }
    out
}

/// Literals that pin down a model: structure and the first state.
fn projection(vm: &VarMap) -> Vec<BLit> {
    let mut v: Vec<BLit> = vm.ar.iter().flatten().copied().collect();
    v.extend(&vm.bin);
    v.extend(&vm.used);
    v.extend(&vm.prec);
    v.extend(&vm.eff);
    v.extend(&vm.sel);
    for p in 0..vm.num_preds() {
        for g in 0..vm.num_atoms() {
            v.push(vm.value(0, p, g));
        }
    }
    v
}

/// All decoded models of the one-object learning encoding, by blocking each
/// projection in turn.
pub fn enumerate_models(g: &LabeledGraph, b: &Bounds) -> BTreeSet<String> {
    let opts = EncodeOptions {
        symmetry_breaking: false,
        prune_distinct: false,
        ..EncodeOptions::default()
    };
    let mut enc = build_learning_model(std::slice::from_ref(g), b, 1, &opts).unwrap();
    let proj = projection(&enc.varmap);
    let mut o = Internal::new(&enc.model, SolverConfig::default());
    let mut found = BTreeSet::new();
    for _ in 0..1000 {
        match find_model(&mut enc, &mut o, &Budget::unlimited()).unwrap() {
            Status::Sat => {}
            Status::Unsat => break,
            Status::Unknown => unreachable!(),
        }
        let m = o.model();
        let d = decode_model(&m, &enc.varmap).unwrap();
        found.insert(format!("{:?} {:?}", d.domain, d.instances[0]));
        let block: Vec<_> = proj.iter().filter_map(|b| b.lit()).map(|l| if l.eval(&m) { !l } else { l }).collect();
        o.add_clause(&block);
    }
    found
}

pub fn micro_graph() -> LabeledGraph {
    LabeledGraph::new(2, vec!["a".into()], vec![(0, 1, 0)])
}
