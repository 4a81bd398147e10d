//! Reading domains, instances and states off a satisfying assignment.

use std::collections::BTreeSet;

use super::{BLit, EncodeError, VarMap, NUM_T, T_TUPLES};
use crate::model::{
    cost_of, ActionSchema, Atom, AtomTable, CostVector, Domain, Instance, Invariant, PredicateSym, SchemaLiteral,
    State,
};

#[derive(Clone, Debug)]
pub struct Decoded {
    pub domain: Domain,
    /// One instance per input graph.
    pub instances: Vec<Instance>,
    /// `states[graph][node]` over the decoded domain's atom table.
    pub states: Vec<Vec<State>>,
    pub cost: CostVector,
}

/// Objective values in optimization order: 1 + arity per schema, 1 + arity
/// per dynamic predicate, arity per static predicate, max state size.
pub fn tier_values(d: &Domain, c: &CostVector) -> [usize; 4] {
    let dynamic = d.predicates.iter().filter(|p| !p.is_static).count();
    [d.schemas.len() + c.n_a, dynamic + c.n_p, c.n_s, c.n_g]
}

pub fn decode_model(assignment: &[bool], vm: &VarMap) -> Result<Decoded, EncodeError> {
    if assignment.len() < vm.num_vars {
        return Err(EncodeError::Assignment(format!(
            "{} values for {} variables",
            assignment.len(),
            vm.num_vars
        )));
    }
    let ev = |b: BLit| b.eval(assignment);
    let np = vm.num_preds();
    let n = vm.num_objects;

    let domain = match &vm.fixed_domain {
        Some(d) => d.clone(),
        None => {
            // used predicates keep their slot order, dynamic ones first
            let mut new_id = vec![usize::MAX; np];
            let mut predicates = Vec::new();
            for block in [false, true] {
                let mut count = 0;
                for p in (0..np).filter(|&p| vm.is_static[p] == block && ev(vm.used[p])) {
                    count += 1;
                    new_id[p] = predicates.len();
                    predicates.push(PredicateSym {
                        name: format!("{}{count}", if block { "s" } else { "p" }),
                        arity: if ev(vm.bin[p]) { 2 } else { 1 },
                        is_static: block,
                    });
                }
            }
            let mut schemas = Vec::new();
            for (a, label) in vm.labels.iter().enumerate() {
                let chosen: Vec<usize> = (0..3).filter(|&k| ev(vm.ar[a][k])).collect();
                if chosen.len() != 1 {
                    return Err(EncodeError::Assignment(format!("schema {label} has no single arity")));
                }
                let arity = chosen[0] + 1;
                let mut precs = Vec::new();
                let mut effs = Vec::new();
                for p in 0..np {
                    for t in 0..NUM_T {
                        for pol in [false, true] {
                            for (lit, out) in [(vm.prec(a, p, t, pol), &mut precs), (vm.eff(a, p, t, pol), &mut effs)] {
                                if !ev(lit) {
                                    continue;
                                }
                                if new_id[p] == usize::MAX {
                                    return Err(EncodeError::Assignment("literal on an unused predicate".into()));
                                }
                                let (t1, t2) = T_TUPLES[t];
                                let args = if predicates[new_id[p]].arity == 2 { vec![t1, t2] } else { vec![t1] };
                                if t1.max(t2) > arity {
                                    return Err(EncodeError::Assignment(format!("argument beyond arity in {label}")));
                                }
                                out.push(SchemaLiteral {
                                    pred: new_id[p],
                                    args,
                                    value: pol,
                                });
                            }
                        }
                    }
                }
                schemas.push(ActionSchema::new(label, arity, precs, effs));
            }
            let mut invariants = BTreeSet::new();
            for k in 0..vm.num_invariants {
                let mut members = Vec::new();
                for p in 0..np {
                    for pos in 1..=3u8 {
                        if ev(vm.sel(k, p, pos)) && new_id[p] != usize::MAX {
                            members.push((new_id[p], pos));
                        }
                    }
                }
                if !members.is_empty() {
                    members.sort_unstable();
                    invariants.insert(Invariant { members });
                }
            }
            Domain {
                predicates,
                schemas,
                invariants: invariants.into_iter().collect(),
            }
        }
    };

    // slot of each decoded predicate
    let slots: Vec<usize> = match &vm.fixed_domain {
        Some(d) => (0..d.predicates.len()).collect(),
        None => {
            let mut v = Vec::new();
            for block in [false, true] {
                v.extend((0..np).filter(|&p| vm.is_static[p] == block && ev(vm.used[p])));
            }
            v
        }
    };
    let table = AtomTable::new(&domain, n);
    let atoms_of = |p_new: usize, truth: &dyn Fn(usize) -> bool| -> Vec<Atom> {
        let mut out = Vec::new();
        let unary = domain.predicates[p_new].arity == 1;
        for o1 in 0..n {
            for o2 in 0..n {
                if unary && o1 != o2 {
                    continue;
                }
                if truth(o1 * n + o2) {
                    out.push(if unary { Atom::new(p_new, &[o1]) } else { Atom::new(p_new, &[o1, o2]) });
                }
            }
        }
        out
    };
    let mut instances = Vec::new();
    let mut states = Vec::new();
    for (gi, &nodes) in vm.graph_nodes.iter().enumerate() {
        let mut inst = Instance {
            num_objects: n,
            ..Instance::default()
        };
        let mut node_states = Vec::with_capacity(nodes);
        for node in 0..nodes {
            let s = vm.state_of(gi, node);
            let mut st = State::with_capacity(table.num_dynamic);
            for (p_new, &p) in slots.iter().enumerate() {
                if domain.predicates[p_new].is_static {
                    if node == 0 {
                        for a in atoms_of(p_new, &|g| ev(vm.sval(gi, p, g))) {
                            inst.static_true.insert(a);
                        }
                    }
                    continue;
                }
                for a in atoms_of(p_new, &|g| ev(vm.val(s, p, g))) {
                    st.insert(table.index(a.pred, &a.objs));
                    if node == 0 {
                        inst.init_true.insert(a);
                    }
                }
            }
            node_states.push(st);
        }
        instances.push(inst);
        states.push(node_states);
    }
    let cost = cost_of(&domain, states.iter().flatten());
    Ok(Decoded {
        domain,
        instances,
        states,
        cost,
    })
}
