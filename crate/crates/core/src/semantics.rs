//! Grounding, applicability, successor states and breadth-first expansion of
//! the reachable labeled state graph.

use std::collections::{BTreeSet, HashMap, HashSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::graphio::LabeledGraph;
use crate::model::{state_from_atoms, AtomTable, Domain, Instance, Invariant, SchemaLiteral, State};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("argument index {index} out of range for a tuple of length {len}")]
    ArgOutOfRange { index: usize, len: usize },
    #[error("preconditions of {0} do not hold")]
    NotApplicable(String),
    #[error("ground action {0} has contradictory effects")]
    ContradictoryEffects(String),
    #[error("expansion cap exceeded after {nodes} nodes and {edges} edges")]
    CapExceeded { nodes: usize, edges: usize },
}

#[derive(Copy, Clone, Debug)]
pub struct Caps {
    pub max_nodes: usize,
    pub max_edges: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_nodes: 100_000,
            max_edges: 500_000,
        }
    }
}

/// Positional substitution of 1-based argument indices.
pub fn bind_args(args: &[usize], objs: &[usize]) -> Result<Vec<usize>, SemanticsError> {
    args.iter()
        .map(|&a| {
            if a == 0 || a > objs.len() {
                Err(SemanticsError::ArgOutOfRange {
                    index: a,
                    len: objs.len(),
                })
            } else {
                Ok(objs[a - 1])
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundAction {
    pub schema: usize,
    pub objs: Vec<usize>,
}

impl GroundAction {
    pub fn name(&self, d: &Domain) -> String {
        let objs: Vec<String> = self.objs.iter().map(|o| (o + 1).to_string()).collect();
        format!("{}({})", d.schemas[self.schema].label, objs.join(","))
    }
}

/// All object tuples of length `arity` in row-major order.
pub fn object_tuples(num_objects: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * num_objects);
        for t in &out {
            for o in 0..num_objects {
                let mut t2 = t.clone();
                t2.push(o);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

pub fn ground_actions(d: &Domain, inst: &Instance) -> Vec<GroundAction> {
    d.schemas
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            object_tuples(inst.num_objects, s.arity)
                .into_iter()
                .map(move |objs| GroundAction { schema: i, objs })
        })
        .collect()
}

/// A domain and instance prepared for fast successor computation.
#[derive(Clone, Debug)]
pub struct World<'a> {
    pub domain: &'a Domain,
    pub table: AtomTable,
    pub statics: FixedBitSet,
    pub init: State,
}

struct Compiled {
    action: GroundAction,
    pre: Vec<(usize, bool)>,
    eff: Vec<(usize, bool)>,
    contradictory: bool,
}

impl<'a> World<'a> {
    pub fn new(domain: &'a Domain, inst: &Instance) -> Self {
        let table = AtomTable::new(domain, inst.num_objects);
        let mut statics = FixedBitSet::with_capacity(table.num_static);
        for a in &inst.static_true {
            statics.insert(table.index(a.pred, &a.objs));
        }
        let init = state_from_atoms(&table, &inst.init_true);
        World {
            domain,
            table,
            statics,
            init,
        }
    }

    pub fn num_objects(&self) -> usize {
        self.table.num_objects
    }

    fn holds(&self, s: &State, l: &SchemaLiteral, objs: &[usize]) -> bool {
        let bound: Vec<usize> = l.args.iter().map(|&a| objs[a - 1]).collect();
        let i = self.table.index(l.pred, &bound);
        let v = if self.table.is_static(l.pred) {
            self.statics.contains(i)
        } else {
            s.contains(i)
        };
        v == l.value
    }

    pub fn applicable(&self, s: &State, ga: &GroundAction) -> bool {
        self.domain.schemas[ga.schema]
            .precs
            .iter()
            .all(|l| self.holds(s, l, &ga.objs))
    }

    pub fn apply(&self, s: &State, ga: &GroundAction) -> Result<State, SemanticsError> {
        if !self.applicable(s, ga) {
            return Err(SemanticsError::NotApplicable(ga.name(self.domain)));
        }
        let c = self.compile(ga.clone());
        if c.contradictory {
            return Err(SemanticsError::ContradictoryEffects(ga.name(self.domain)));
        }
        let mut t = s.clone();
        for &(i, v) in &c.eff {
            t.set(i, v);
        }
        Ok(t)
    }

    fn compile(&self, action: GroundAction) -> Compiled {
        let schema = &self.domain.schemas[action.schema];
        let mut pre = Vec::new();
        for l in &schema.precs {
            if !self.table.is_static(l.pred) {
                let bound: Vec<usize> = l.args.iter().map(|&a| action.objs[a - 1]).collect();
                pre.push((self.table.index(l.pred, &bound), l.value));
            }
        }
        let mut eff: Vec<(usize, bool)> = schema
            .effs
            .iter()
            .map(|l| {
                let bound: Vec<usize> = l.args.iter().map(|&a| action.objs[a - 1]).collect();
                (self.table.index(l.pred, &bound), l.value)
            })
            .collect();
        eff.sort_unstable();
        eff.dedup();
        let contradictory = eff.windows(2).any(|w| w[0].0 == w[1].0);
        Compiled {
            action,
            pre,
            eff,
            contradictory,
        }
    }

    /// Ground actions whose static preconditions hold, compiled to atom indices.
    fn compiled_actions(&self, inst_objects: usize) -> Vec<Compiled> {
        let mut out = Vec::new();
        for (i, s) in self.domain.schemas.iter().enumerate() {
            for objs in object_tuples(inst_objects, s.arity) {
                let static_ok = s
                    .precs
                    .iter()
                    .filter(|l| self.table.is_static(l.pred))
                    .all(|l| self.holds(&self.init, l, &objs));
                if static_ok {
                    out.push(self.compile(GroundAction { schema: i, objs }));
                }
            }
        }
        out
    }

    /// Ground actions applicable in `s`, with their successors.
    pub fn successors(&self, s: &State) -> Result<Vec<(GroundAction, State)>, SemanticsError> {
        let mut out = Vec::new();
        for c in self.compiled_actions(self.num_objects()) {
            if c.pre.iter().all(|&(i, v)| s.contains(i) == v) {
                if c.contradictory {
                    return Err(SemanticsError::ContradictoryEffects(c.action.name(self.domain)));
                }
                let mut t = s.clone();
                for &(i, v) in &c.eff {
                    t.set(i, v);
                }
                out.push((c.action, t));
            }
        }
        Ok(out)
    }
}

/// Reachable state graph. Node 0 is the initial state; nodes are numbered in
/// discovery order and labels follow the domain's schema order.
#[derive(Clone, Debug)]
pub struct ExpandedSpace {
    pub graph: LabeledGraph,
    pub states: Vec<State>,
    pub table: AtomTable,
    pub statics: FixedBitSet,
    pub collapsed_edges: usize,
}

pub fn expand(d: &Domain, inst: &Instance, caps: Caps) -> Result<ExpandedSpace, SemanticsError> {
    let world = World::new(d, inst);
    let actions = world.compiled_actions(inst.num_objects);
    let mut states: Vec<State> = vec![world.init.clone()];
    let mut index: HashMap<State, usize> = HashMap::new();
    index.insert(world.init.clone(), 0);
    let mut edges = Vec::new();
    let mut collapsed = 0;
    let mut head = 0;
    while head < states.len() {
        let s = states[head].clone();
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        for c in &actions {
            if !c.pre.iter().all(|&(i, v)| s.contains(i) == v) {
                continue;
            }
            if c.contradictory {
                return Err(SemanticsError::ContradictoryEffects(c.action.name(d)));
            }
            let mut t = s.clone();
            for &(i, v) in &c.eff {
                t.set(i, v);
            }
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    if id >= caps.max_nodes {
                        return Err(SemanticsError::CapExceeded {
                            nodes: states.len(),
                            edges: edges.len(),
                        });
                    }
                    index.insert(t.clone(), id);
                    states.push(t);
                    id
                }
            };
            if seen.insert((id, c.action.schema)) {
                edges.push((head, id, c.action.schema));
                if edges.len() > caps.max_edges {
                    return Err(SemanticsError::CapExceeded {
                        nodes: states.len(),
                        edges: edges.len(),
                    });
                }
            } else {
                collapsed += 1;
            }
        }
        head += 1;
    }
    if collapsed > 0 {
        log::warn!("{collapsed} ground actions duplicated an existing (label, source, target) edge");
    }
    Ok(ExpandedSpace {
        graph: LabeledGraph::new(states.len(), d.labels(), edges),
        states,
        table: world.table,
        statics: world.statics,
        collapsed_edges: collapsed,
    })
}

/// Atoms covered by an invariant for object `o`, as (is_static, index) pairs.
pub fn invariant_atoms(inv: &Invariant, table: &AtomTable, o: usize) -> BTreeSet<(bool, usize)> {
    let mut atoms = BTreeSet::new();
    for &(p, pos) in &inv.members {
        let st = table.is_static(p);
        match pos {
            1 => {
                atoms.insert((st, table.index(p, &[o])));
            }
            2 => {
                for x in 0..table.num_objects {
                    atoms.insert((st, table.index(p, &[o, x])));
                }
            }
            _ => {
                for x in 0..table.num_objects {
                    atoms.insert((st, table.index(p, &[x, o])));
                }
            }
        }
    }
    atoms
}

/// A failed exactly-one check: invariant index, object, state index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantViolation {
    pub invariant: usize,
    pub object: usize,
    pub state: usize,
    pub true_members: usize,
}

pub fn check_invariants(
    invs: &[Invariant],
    table: &AtomTable,
    statics: &FixedBitSet,
    states: &[State],
) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    for (k, inv) in invs.iter().enumerate() {
        for o in 0..table.num_objects {
            let atoms = invariant_atoms(inv, table, o);
            for (si, s) in states.iter().enumerate() {
                let n = atoms
                    .iter()
                    .filter(|&&(st, i)| if st { statics.contains(i) } else { s.contains(i) })
                    .count();
                if n != 1 {
                    out.push(InvariantViolation {
                        invariant: k,
                        object: o,
                        state: si,
                        true_members: n,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSchema, Atom, PredicateSym, SchemaLiteral};

    fn lit(pred: usize, args: &[usize], value: bool) -> SchemaLiteral {
        SchemaLiteral {
            pred,
            args: args.to_vec(),
            value,
        }
    }

    #[test]
    fn bind_examples() {
        assert_eq!(bind_args(&[1, 2], &[10, 11, 12]).unwrap(), vec![10, 11]);
        assert_eq!(bind_args(&[1, 1], &[10]).unwrap(), vec![10, 10]);
        assert_eq!(bind_args(&[3, 2], &[10, 11, 12]).unwrap(), vec![12, 11]);
        assert!(bind_args(&[2], &[10]).is_err());
    }

    #[test]
    fn grounding_counts() {
        let d = Domain {
            predicates: vec![PredicateSym {
                name: "p".into(),
                arity: 1,
                is_static: false,
            }],
            schemas: vec![ActionSchema::new("A", 2, vec![], vec![lit(0, &[1], true)])],
            invariants: vec![],
        };
        let inst = Instance {
            num_objects: 3,
            ..Instance::default()
        };
        assert_eq!(ground_actions(&d, &inst).len(), 9);
        let mut d3 = d.clone();
        d3.schemas[0].arity = 3;
        let inst2 = Instance {
            num_objects: 2,
            ..Instance::default()
        };
        assert_eq!(ground_actions(&d3, &inst2).len(), 8);
    }

    #[test]
    fn never_applicable_schema_gives_single_node() {
        let d = Domain {
            predicates: vec![PredicateSym {
                name: "p".into(),
                arity: 1,
                is_static: false,
            }],
            schemas: vec![ActionSchema::new(
                "A",
                1,
                vec![lit(0, &[1], true), lit(0, &[1], false)],
                vec![lit(0, &[1], true)],
            )],
            invariants: vec![],
        };
        let inst = Instance {
            num_objects: 2,
            ..Instance::default()
        };
        let e = expand(&d, &inst, Caps::default()).unwrap();
        assert_eq!((e.graph.num_nodes, e.graph.edges.len()), (1, 0));
    }

    #[test]
    fn redundant_effect_keeps_state() {
        let d = Domain {
            predicates: vec![PredicateSym {
                name: "p".into(),
                arity: 1,
                is_static: false,
            }],
            schemas: vec![ActionSchema::new("A", 1, vec![], vec![lit(0, &[1], true)])],
            invariants: vec![],
        };
        let inst = Instance {
            num_objects: 1,
            init_true: [Atom::new(0, &[0])].into_iter().collect(),
            ..Instance::default()
        };
        let w = World::new(&d, &inst);
        let ga = GroundAction {
            schema: 0,
            objs: vec![0],
        };
        assert_eq!(w.apply(&w.init, &ga).unwrap(), w.init);
        let e = expand(&d, &inst, Caps::default()).unwrap();
        assert_eq!(e.graph.edges, vec![(0, 0, 0)]);
    }

    #[test]
    fn all_false_state_fails_invariant() {
        let d = Domain {
            predicates: vec![PredicateSym {
                name: "p".into(),
                arity: 2,
                is_static: false,
            }],
            schemas: vec![],
            invariants: vec![Invariant { members: vec![(0, 2)] }],
        };
        let table = AtomTable::new(&d, 2);
        let s = FixedBitSet::with_capacity(table.num_dynamic);
        let v = check_invariants(&d.invariants, &table, &FixedBitSet::new(), &[s]);
        assert_eq!(v.len(), 2);
    }
}
