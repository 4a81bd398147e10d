//! Clause generation for learning and verification.

use std::collections::HashMap;

use super::card::{and2, at_least_one, at_most_k, at_most_one, counter_outputs, exactly_k, exactly_one, or_all};
use super::varmap::t_index;
use super::{BLit, ConstraintModel, EncodeError, VarMap, NUM_T, T_TUPLES};
use crate::graphio::LabeledGraph;
use crate::model::{validate, Bounds, Domain};

#[derive(Clone, Debug)]
pub struct EncodeOptions {
    pub symmetry_breaking: bool,
    /// Skip distinctness pairs that the graph structure already separates.
    pub prune_distinct: bool,
    /// Leave distinctness pairs out; add them when a model violates them.
    pub lazy_distinct: bool,
    pub hints: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            symmetry_breaking: true,
            prune_distinct: true,
            lazy_distinct: false,
            hints: true,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TierKind {
    /// Sum of 1 + arity over schemas.
    Actions,
    /// Sum of 1 + arity over used dynamic predicates.
    Fluents,
    /// Sum of arities over used static predicates.
    Statics,
    /// Max true dynamic atoms in a state.
    Atoms,
}

/// An objective tier: `le[j]` forces the value to at most `base + j`.
#[derive(Clone, Debug)]
pub struct Tier {
    pub kind: TierKind,
    pub base: usize,
    pub le: Vec<BLit>,
}

impl Tier {
    /// Literal forcing the tier to at most `k`. `FALSE` when impossible,
    /// `TRUE` when the bound is implied.
    pub fn bound(&self, k: usize) -> BLit {
        if k < self.base {
            BLit::FALSE
        } else {
            self.le.get(k - self.base).copied().unwrap_or(BLit::TRUE)
        }
    }
}

pub struct Encoding {
    pub model: ConstraintModel,
    pub varmap: VarMap,
    /// Empty for verification models.
    pub tiers: Vec<Tier>,
    pending: Vec<(usize, usize)>,
}

impl Encoding {
    pub fn pending_pairs(&self) -> usize {
        self.pending.len()
    }

    fn add_distinct(&mut self, s1: usize, s2: usize) {
        let vm = &self.varmap;
        let m = &mut self.model;
        let mut ds = Vec::new();
        for p in (0..vm.num_preds()).filter(|&p| !vm.is_static[p]) {
            for g in 0..vm.num_atoms() {
                let (v1, v2) = (vm.val(s1, p, g), vm.val(s2, p, g));
                match (v1, v2) {
                    (BLit::Const(false), BLit::Const(false)) => {}
                    (BLit::Const(false), x) | (x, BLit::Const(false)) => ds.push(x),
                    _ => {
                        let d = m.new_blit();
                        m.add(&[!d, v1, v2]);
                        m.add(&[!d, !v1, !v2]);
                        ds.push(d);
                    }
                }
            }
        }
        m.add(&ds);
        self.varmap.num_vars = self.model.num_vars;
    }

    /// Adds the pending pairs whose states coincide under `assignment`.
    /// Returns how many were added.
    pub fn add_violated_pairs(&mut self, assignment: &[bool]) -> usize {
        let vm = &self.varmap;
        let key = |s: usize| -> Vec<bool> {
            let mut v = Vec::new();
            for p in (0..vm.num_preds()).filter(|&p| !vm.is_static[p]) {
                for g in 0..vm.num_atoms() {
                    v.push(vm.val(s, p, g).eval(assignment));
                }
            }
            v
        };
        let mut cache: HashMap<usize, Vec<bool>> = HashMap::new();
        let mut hit = Vec::new();
        let mut keep = Vec::new();
        for &(a, b) in &self.pending {
            let ka = cache.entry(a).or_insert_with(|| key(a)).clone();
            let kb = cache.entry(b).or_insert_with(|| key(b));
            if ka == *kb {
                hit.push((a, b));
            } else {
                keep.push((a, b));
            }
        }
        self.pending = keep;
        self.model.group("distinct-lazy");
        for &(a, b) in &hit {
            self.add_distinct(a, b);
        }
        hit.len()
    }

    pub fn add_all_pending(&mut self) {
        let pairs = std::mem::take(&mut self.pending);
        self.model.group("distinct-lazy");
        for (a, b) in pairs {
            self.add_distinct(a, b);
        }
    }
}

fn check_graphs(graphs: &[&LabeledGraph]) -> Result<(), EncodeError> {
    for g in graphs {
        g.validate().map_err(|e| EncodeError::Graph(e.to_string()))?;
        if g.num_nodes == 0 {
            return Err(EncodeError::EmptyGraph);
        }
    }
    if graphs.is_empty() {
        return Err(EncodeError::EmptyGraph);
    }
    Ok(())
}

fn binom_sat(n: usize, k: usize) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k.min(n) {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// Cheap counting argument that `num_objects` cannot work. `Err` carries the reason.
pub fn precheck(
    graphs: &[LabeledGraph],
    bounds: &Bounds,
    num_objects: usize,
    domain: Option<(&Domain, &[usize])>,
) -> Result<(), String> {
    let n = num_objects as u128;
    let capacity: u128 = match domain {
        None => {
            let slots = bounds.max_predicates - bounds.max_static_predicates;
            let per = if bounds.max_pred_arity >= 2 { n * n } else { n };
            let atoms = (slots as u128 * per).min(4096) as usize;
            (0..=bounds.max_true_atoms_per_state.min(atoms)).fold(0u128, |acc, i| acc.saturating_add(binom_sat(atoms, i)))
        }
        Some((d, _)) => {
            let atoms: u128 = d.predicates.iter().filter(|p| !p.is_static).map(|p| n.pow(p.arity as u32)).sum();
            if atoms >= 127 {
                u128::MAX
            } else {
                1u128 << atoms
            }
        }
    };
    for g in graphs {
        let need = (g.num_nodes - g.ambiguous.len()) as u128;
        if need > capacity {
            return Err(format!("{need} distinct states needed, at most {capacity} representable"));
        }
        let mut deg = vec![vec![0usize; g.labels.len()]; g.num_nodes];
        for &(s, _, l) in &g.edges {
            deg[s][l] += 1;
        }
        for (s, row) in deg.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                let total = c + g.unvisited_count(s, l);
                let arity = match domain {
                    None => bounds.max_action_arity,
                    Some((d, map)) => d.schemas[map[l]].arity,
                };
                if total as u128 > n.pow(arity as u32) {
                    return Err(format!("node {s} has {total} {} edges, more than ground actions", g.labels[l]));
                }
            }
        }
    }
    Ok(())
}

/// Stable forward color refinement: nodes with different colors can never
/// share a state in a model of a complete graph.
fn forward_classes(g: &LabeledGraph) -> Vec<usize> {
    let adj = g.out_adjacency();
    let mut color = vec![0usize; g.num_nodes];
    let mut classes = 1;
    loop {
        let mut ids: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut next = Vec::with_capacity(g.num_nodes);
        for u in 0..g.num_nodes {
            let mut sig: Vec<(usize, usize)> = adj[u].iter().map(|&(d, l)| (l, color[d])).collect();
            sig.sort_unstable();
            let len = ids.len();
            next.push(*ids.entry((color[u], sig)).or_insert(len));
        }
        let count = ids.len();
        color = next;
        if count == classes {
            return color;
        }
        classes = count;
    }
}

/// Per-label outgoing totals, observed plus unvisited.
fn out_signature(g: &LabeledGraph) -> Vec<usize> {
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut deg = vec![vec![0usize; g.labels.len()]; g.num_nodes];
    for &(s, _, l) in &g.edges {
        deg[s][l] += 1;
    }
    (0..g.num_nodes)
        .map(|s| {
            let row: Vec<usize> = (0..g.labels.len()).map(|l| deg[s][l] + g.unvisited_count(s, l)).collect();
            let len = ids.len();
            *ids.entry(row).or_insert(len)
        })
        .collect()
}

fn t_max(t: usize) -> usize {
    let (a, b) = T_TUPLES[t];
    a.max(b)
}

fn t_diag(t: usize) -> bool {
    let (a, b) = T_TUPLES[t];
    a == b
}

/// Free structure for learning: arities, literals, predicates, invariants.
fn learning_shape(m: &mut ConstraintModel, vm: &mut VarMap, b: &Bounds, opts: &EncodeOptions) -> Vec<BLit> {
    let (l, np) = (vm.labels.len(), vm.num_preds());
    m.group("arity");
    for a in 0..l {
        let ar: [BLit; 3] = std::array::from_fn(|k| if k < b.max_action_arity { m.new_blit() } else { BLit::FALSE });
        exactly_one(m, &ar);
        vm.ar[a] = ar;
    }
    for p in 0..np {
        vm.bin[p] = if b.max_pred_arity >= 2 { m.new_blit() } else { BLit::FALSE };
    }

    m.group("literals");
    for a in 0..l {
        let mut precs = Vec::new();
        let mut effs = Vec::new();
        for p in 0..np {
            for t in 0..NUM_T {
                if t_max(t) > b.max_action_arity || (!t_diag(t) && vm.bin[p].is_false()) {
                    continue;
                }
                for pol in [false, true] {
                    let pr = m.new_blit();
                    let idx = vm.pt_index(a, p, t, pol);
                    vm.prec[idx] = pr;
                    precs.push(pr);
                    if !vm.is_static[p] {
                        let ef = m.new_blit();
                        vm.eff[idx] = ef;
                        effs.push(ef);
                    }
                }
                if !vm.is_static[p] {
                    m.add(&[!vm.eff(a, p, t, false), !vm.eff(a, p, t, true)]);
                }
                for pol in [false, true] {
                    for x in [vm.prec(a, p, t, pol), vm.eff(a, p, t, pol)] {
                        if x.is_false() {
                            continue;
                        }
                        if !t_diag(t) {
                            m.implies(x, vm.bin[p]);
                        }
                        match t_max(t) {
                            3 => m.implies(x, vm.ar[a][2]),
                            2 => m.implies(x, !vm.ar[a][0]),
                            _ => {}
                        }
                    }
                }
            }
        }
        at_most_k(m, &precs, b.max_precs);
        at_least_one(m, &effs);
        at_most_k(m, &effs, b.max_effects);
    }

    m.group("used");
    for p in 0..np {
        let mut occ = Vec::new();
        for a in 0..l {
            for t in 0..NUM_T {
                for pol in [false, true] {
                    occ.push(vm.prec(a, p, t, pol));
                    occ.push(vm.eff(a, p, t, pol));
                }
            }
        }
        vm.used[p] = or_all(m, &occ);
        m.implies(vm.bin[p], vm.used[p]);
    }

    m.group("invariant-shape");
    let k_inv = vm.num_invariants;
    let mut nonempty = Vec::with_capacity(k_inv);
    for k in 0..k_inv {
        let mut all = Vec::new();
        for p in 0..np {
            let base = (k * np + p) * 3;
            let s1 = if vm.bin[p].is_true() { BLit::FALSE } else { m.new_blit() };
            m.implies(s1, !vm.bin[p]);
            m.implies(s1, vm.used[p]);
            vm.sel[base] = s1;
            all.push(s1);
            if !vm.is_static[p] && !vm.bin[p].is_false() {
                for pos in 1..3 {
                    let s = m.new_blit();
                    m.implies(s, vm.bin[p]);
                    vm.sel[base + pos] = s;
                    all.push(s);
                }
            }
        }
        nonempty.push(or_all(m, &all));
    }
    if k_inv > 0 {
        let dynamic: Vec<usize> = (0..np).filter(|&p| !vm.is_static[p]).collect();
        for k in 0..k_inv {
            let mut binary_members: Vec<BLit> = Vec::new();
            for &p in &dynamic {
                binary_members.push(vm.sel(k, p, 2));
                binary_members.push(vm.sel(k, p, 3));
            }
            // some binary member whenever a binary fluent exists
            for &p in &dynamic {
                let mut c = vec![!vm.bin[p]];
                c.extend_from_slice(&binary_members);
                m.add(&c);
            }
        }
        for &p in &dynamic {
            let mut c = vec![!vm.bin[p]];
            for k in 0..k_inv {
                c.push(vm.sel(k, p, 2));
                c.push(vm.sel(k, p, 3));
            }
            m.add(&c);
        }
    }

    if opts.symmetry_breaking {
        m.group("symmetry");
        for block in [false, true] {
            let slots: Vec<usize> = (0..np).filter(|&p| vm.is_static[p] == block).collect();
            for w in slots.windows(2) {
                let (i, j) = (w[0], w[1]);
                m.implies(vm.used[j], vm.used[i]);
                // unary predicates first
                m.add(&[!vm.bin[i], !vm.used[j], vm.bin[j]]);
            }
        }
        for k in 1..k_inv {
            m.implies(nonempty[k], nonempty[k - 1]);
        }
    }

    if opts.hints {
        // arities and predicate shapes first, the rest is left to activity
        for a in 0..l {
            for k in 0..3 {
                m.hint(vm.ar[a][k], 3, k == 0);
            }
        }
        for p in 0..np {
            m.hint(vm.bin[p], 3, false);
        }
    }
    nonempty
}

/// Structure of a fixed domain, all constants.
fn fixed_shape(vm: &mut VarMap, d: &Domain) -> Vec<BLit> {
    for (a, s) in d.schemas.iter().enumerate() {
        vm.ar[a] = std::array::from_fn(|k| BLit::Const(s.arity == k + 1));
        for (lits, is_eff) in [(&s.precs, false), (&s.effs, true)] {
            for lit in lits.iter() {
                let (t1, t2) = match lit.args.as_slice() {
                    [x] => (*x, *x),
                    [x, y] => (*x, *y),
                    _ => unreachable!("validated"),
                };
                let idx = vm.pt_index(a, lit.pred, t_index(t1, t2), lit.value);
                if is_eff {
                    vm.eff[idx] = BLit::TRUE;
                } else {
                    vm.prec[idx] = BLit::TRUE;
                }
            }
        }
    }
    for (p, sym) in d.predicates.iter().enumerate() {
        vm.bin[p] = BLit::Const(sym.arity == 2);
        vm.used[p] = BLit::TRUE;
    }
    let np = vm.num_preds();
    for (k, inv) in d.invariants.iter().enumerate() {
        for &(p, pos) in &inv.members {
            vm.sel[(k * np + p) * 3 + pos as usize - 1] = BLit::TRUE;
        }
    }
    d.invariants.iter().map(|inv| BLit::Const(!inv.members.is_empty())).collect()
}

struct GraphCtx<'a> {
    graph: &'a LabeledGraph,
    /// Graph label id to schema index.
    label_map: &'a [usize],
    offset: usize,
}

fn alloc_values(m: &mut ConstraintModel, vm: &mut VarMap, learning: bool) {
    let (np, na, n) = (vm.num_preds(), vm.num_atoms(), vm.num_objects);
    m.group("values");
    let fresh = |m: &mut ConstraintModel, g: usize, bin: BLit, used: BLit| -> BLit {
        if used.is_false() || (g / n != g % n && bin.is_false()) {
            return BLit::FALSE;
        }
        let v = m.new_blit();
        if learning {
            m.implies(v, used);
            if g / n != g % n {
                m.implies(v, bin);
            }
        }
        v
    };
    for graph in 0..vm.graph_nodes.len() {
        for p in (0..np).filter(|&p| vm.is_static[p]) {
            for g in 0..na {
                let v = fresh(m, g, vm.bin[p], vm.used[p]);
                vm.sval[(graph * np + p) * na + g] = v;
            }
        }
    }
    for s in 0..vm.num_states() {
        for p in (0..np).filter(|&p| !vm.is_static[p]) {
            for g in 0..na {
                let v = fresh(m, g, vm.bin[p], vm.used[p]);
                vm.val[(s * np + p) * na + g] = v;
            }
        }
    }
}

/// Clauses tying states to the graphs: applicability, transitions, effects,
/// frame, invariants and state distinctness.
fn encode_graphs(
    m: &mut ConstraintModel,
    vm: &mut VarMap,
    ctxs: &[GraphCtx<'_>],
    nonempty: &[BLit],
    opts: &EncodeOptions,
) -> Vec<(usize, usize)> {
    let (l, np, na, n) = (vm.labels.len(), vm.num_preds(), vm.num_atoms(), vm.num_objects);
    let n3 = n * n * n;
    let tuple = |oo: usize| [oo / (n * n), (oo / n) % n, oo % n];
    let bind: Vec<Vec<usize>> = (0..NUM_T)
        .map(|t| {
            let (t1, t2) = T_TUPLES[t];
            (0..n3)
                .map(|oo| {
                    let o = tuple(oo);
                    o[t1 - 1] * n + o[t2 - 1]
                })
                .collect()
        })
        .collect();
    // valid tuples per schema with the arity conditions they need
    let valid: Vec<Vec<(usize, BLit, BLit)>> = (0..l)
        .map(|a| {
            (0..n3)
                .filter_map(|oo| {
                    let o = tuple(oo);
                    let r3 = if o[2] != 0 { vm.ar[a][2] } else { BLit::TRUE };
                    let r2 = if o[1] != 0 { !vm.ar[a][0] } else { BLit::TRUE };
                    (!r3.is_false() && !r2.is_false()).then_some((oo, r3, r2))
                })
                .collect()
        })
        .collect();
    let precs: Vec<Vec<(usize, usize, bool, BLit)>> = (0..l)
        .map(|a| {
            let mut v = Vec::new();
            for p in 0..np {
                for t in 0..NUM_T {
                    for pol in [false, true] {
                        let x = vm.prec(a, p, t, pol);
                        if !x.is_false() {
                            v.push((p, t, pol, x));
                        }
                    }
                }
            }
            v
        })
        .collect();
    let effs: Vec<Vec<(usize, usize, bool, BLit)>> = (0..l)
        .map(|a| {
            let mut v = Vec::new();
            for p in 0..np {
                for t in 0..NUM_T {
                    for pol in [false, true] {
                        let x = vm.eff(a, p, t, pol);
                        if !x.is_false() {
                            v.push((p, t, pol, x));
                        }
                    }
                }
            }
            v
        })
        .collect();
    let t_needed: Vec<Vec<usize>> = (0..l)
        .map(|a| {
            let mut ts: Vec<usize> = effs[a].iter().map(|e| e.1).collect();
            ts.sort_unstable();
            ts.dedup();
            ts
        })
        .collect();
    let dynamic: Vec<usize> = (0..np).filter(|&p| !vm.is_static[p] && !vm.used[p].is_false()).collect();

    let mut pending = Vec::new();
    let viol_len = l * np * NUM_T * 2 * na;
    for (gi, ctx) in ctxs.iter().enumerate() {
        let g = ctx.graph;
        let value = |vm: &VarMap, node: usize, p: usize, atom: usize| -> BLit {
            if vm.is_static[p] {
                vm.sval(gi, p, atom)
            } else {
                vm.val(ctx.offset + node, p, atom)
            }
        };

        // applicability
        m.group("applicability");
        let mut static_viol: Vec<Option<BLit>> = vec![None; viol_len];
        let mut appl: Vec<Vec<BLit>> = Vec::with_capacity(g.num_nodes * l);
        for s in 0..g.num_nodes {
            let mut viol: Vec<Option<BLit>> = vec![None; viol_len];
            for a in 0..l {
                let mut row = vec![BLit::FALSE; n3];
                for &(oo, r3, r2) in &valid[a] {
                    let ap = m.new_blit();
                    row[oo] = ap;
                    vm.appl.push((a, oo, ctx.offset + s, ap));
                    m.implies(ap, r3);
                    m.implies(ap, r2);
                    let mut back = vec![ap, !r3, !r2];
                    for &(p, t, pol, pr) in &precs[a] {
                        let atom = bind[t][oo];
                        let v = value(vm, s, p, atom);
                        m.add(&[!ap, !pr, v.with(pol)]);
                        if pr.is_true() {
                            back.push(!v.with(pol));
                            continue;
                        }
                        let key = (((a * np + p) * NUM_T + t) * 2 + pol as usize) * na + atom;
                        let cache = if vm.is_static[p] { &mut static_viol } else { &mut viol };
                        let x = match cache[key] {
                            Some(x) => x,
                            None => {
                                let x = m.new_blit();
                                m.implies(x, pr);
                                m.implies(x, !v.with(pol));
                                cache[key] = Some(x);
                                x
                            }
                        };
                        back.push(x);
                    }
                    m.add(&back);
                }
                appl.push(row);
            }
        }

        // transitions
        m.group("transitions");
        let mut out: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); l]; g.num_nodes];
        for (e, &(s, _, lab)) in g.edges.iter().enumerate() {
            out[s][ctx.label_map[lab]].push(e);
        }
        let mut unvisited = vec![vec![0usize; l]; g.num_nodes];
        for (&s, counts) in &g.unvisited {
            for (&lab, &c) in counts {
                unvisited[s][ctx.label_map[lab]] += c;
            }
        }
        let mut edge_next: Vec<Vec<(usize, BLit)>> = vec![Vec::new(); g.edges.len()];
        for s in 0..g.num_nodes {
            for a in 0..l {
                let es = &out[s][a];
                let c = unvisited[s][a];
                let row = &appl[s * l + a];
                let mut frees = Vec::new();
                for &(oo, _, _) in &valid[a] {
                    let ap = row[oo];
                    let mut alts = Vec::with_capacity(es.len() + 1);
                    for &e in es {
                        let x = m.new_blit();
                        m.implies(x, ap);
                        edge_next[e].push((oo, x));
                        vm.next.push((gi, e, oo, x));
                        alts.push(x);
                    }
                    if c > 0 {
                        let f = m.new_blit();
                        m.implies(f, ap);
                        frees.push(f);
                        alts.push(f);
                    }
                    let mut clause = vec![!ap];
                    clause.extend_from_slice(&alts);
                    m.add(&clause);
                    at_most_one(m, &alts);
                }
                if c > 0 {
                    exactly_k(m, &frees, c);
                }
            }
        }
        for nexts in &edge_next {
            let lits: Vec<BLit> = nexts.iter().map(|x| x.1).collect();
            exactly_one(m, &lits);
        }

        // effects and frame, edge by edge
        m.group("effects-frame");
        for (e, &(s1, s2, lab)) in g.edges.iter().enumerate() {
            let a = ctx.label_map[lab];
            let mut mt: Vec<Vec<BLit>> = vec![Vec::new(); NUM_T];
            for &t in &t_needed[a] {
                let mut buckets: Vec<Vec<BLit>> = vec![Vec::new(); na];
                for &(oo, x) in &edge_next[e] {
                    buckets[bind[t][oo]].push(x);
                }
                mt[t] = buckets.iter().map(|bk| or_all(m, bk)).collect();
            }
            for &(p, t, pol, ef) in &effs[a] {
                for atom in 0..na {
                    let mg = mt[t][atom];
                    if mg.is_false() {
                        continue;
                    }
                    let v2 = value(vm, s2, p, atom);
                    m.add(&[!ef, !mg, v2.with(pol)]);
                }
            }
            for &p in &dynamic {
                for atom in 0..na {
                    let (v1, v2) = (value(vm, s1, p, atom), value(vm, s2, p, atom));
                    if v1.is_false() && v2.is_false() {
                        continue;
                    }
                    let mut causes = Vec::new();
                    for &t in &t_needed[a] {
                        let mg = mt[t][atom];
                        let (ep, en) = (vm.eff(a, p, t, true), vm.eff(a, p, t, false));
                        if mg.is_false() || (ep.is_false() && en.is_false()) {
                            continue;
                        }
                        if ep.is_true() || en.is_true() {
                            causes.push(mg);
                            continue;
                        }
                        let c = m.new_blit();
                        m.implies(c, mg);
                        m.add(&[!c, ep, en]);
                        causes.push(c);
                    }
                    let mut c1 = vec![!v1, v2];
                    c1.extend_from_slice(&causes);
                    m.add(&c1);
                    let mut c2 = vec![v1, !v2];
                    c2.extend_from_slice(&causes);
                    m.add(&c2);
                }
            }
        }

        // invariants
        m.group("invariants");
        for (k, &ne) in nonempty.iter().enumerate() {
            if ne.is_false() {
                continue;
            }
            let diag: Vec<BLit> = (0..np)
                .map(|p| or_all(m, &[vm.sel(k, p, 1), vm.sel(k, p, 2), vm.sel(k, p, 3)]))
                .collect();
            for s in 0..g.num_nodes {
                for o in 0..n {
                    let mut ys = Vec::new();
                    for p in 0..np {
                        let y = and2(m, diag[p], value(vm, s, p, o * n + o));
                        ys.push(y);
                        let (s2, s3) = (vm.sel(k, p, 2), vm.sel(k, p, 3));
                        for x in (0..n).filter(|&x| x != o) {
                            if !s2.is_false() {
                                let y = and2(m, s2, value(vm, s, p, o * n + x));
                                ys.push(y);
                            }
                            if !s3.is_false() {
                                let y = and2(m, s3, value(vm, s, p, x * n + o));
                                ys.push(y);
                            }
                        }
                    }
                    let mut c = vec![!ne];
                    c.extend_from_slice(&ys);
                    m.add(&c);
                    at_most_one(m, &ys);
                }
            }
        }

        // distinctness candidates
        let classes = if !opts.prune_distinct {
            vec![0; g.num_nodes]
        } else if g.unvisited.values().all(|c| c.values().all(|&x| x == 0)) {
            forward_classes(g)
        } else {
            out_signature(g)
        };
        let mut by_class: HashMap<usize, Vec<usize>> = HashMap::new();
        for s in (0..g.num_nodes).filter(|s| !g.ambiguous.contains(s)) {
            by_class.entry(classes[s]).or_default().push(s);
        }
        let mut keys: Vec<usize> = by_class.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let members = &by_class[&key];
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    pending.push((ctx.offset + members[i], ctx.offset + members[j]));
                }
            }
        }
    }
    pending
}

/// Per-state bound on true fluents plus the selectors of the atoms tier.
fn state_bound(m: &mut ConstraintModel, vm: &VarMap, max_true: usize) -> Tier {
    m.group("state-bound");
    let np = vm.num_preds();
    let selectors: Vec<BLit> = (0..max_true).map(|_| m.new_blit()).collect();
    for w in selectors.windows(2) {
        m.implies(w[0], w[1]);
    }
    for s in 0..vm.num_states() {
        let mut lits = Vec::new();
        for p in (0..np).filter(|&p| !vm.is_static[p]) {
            for g in 0..vm.num_atoms() {
                let v = vm.val(s, p, g);
                if !v.is_false() {
                    lits.push(v);
                }
            }
        }
        let out = counter_outputs(m, &lits, max_true + 1);
        if let Some(&over) = out.get(max_true) {
            m.add(&[!over]);
        }
        for (j, &sel) in selectors.iter().enumerate() {
            if let Some(&o) = out.get(j) {
                m.add(&[!sel, !o]);
            }
        }
    }
    Tier {
        kind: TierKind::Atoms,
        base: 0,
        le: selectors,
    }
}

fn counter_tier(m: &mut ConstraintModel, kind: TierKind, base: usize, lits: &[BLit]) -> Tier {
    let out = counter_outputs(m, lits, lits.len());
    Tier {
        kind,
        base,
        le: out.iter().map(|&o| !o).collect(),
    }
}

fn cost_tiers(m: &mut ConstraintModel, vm: &VarMap) -> Vec<Tier> {
    m.group("cost");
    let mut a_lits = Vec::new();
    for ar in &vm.ar {
        a_lits.push(!ar[0]);
        a_lits.push(ar[2]);
    }
    let tier_a = counter_tier(m, TierKind::Actions, 2 * vm.ar.len(), &a_lits);
    let mut b_lits = Vec::new();
    let mut c_lits = Vec::new();
    for p in 0..vm.num_preds() {
        if vm.is_static[p] {
            c_lits.extend([vm.used[p], vm.bin[p]]);
        } else {
            b_lits.extend([vm.used[p], vm.used[p], vm.bin[p]]);
        }
    }
    let tier_b = counter_tier(m, TierKind::Fluents, 0, &b_lits);
    let tier_c = counter_tier(m, TierKind::Statics, 0, &c_lits);
    vec![tier_a, tier_b, tier_c]
}

fn finish(
    mut m: ConstraintModel,
    mut vm: VarMap,
    tiers: Vec<Tier>,
    pending: Vec<(usize, usize)>,
    opts: &EncodeOptions,
) -> Encoding {
    vm.num_vars = m.num_vars;
    let mut enc = Encoding {
        model: std::mem::take(&mut m),
        varmap: vm,
        tiers,
        pending,
    };
    if !opts.lazy_distinct {
        let pairs = std::mem::take(&mut enc.pending);
        enc.model.group("distinct");
        for (a, b) in pairs {
            enc.add_distinct(a, b);
        }
    }
    enc
}

/// Model whose solutions are the domains and instances, within `bounds` and
/// with `num_objects` objects, that account for every graph.
pub fn build_learning_model(
    graphs: &[LabeledGraph],
    bounds: &Bounds,
    num_objects: usize,
    opts: &EncodeOptions,
) -> Result<Encoding, EncodeError> {
    bounds.check().map_err(EncodeError::Bounds)?;
    let refs: Vec<&LabeledGraph> = graphs.iter().collect();
    check_graphs(&refs)?;
    if num_objects == 0 {
        return Err(EncodeError::NoObjects);
    }
    let mut labels: Vec<String> = Vec::new();
    let mut maps = Vec::new();
    for g in graphs {
        let mut map = Vec::new();
        for name in &g.labels {
            let i = match labels.iter().position(|l| l == name) {
                Some(i) => i,
                None => {
                    labels.push(name.clone());
                    labels.len() - 1
                }
            };
            map.push(i);
        }
        maps.push(map);
    }
    if labels.is_empty() {
        return Err(EncodeError::NoLabels);
    }
    let np = bounds.max_predicates;
    let mut vm = VarMap {
        labels,
        num_objects,
        graph_nodes: graphs.iter().map(|g| g.num_nodes).collect(),
        is_static: (0..np).map(|p| p >= np - bounds.max_static_predicates).collect(),
        num_invariants: bounds.num_invariants,
        ..VarMap::default()
    };
    vm.allocate();
    let mut m = ConstraintModel::new();
    let nonempty = learning_shape(&mut m, &mut vm, bounds, opts);
    alloc_values(&mut m, &mut vm, true);
    let mut offset = 0;
    let ctxs: Vec<GraphCtx> = graphs
        .iter()
        .zip(&maps)
        .map(|(g, map)| {
            let c = GraphCtx {
                graph: g,
                label_map: map,
                offset,
            };
            offset += g.num_nodes;
            c
        })
        .collect();
    let pending = encode_graphs(&mut m, &mut vm, &ctxs, &nonempty, opts);
    let mut tiers = cost_tiers(&mut m, &vm);
    tiers.push(state_bound(&mut m, &vm, bounds.max_true_atoms_per_state));
    Ok(finish(m, vm, tiers, pending, opts))
}

/// Model whose solutions are instances of the fixed domain `d` with
/// `num_objects` objects that account for `graph`. `label_map[l]` is the
/// schema for graph label `l`.
pub fn build_verification_model(
    d: &Domain,
    graph: &LabeledGraph,
    label_map: &[usize],
    bounds: &Bounds,
    num_objects: usize,
    opts: &EncodeOptions,
) -> Result<Encoding, EncodeError> {
    let problems = validate(d, None, bounds);
    if !problems.is_empty() {
        return Err(EncodeError::Bounds(problems.join("; ")));
    }
    check_graphs(&[graph])?;
    if num_objects == 0 {
        return Err(EncodeError::NoObjects);
    }
    if label_map.len() != graph.labels.len() || label_map.iter().any(|&a| a >= d.schemas.len()) {
        return Err(EncodeError::Domain("label map does not cover the graph labels".into()));
    }
    let mut seen = vec![false; d.schemas.len()];
    for &a in label_map {
        if std::mem::replace(&mut seen[a], true) {
            return Err(EncodeError::Domain("two labels map to one schema".into()));
        }
    }
    for s in &d.schemas {
        let bad = s.precs.iter().chain(&s.effs).any(|l| l.args.is_empty() || l.args.len() > 2);
        if s.arity > 3 || bad {
            return Err(EncodeError::Domain(format!("schema {} is outside the encodable shape", s.label)));
        }
    }
    let mut vm = VarMap {
        labels: d.labels(),
        num_objects,
        graph_nodes: vec![graph.num_nodes],
        is_static: d.predicates.iter().map(|p| p.is_static).collect(),
        num_invariants: d.invariants.len(),
        fixed_domain: Some(d.clone()),
        ..VarMap::default()
    };
    vm.allocate();
    let nonempty = fixed_shape(&mut vm, d);
    let mut m = ConstraintModel::new();
    alloc_values(&mut m, &mut vm, false);
    let ctxs = [GraphCtx {
        graph,
        label_map,
        offset: 0,
    }];
    let pending = encode_graphs(&mut m, &mut vm, &ctxs, &nonempty, opts);
    Ok(finish(m, vm, Vec::new(), pending, opts))
}
