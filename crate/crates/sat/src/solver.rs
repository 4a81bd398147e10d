//! Conflict-driven clause-learning core.
//!
//! Two-watched-literal propagation with blocker literals and a fast path for
//! binary clauses, first-UIP learning with recursive minimization, activity
//! branching ordered by a user priority tier, phase saving, Luby restarts and
//! LBD-based learnt clause reduction. Assumptions are handled as the first
//! decision levels, so clauses may be added between calls.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::lit::{Lit, Var};

type CRef = u32;
const NO_REASON: CRef = u32::MAX;
const HEADER: usize = 3;

const FLAG_LEARNT: u32 = 1;
const FLAG_DELETED: u32 = 2;

const VAL_TRUE: u8 = 0;
const VAL_FALSE: u8 = 1;
const VAL_UNDEF: u8 = 2;

/// Outcome of a solve call.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    /// The budget ran out or the call was interrupted.
    Unknown,
}

/// Resource limits for one solve call.
#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub deadline: Option<Instant>,
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Self {
        Budget {
            max_conflicts: Some(n),
            ..Budget::default()
        }
    }

    pub fn time(limit: Duration) -> Self {
        Budget {
            deadline: Some(Instant::now() + limit),
            ..Budget::default()
        }
    }

    pub fn with_interrupt(mut self, flag: Arc<AtomicBool>) -> Self {
        self.interrupt = Some(flag);
        self
    }

    fn exhausted(&self, conflicts_used: u64) -> bool {
        if let Some(max) = self.max_conflicts {
            if conflicts_used >= max {
                return true;
            }
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                return true;
            }
        }
        if let Some(flag) = &self.interrupt {
            if flag.load(Ordering::Relaxed) {
                return true;
            }
        }
        false
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Conflicts per Luby unit.
    pub restart_base: u64,
    pub reduce_first: u64,
    pub reduce_increment: u64,
    /// Nonzero seeds perturb initial variable activities.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            var_decay: 0.95,
            clause_decay: 0.999,
            restart_base: 100,
            reduce_first: 2000,
            reduce_increment: 300,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_literals: u64,
    pub deleted_clauses: u64,
    pub solve_time: Duration,
}

#[derive(Copy, Clone)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
    binary: bool,
}

/// Flat clause storage: `[len, flags | lbd << 2, activity bits, lits...]`.
#[derive(Default)]
struct Arena {
    data: Vec<u32>,
    wasted: usize,
}

impl Arena {
    fn alloc(&mut self, lits: &[Lit], learnt: bool, lbd: u32) -> CRef {
        let cref = self.data.len() as CRef;
        self.data.push(lits.len() as u32);
        self.data
            .push((if learnt { FLAG_LEARNT } else { 0 }) | (lbd.min(1 << 28) << 2));
        self.data.push(0f32.to_bits());
        self.data.extend(lits.iter().map(|l| l.code() as u32));
        cref
    }

    fn len(&self, c: CRef) -> usize {
        self.data[c as usize] as usize
    }

    fn lits(&self, c: CRef) -> &[u32] {
        let s = c as usize + HEADER;
        &self.data[s..s + self.len(c)]
    }

    fn lits_mut(&mut self, c: CRef) -> &mut [u32] {
        let s = c as usize + HEADER;
        let n = self.len(c);
        &mut self.data[s..s + n]
    }

    fn lit(&self, c: CRef, i: usize) -> Lit {
        Lit::from_code(self.data[c as usize + HEADER + i])
    }

    fn flags(&self, c: CRef) -> u32 {
        self.data[c as usize + 1]
    }

    fn is_deleted(&self, c: CRef) -> bool {
        self.flags(c) & FLAG_DELETED != 0
    }

    fn lbd(&self, c: CRef) -> u32 {
        self.flags(c) >> 2
    }

    fn set_lbd(&mut self, c: CRef, lbd: u32) {
        let f = self.flags(c) & 3;
        self.data[c as usize + 1] = f | (lbd.min(1 << 28) << 2);
    }

    fn delete(&mut self, c: CRef) {
        self.data[c as usize + 1] |= FLAG_DELETED;
        self.wasted += HEADER + self.len(c);
    }

    fn activity(&self, c: CRef) -> f32 {
        f32::from_bits(self.data[c as usize + 2])
    }

    fn set_activity(&mut self, c: CRef, a: f32) {
        self.data[c as usize + 2] = a.to_bits();
    }
}

/// Binary max-heap of variables keyed by (priority, activity).
#[derive(Default)]
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl VarOrder {
    fn before(a: u32, b: u32, prio: &[i32], act: &[f64]) -> bool {
        let (a, b) = (a as usize, b as usize);
        prio[a] > prio[b] || (prio[a] == prio[b] && act[a] > act[b])
    }

    fn grow(&mut self, n: usize) {
        self.pos.resize(n, NOT_IN_HEAP);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    fn insert(&mut self, v: u32, prio: &[i32], act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, prio, act);
    }

    fn update(&mut self, v: u32, prio: &[i32], act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v as usize] as usize, prio, act);
        }
    }

    fn pop(&mut self, prio: &[i32], act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, prio, act);
        }
        Some(top)
    }

    fn rebuild(&mut self, vars: impl Iterator<Item = u32>, prio: &[i32], act: &[f64]) {
        for &v in &self.heap {
            self.pos[v as usize] = NOT_IN_HEAP;
        }
        self.heap.clear();
        for v in vars {
            self.pos[v as usize] = self.heap.len() as u32;
            self.heap.push(v);
        }
        for i in (0..self.heap.len() / 2).rev() {
            self.sift_down(i, prio, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, prio: &[i32], act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(v, p, prio, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, prio: &[i32], act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::before(self.heap[r], self.heap[l], prio, act) {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if !Self::before(c, v, prio, act) {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }
}

enum SearchOutcome {
    Sat,
    Unsat,
    Restart,
    Unknown,
}

/// Incremental CDCL solver.
pub struct Solver {
    config: SolverConfig,
    ok: bool,
    assigns: Vec<u8>,
    levels: Vec<u32>,
    reasons: Vec<CRef>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    watches: Vec<Vec<Watcher>>,
    arena: Arena,
    originals: Vec<CRef>,
    learnts: Vec<CRef>,
    units: Vec<Lit>,
    activity: Vec<f64>,
    priority: Vec<i32>,
    var_inc: f64,
    clause_inc: f32,
    order: VarOrder,
    order_dirty: bool,
    phase: Vec<bool>,
    seen: Vec<bool>,
    analyze_stack: Vec<Lit>,
    analyze_clear: Vec<Lit>,
    level_stamp: Vec<u64>,
    stamp: u64,
    model: Vec<bool>,
    next_reduce: u64,
    reductions: u64,
    stats: Stats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver::with_config(SolverConfig::default())
    }

    pub fn with_config(config: SolverConfig) -> Self {
        let next_reduce = config.reduce_first;
        Solver {
            config,
            ok: true,
            assigns: Vec::new(),
            levels: Vec::new(),
            reasons: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            watches: Vec::new(),
            arena: Arena::default(),
            originals: Vec::new(),
            learnts: Vec::new(),
            units: Vec::new(),
            activity: Vec::new(),
            priority: Vec::new(),
            var_inc: 1.0,
            clause_inc: 1.0,
            order: VarOrder::default(),
            order_dirty: false,
            phase: Vec::new(),
            seen: Vec::new(),
            analyze_stack: Vec::new(),
            analyze_clear: Vec::new(),
            level_stamp: Vec::new(),
            stamp: 0,
            model: Vec::new(),
            next_reduce,
            reductions: 0,
            stats: Stats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.originals.len() + self.units.len()
    }

    pub fn num_learnts(&self) -> usize {
        self.learnts.len()
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    /// False once the clause set is known to be unsatisfiable without assumptions.
    pub fn is_consistent(&self) -> bool {
        self.ok
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len();
        self.ensure_vars(v + 1);
        Var::new(v as u32)
    }

    /// Grows the variable table so that indices `0..n` exist.
    pub fn ensure_vars(&mut self, n: usize) {
        let old = self.assigns.len();
        if n <= old {
            return;
        }
        self.assigns.resize(n, VAL_UNDEF);
        self.levels.resize(n, 0);
        self.reasons.resize(n, NO_REASON);
        self.watches.resize_with(2 * n, Vec::new);
        self.priority.resize(n, 0);
        self.phase.resize(n, false);
        self.seen.resize(n, false);
        self.activity.resize(n, 0.0);
        if self.config.seed != 0 {
            let mut state = self.config.seed;
            for v in old..n {
                state = splitmix64(state ^ v as u64);
                self.activity[v] = (state >> 11) as f64 / (1u64 << 53) as f64 * 1e-5;
            }
        }
        self.order.grow(n);
        for v in old..n {
            self.order.insert(v as u32, &self.priority, &self.activity);
        }
    }

    /// Preferred initial polarity for decisions on `var`.
    pub fn set_phase(&mut self, var: Var, value: bool) {
        self.ensure_vars(var.index() + 1);
        self.phase[var.index()] = value;
    }

    /// Variables with higher priority are always decided before lower ones.
    pub fn set_priority(&mut self, var: Var, priority: i32) {
        self.ensure_vars(var.index() + 1);
        if self.priority[var.index()] != priority {
            self.priority[var.index()] = priority;
            self.order_dirty = true;
        }
    }

    fn lit_value(&self, l: Lit) -> u8 {
        let a = self.assigns[l.var().index()];
        if a == VAL_UNDEF {
            VAL_UNDEF
        } else {
            a ^ l.is_negated() as u8
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause permanently. Returns false if the formula became unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let max_var = lits.iter().map(|l| l.var().index() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        let mut clause: Vec<Lit> = lits.to_vec();
        clause.sort_unstable();
        clause.dedup();
        for w in clause.windows(2) {
            if w[0].var() == w[1].var() {
                return true;
            }
        }
        let mut kept = Vec::with_capacity(clause.len());
        for &l in &clause {
            match self.lit_value(l) {
                VAL_TRUE => return true,
                VAL_FALSE => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.units.push(kept[0]);
                self.enqueue(kept[0], NO_REASON);
                if self.propagate() != NO_REASON {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                let cref = self.arena.alloc(&kept, false, 0);
                self.originals.push(cref);
                self.attach(cref);
                true
            }
        }
    }

    fn attach(&mut self, cref: CRef) {
        let a = self.arena.lit(cref, 0);
        let b = self.arena.lit(cref, 1);
        let binary = self.arena.len(cref) == 2;
        self.watches[(!a).code()].push(Watcher {
            cref,
            blocker: b,
            binary,
        });
        self.watches[(!b).code()].push(Watcher {
            cref,
            blocker: a,
            binary,
        });
    }

    fn enqueue(&mut self, l: Lit, reason: CRef) {
        let v = l.var().index();
        self.assigns[v] = l.is_negated() as u8;
        self.levels[v] = self.decision_level() as u32;
        self.reasons[v] = reason;
        self.trail.push(l);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = VAL_UNDEF;
            self.reasons[v] = NO_REASON;
            self.phase[v] = !l.is_negated();
            self.order.insert(v as u32, &self.priority, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = start;
    }

    /// Unit propagation. Returns a conflicting clause or `NO_REASON`.
    fn propagate(&mut self) -> CRef {
        let mut conflict = NO_REASON;
        while self.qhead < self.trail.len() && conflict == NO_REASON {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                let bv = self.lit_value(w.blocker);
                if bv == VAL_TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                if w.binary {
                    ws[j] = w;
                    j += 1;
                    if bv == VAL_FALSE {
                        conflict = w.cref;
                        break;
                    }
                    self.enqueue(w.blocker, w.cref);
                    continue;
                }
                let cref = w.cref;
                if self.arena.is_deleted(cref) {
                    continue;
                }
                {
                    let lits = self.arena.lits_mut(cref);
                    if lits[0] == false_lit.code() as u32 {
                        lits.swap(0, 1);
                    }
                }
                let first = self.arena.lit(cref, 0);
                if first != w.blocker && self.lit_value(first) == VAL_TRUE {
                    ws[j] = Watcher {
                        cref,
                        blocker: first,
                        binary: false,
                    };
                    j += 1;
                    continue;
                }
                let len = self.arena.len(cref);
                let mut found = false;
                for k in 2..len {
                    let lk = self.arena.lit(cref, k);
                    if self.lit_value(lk) != VAL_FALSE {
                        let lits = self.arena.lits_mut(cref);
                        lits.swap(1, k);
                        self.watches[(!lk).code()].push(Watcher {
                            cref,
                            blocker: first,
                            binary: false,
                        });
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                ws[j] = w;
                j += 1;
                if self.lit_value(first) == VAL_FALSE {
                    conflict = cref;
                    break;
                }
                self.enqueue(first, cref);
            }
            while i < ws.len() {
                ws[j] = ws[i];
                j += 1;
                i += 1;
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.update(v as u32, &self.priority, &self.activity);
    }

    fn bump_clause(&mut self, c: CRef) {
        let a = self.arena.activity(c) + self.clause_inc;
        self.arena.set_activity(c, a);
        if a > 1e20 {
            for &l in &self.learnts {
                let x = self.arena.activity(l) * 1e-20;
                self.arena.set_activity(l, x);
            }
            self.clause_inc *= 1e-20;
        }
    }

    fn compute_lbd(&mut self, lits: &[Lit]) -> u32 {
        self.stamp += 1;
        let mut n = 0;
        for l in lits {
            let lv = self.levels[l.var().index()] as usize;
            if lv >= self.level_stamp.len() {
                self.level_stamp.resize(lv + 1, 0);
            }
            if self.level_stamp[lv] != self.stamp {
                self.level_stamp[lv] = self.stamp;
                n += 1;
            }
        }
        n
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            if self.arena.flags(confl) & FLAG_LEARNT != 0 {
                self.bump_clause(confl);
                // Tighten LBD of clauses that keep participating.
                let lbd = self.arena.lbd(confl);
                if lbd > 2 {
                    let lits: Vec<Lit> = self
                        .arena
                        .lits(confl)
                        .iter()
                        .map(|&c| Lit::from_code(c))
                        .collect();
                    let new_lbd = self.compute_lbd(&lits);
                    if new_lbd < lbd {
                        self.arena.set_lbd(confl, new_lbd);
                    }
                }
            }
            let len = self.arena.len(confl);
            for k in 0..len {
                let q = self.arena.lit(confl, k);
                if Some(q) == p {
                    continue;
                }
                let v = q.var().index();
                if !self.seen[v] && self.levels[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.levels[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            confl = self.reasons[pl.var().index()];
            self.seen[pl.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.unwrap();

        // Recursive minimization.
        self.analyze_clear.clear();
        self.analyze_clear.extend_from_slice(&learnt);
        let mut abstract_levels = 0u32;
        for l in &learnt[1..] {
            abstract_levels |= 1 << (self.levels[l.var().index()] & 31);
        }
        let mut kept = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            if self.reasons[l.var().index()] == NO_REASON || !self.lit_redundant(l, abstract_levels)
            {
                learnt[kept] = l;
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in std::mem::take(&mut self.analyze_clear) {
            self.seen[l.var().index()] = false;
        }

        let bt_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.levels[learnt[i].var().index()] > self.levels[learnt[max_i].var().index()]
                {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.levels[learnt[1].var().index()] as usize
        };
        (learnt, bt_level)
    }

    fn lit_redundant(&mut self, p: Lit, abstract_levels: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(p);
        let top = self.analyze_clear.len();
        while let Some(q) = self.analyze_stack.pop() {
            let c = self.reasons[q.var().index()];
            let len = self.arena.len(c);
            for k in 0..len {
                let l = self.arena.lit(c, k);
                let v = l.var().index();
                if v == q.var().index() || self.seen[v] || self.levels[v] == 0 {
                    continue;
                }
                if self.reasons[v] != NO_REASON
                    && (1u32 << (self.levels[v] & 31)) & abstract_levels != 0
                {
                    self.seen[v] = true;
                    self.analyze_stack.push(l);
                    self.analyze_clear.push(l);
                } else {
                    for x in self.analyze_clear.drain(top..) {
                        self.seen[x.var().index()] = false;
                    }
                    return false;
                }
            }
        }
        true
    }

    fn locked(&self, c: CRef) -> bool {
        let first = self.arena.lit(c, 0);
        self.lit_value(first) == VAL_TRUE && self.reasons[first.var().index()] == c
    }

    fn reduce_db(&mut self) {
        self.reductions += 1;
        let mut cands: Vec<CRef> = Vec::with_capacity(self.learnts.len());
        let mut keep: Vec<CRef> = Vec::with_capacity(self.learnts.len());
        for &c in &self.learnts {
            if self.arena.is_deleted(c) {
                continue;
            }
            if self.arena.lbd(c) <= 2 || self.arena.len(c) == 2 || self.locked(c) {
                keep.push(c);
            } else {
                cands.push(c);
            }
        }
        cands.sort_by(|&a, &b| {
            self.arena
                .lbd(b)
                .cmp(&self.arena.lbd(a))
                .then(
                    self.arena
                        .activity(a)
                        .partial_cmp(&self.arena.activity(b))
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
        });
        let remove = cands.len() / 2;
        for (i, &c) in cands.iter().enumerate() {
            if i < remove {
                self.arena.delete(c);
                self.stats.deleted_clauses += 1;
            } else {
                keep.push(c);
            }
        }
        self.learnts = keep;
    }

    /// Rebuilds the arena without deleted clauses. Only valid at level 0.
    fn compact(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        let mut fresh = Arena::default();
        let mut originals = Vec::with_capacity(self.originals.len());
        for &c in &self.originals {
            let lits: Vec<Lit> = self.arena.lits(c).iter().map(|&x| Lit::from_code(x)).collect();
            originals.push(fresh.alloc(&lits, false, 0));
        }
        let mut learnts = Vec::with_capacity(self.learnts.len());
        for &c in &self.learnts {
            if self.arena.is_deleted(c) {
                continue;
            }
            let lits: Vec<Lit> = self.arena.lits(c).iter().map(|&x| Lit::from_code(x)).collect();
            let n = fresh.alloc(&lits, true, self.arena.lbd(c));
            fresh.set_activity(n, self.arena.activity(c));
            learnts.push(n);
        }
        self.arena = fresh;
        self.originals = originals;
        self.learnts = learnts;
        for ws in self.watches.iter_mut() {
            ws.clear();
        }
        for l in &self.trail {
            self.reasons[l.var().index()] = NO_REASON;
        }
        let all: Vec<CRef> = self.originals.iter().chain(self.learnts.iter()).copied().collect();
        for c in all {
            self.attach(c);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        loop {
            let v = self.order.pop(&self.priority, &self.activity)?;
            if self.assigns[v as usize] == VAL_UNDEF {
                return Some(Var::new(v).lit(self.phase[v as usize]));
            }
        }
    }

    fn search(&mut self, assumptions: &[Lit], conflict_limit: u64, budget: &Budget, used: &mut u64) -> SearchOutcome {
        let mut local_conflicts = 0u64;
        loop {
            let confl = self.propagate();
            if confl != NO_REASON {
                self.stats.conflicts += 1;
                *used += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SearchOutcome::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                self.stats.learnt_literals += learnt.len() as u64;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.compute_lbd(&learnt);
                    let cref = self.arena.alloc(&learnt, true, lbd);
                    self.learnts.push(cref);
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.enqueue(learnt[0], cref);
                }
                self.var_inc /= self.config.var_decay;
                self.clause_inc /= self.config.clause_decay as f32;
                if (*used & 63) == 0 && budget.exhausted(*used) {
                    return SearchOutcome::Unknown;
                }
                if let Some(max) = budget.max_conflicts {
                    if *used >= max {
                        return SearchOutcome::Unknown;
                    }
                }
            } else {
                if local_conflicts >= conflict_limit {
                    return SearchOutcome::Restart;
                }
                if self.stats.conflicts >= self.next_reduce {
                    self.next_reduce = self.stats.conflicts
                        + self.config.reduce_first
                        + self.config.reduce_increment * self.reductions;
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.lit_value(a) {
                        VAL_TRUE => self.new_decision_level(),
                        VAL_FALSE => return SearchOutcome::Unsat,
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(a) => a,
                    None => {
                        self.stats.decisions += 1;
                        if (self.stats.decisions & 1023) == 0 && budget.exhausted(*used) {
                            return SearchOutcome::Unknown;
                        }
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return SearchOutcome::Sat,
                        }
                    }
                };
                self.new_decision_level();
                self.enqueue(next, NO_REASON);
            }
        }
    }

    /// Solves under the given assumptions. On `Sat` the model is available via
    /// [`Solver::model`]; it is checked against every stored clause first.
    pub fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> Status {
        let started = Instant::now();
        let status = self.solve_inner(assumptions, budget);
        self.stats.solve_time += started.elapsed();
        status
    }

    fn solve_inner(&mut self, assumptions: &[Lit], budget: &Budget) -> Status {
        self.model.clear();
        if !self.ok {
            return Status::Unsat;
        }
        let max_var = assumptions.iter().map(|l| l.var().index() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        self.cancel_until(0);
        if self.order_dirty {
            let unassigned: Vec<u32> = (0..self.num_vars() as u32)
                .filter(|&v| self.assigns[v as usize] == VAL_UNDEF)
                .collect();
            self.order.rebuild(unassigned.into_iter(), &self.priority, &self.activity);
            self.order_dirty = false;
        }
        let mut used = 0u64;
        let mut restart_index = 0u64;
        loop {
            if budget.exhausted(used) {
                self.cancel_until(0);
                return Status::Unknown;
            }
            let limit = luby(restart_index) * self.config.restart_base;
            restart_index += 1;
            match self.search(assumptions, limit, budget, &mut used) {
                SearchOutcome::Sat => {
                    self.model = self.assigns.iter().map(|&a| a == VAL_TRUE).collect();
                    self.check_model();
                    self.cancel_until(0);
                    return Status::Sat;
                }
                SearchOutcome::Unsat => {
                    self.cancel_until(0);
                    return Status::Unsat;
                }
                SearchOutcome::Unknown => {
                    self.cancel_until(0);
                    return Status::Unknown;
                }
                SearchOutcome::Restart => {
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                    if self.arena.wasted * 2 > self.arena.data.len() {
                        self.compact();
                    }
                }
            }
        }
    }

    fn check_model(&self) {
        for &c in &self.originals {
            let sat = self
                .arena
                .lits(c)
                .iter()
                .any(|&x| Lit::from_code(x).eval(&self.model));
            assert!(sat, "solver produced an assignment violating a stored clause");
        }
        for &u in &self.units {
            assert!(u.eval(&self.model), "solver produced an assignment violating a unit clause");
        }
    }

    /// Model of the last successful call, indexed by variable.
    pub fn model(&self) -> &[bool] {
        &self.model
    }

    pub fn model_value(&self, l: Lit) -> bool {
        l.eval(&self.model)
    }
}

/// The Luby restart sequence 1,1,2,1,1,2,4,...
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(xs: &[i64]) -> Vec<Lit> {
        xs.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect()
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn contradictory_units_are_unsat() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1]));
        s.add_clause(&lits(&[-1]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Unsat);
    }

    #[test]
    fn assumptions_do_not_persist() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1, 2]));
        s.add_clause(&lits(&[-1, 2]));
        assert_eq!(s.solve(&lits(&[-2]), &Budget::unlimited()), Status::Unsat);
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat);
        assert!(s.model_value(lits(&[2])[0]));
    }

    #[test]
    fn incremental_clauses_tighten() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1, 2, 3]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat);
        s.add_clause(&lits(&[-1]));
        s.add_clause(&lits(&[-2]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat);
        assert!(s.model_value(lits(&[3])[0]));
        s.add_clause(&lits(&[-3]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Unsat);
    }

    #[test]
    fn priority_orders_decisions() {
        let mut s = Solver::new();
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[a.pos(), b.pos()]);
        s.set_priority(b, 5);
        s.set_phase(b, true);
        s.set_phase(a, false);
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat);
        assert!(s.model()[b.index()]);
        assert!(!s.model()[a.index()]);
    }

    #[test]
    fn zero_conflict_budget_returns_unknown_on_hard_input() {
        let mut s = Solver::new();
        // PHP(3 -> 2) needs at least one conflict.
        let p = |i: i64, j: i64| i * 2 + j + 1;
        for i in 0..3 {
            s.add_clause(&lits(&[p(i, 0), p(i, 1)]));
        }
        for j in 0..2 {
            for i in 0..3 {
                for k in i + 1..3 {
                    s.add_clause(&lits(&[-p(i, j), -p(k, j)]));
                }
            }
        }
        assert_eq!(s.solve(&[], &Budget::conflicts(0)), Status::Unknown);
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Unsat);
    }
}
