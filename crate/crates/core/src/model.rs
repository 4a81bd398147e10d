//! Symbolic domains, instances, states and cost vectors.
//!
//! Objects are dense integers `0..num_objects` in memory and `1..=num_objects`
//! in files. Schema literals refer to action parameters by 1-based position.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Hard limits on the shape of learnable models.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bounds {
    pub max_predicates: usize,
    pub max_static_predicates: usize,
    pub max_precs: usize,
    pub max_effects: usize,
    pub max_action_arity: usize,
    pub max_pred_arity: usize,
    pub max_true_atoms_per_state: usize,
    pub num_invariants: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_predicates: 5,
            max_static_predicates: 2,
            max_precs: 6,
            max_effects: 6,
            max_action_arity: 3,
            max_pred_arity: 2,
            max_true_atoms_per_state: 10,
            num_invariants: 1,
        }
    }
}

impl Bounds {
    pub fn check(&self) -> Result<(), String> {
        if self.max_predicates == 0 || self.max_effects == 0 || self.max_action_arity == 0 {
            return Err("bounds must be positive".into());
        }
        if self.max_static_predicates > self.max_predicates {
            return Err("more static predicates than predicates".into());
        }
        if !(1..=3).contains(&self.max_action_arity) || !(1..=2).contains(&self.max_pred_arity) {
            return Err("action arity must be 1..3 and predicate arity 1..2".into());
        }
        Ok(())
    }

    /// Smallest bounds at least as large as `self` that admit `d`.
    pub fn widened_for(&self, d: &Domain) -> Bounds {
        let statics = d.predicates.iter().filter(|p| p.is_static).count();
        let mut b = self.clone();
        b.max_predicates = b.max_predicates.max(d.predicates.len());
        b.max_static_predicates = b.max_static_predicates.max(statics);
        b.max_predicates = b.max_predicates.max(b.max_static_predicates);
        for s in &d.schemas {
            b.max_precs = b.max_precs.max(s.precs.len());
            b.max_effects = b.max_effects.max(s.effs.len());
            b.max_action_arity = b.max_action_arity.max(s.arity);
        }
        for p in &d.predicates {
            b.max_pred_arity = b.max_pred_arity.max(p.arity);
        }
        b.num_invariants = b.num_invariants.max(d.invariants.len());
        b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredicateSym {
    pub name: String,
    pub arity: usize,
    #[serde(rename = "static")]
    pub is_static: bool,
}

/// `pred(args) = value`, with `args` 1-based action parameter positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemaLiteral {
    pub pred: usize,
    pub args: Vec<usize>,
    pub value: bool,
}

impl Serialize for SchemaLiteral {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.pred, &self.args, self.value as u8).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SchemaLiteral {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (pred, args, value): (usize, Vec<usize>, u8) = Deserialize::deserialize(d)?;
        if value > 1 {
            return Err(serde::de::Error::custom("literal value must be 0 or 1"));
        }
        Ok(SchemaLiteral {
            pred,
            args,
            value: value == 1,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub label: String,
    pub arity: usize,
    pub params: Vec<String>,
    #[serde(rename = "pre")]
    pub precs: Vec<SchemaLiteral>,
    #[serde(rename = "eff")]
    pub effs: Vec<SchemaLiteral>,
}

impl ActionSchema {
    pub fn new(label: &str, arity: usize, precs: Vec<SchemaLiteral>, effs: Vec<SchemaLiteral>) -> Self {
        let mut s = ActionSchema {
            label: label.to_string(),
            arity,
            params: (1..=arity).map(|i| format!("x{i}")).collect(),
            precs,
            effs,
        };
        s.canonicalize();
        s
    }

    pub fn with_params(mut self, params: &[&str]) -> Self {
        self.params = params.iter().map(|p| p.to_string()).collect();
        self
    }

    pub fn canonicalize(&mut self) {
        self.precs.sort();
        self.precs.dedup();
        self.effs.sort();
        self.effs.dedup();
    }
}

/// An exactly-one invariant. Each member is `(pred, free_pos)`: 1 for a unary
/// predicate `p(o)`, 2 for `p(o, _)` and 3 for `p(_, o)` where `_` ranges over
/// all objects and `o` is the object the invariant talks about.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Invariant {
    pub members: Vec<(usize, u8)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub predicates: Vec<PredicateSym>,
    pub schemas: Vec<ActionSchema>,
    #[serde(default)]
    pub invariants: Vec<Invariant>,
}

impl Domain {
    pub fn pred_by_name(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    pub fn schema_by_label(&self, label: &str) -> Option<usize> {
        self.schemas.iter().position(|s| s.label == label)
    }

    pub fn labels(&self) -> Vec<String> {
        self.schemas.iter().map(|s| s.label.clone()).collect()
    }
}

/// A ground atom over 0-based objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: usize,
    pub objs: Vec<usize>,
}

impl Atom {
    pub fn new(pred: usize, objs: &[usize]) -> Self {
        Atom {
            pred,
            objs: objs.to_vec(),
        }
    }
}

/// File form: `[pred, [objs...]]` with 1-based objects.
#[derive(Serialize, Deserialize)]
struct FileAtom(usize, Vec<usize>);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub num_objects: usize,
    pub static_true: BTreeSet<Atom>,
    pub init_true: BTreeSet<Atom>,
    /// Carried through files only; no operation reads it.
    pub goal: Vec<(Atom, bool)>,
}

#[derive(Serialize, Deserialize)]
struct FileInstance {
    num_objects: usize,
    static_true: Vec<FileAtom>,
    init_true: Vec<FileAtom>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    goal: Vec<(FileAtom, u8)>,
}

fn atom_to_file(a: &Atom) -> FileAtom {
    FileAtom(a.pred, a.objs.iter().map(|o| o + 1).collect())
}

fn atom_from_file(a: FileAtom) -> Result<Atom, ModelError> {
    if a.1.contains(&0) {
        return Err(ModelError::Invalid("objects are numbered from 1 in files".into()));
    }
    Ok(Atom {
        pred: a.0,
        objs: a.1.into_iter().map(|o| o - 1).collect(),
    })
}

impl Instance {
    fn to_file(&self) -> FileInstance {
        FileInstance {
            num_objects: self.num_objects,
            static_true: self.static_true.iter().map(atom_to_file).collect(),
            init_true: self.init_true.iter().map(atom_to_file).collect(),
            goal: self
                .goal
                .iter()
                .map(|(a, v)| (atom_to_file(a), *v as u8))
                .collect(),
        }
    }

    fn from_file(f: FileInstance) -> Result<Self, ModelError> {
        let mut inst = Instance {
            num_objects: f.num_objects,
            ..Instance::default()
        };
        for a in f.static_true {
            inst.static_true.insert(atom_from_file(a)?);
        }
        for a in f.init_true {
            inst.init_true.insert(atom_from_file(a)?);
        }
        for (a, v) in f.goal {
            inst.goal.push((atom_from_file(a)?, v != 0));
        }
        Ok(inst)
    }
}

/// Canonical index of ground atoms: predicates by id, then object tuples in
/// row-major order. Dynamic and static atoms are numbered separately.
#[derive(Clone, Debug)]
pub struct AtomTable {
    pub num_objects: usize,
    offsets: Vec<usize>,
    arities: Vec<usize>,
    is_static: Vec<bool>,
    pub num_dynamic: usize,
    pub num_static: usize,
}

impl AtomTable {
    pub fn new(d: &Domain, num_objects: usize) -> Self {
        let mut offsets = Vec::with_capacity(d.predicates.len());
        let (mut nd, mut ns) = (0, 0);
        for p in &d.predicates {
            let size = num_objects.pow(p.arity as u32);
            if p.is_static {
                offsets.push(ns);
                ns += size;
            } else {
                offsets.push(nd);
                nd += size;
            }
        }
        AtomTable {
            num_objects,
            offsets,
            arities: d.predicates.iter().map(|p| p.arity).collect(),
            is_static: d.predicates.iter().map(|p| p.is_static).collect(),
            num_dynamic: nd,
            num_static: ns,
        }
    }

    /// Index within the dynamic or static block, depending on the predicate.
    pub fn index(&self, pred: usize, objs: &[usize]) -> usize {
        let mut i = 0;
        for &o in objs {
            debug_assert!(o < self.num_objects);
            i = i * self.num_objects + o;
        }
        self.offsets[pred] + i
    }

    pub fn is_static(&self, pred: usize) -> bool {
        self.is_static[pred]
    }

    pub fn atom(&self, dynamic_block: bool, index: usize) -> Atom {
        let pred = (0..self.offsets.len())
            .filter(|&p| self.is_static[p] != dynamic_block && self.offsets[p] <= index)
            .max_by_key(|&p| self.offsets[p])
            .expect("atom index out of range");
        let mut rest = index - self.offsets[pred];
        let mut objs = vec![0; self.arities[pred]];
        for k in (0..objs.len()).rev() {
            objs[k] = rest % self.num_objects;
            rest /= self.num_objects;
        }
        Atom { pred, objs }
    }
}

/// Valuation of the dynamic ground atoms.
pub type State = FixedBitSet;

pub fn state_from_atoms(table: &AtomTable, atoms: &BTreeSet<Atom>) -> State {
    let mut s = FixedBitSet::with_capacity(table.num_dynamic);
    for a in atoms {
        s.insert(table.index(a.pred, &a.objs));
    }
    s
}

pub fn state_atoms(table: &AtomTable, s: &State) -> BTreeSet<Atom> {
    s.ones().map(|i| table.atom(true, i)).collect()
}

/// Model complexity, ordered lexicographically field by field.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CostVector {
    pub n_a: usize,
    pub n_p: usize,
    pub n_s: usize,
    pub n_g: usize,
}

impl CostVector {
    pub fn new(n_a: usize, n_p: usize, n_s: usize, n_g: usize) -> Self {
        CostVector { n_a, n_p, n_s, n_g }
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.n_a, self.n_p, self.n_s, self.n_g]
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n_a, self.n_p, self.n_s, self.n_g)
    }
}

pub fn lex_cmp(a: &CostVector, b: &CostVector) -> Ordering {
    a.cmp(b)
}

pub fn cost_of<'a>(d: &Domain, states: impl IntoIterator<Item = &'a State>) -> CostVector {
    CostVector {
        n_a: d.schemas.iter().map(|s| s.arity).sum(),
        n_p: d.predicates.iter().filter(|p| !p.is_static).map(|p| p.arity).sum(),
        n_s: d.predicates.iter().filter(|p| p.is_static).map(|p| p.arity).sum(),
        n_g: states.into_iter().map(|s| s.count_ones(..)).max().unwrap_or(0),
    }
}

/// Lists every structural or bound violation. An empty list means valid.
pub fn validate(d: &Domain, inst: Option<&Instance>, b: &Bounds) -> Vec<String> {
    let mut v = Vec::new();
    let np = d.predicates.len();
    if np > b.max_predicates {
        v.push(format!("{np} predicates exceed the bound {}", b.max_predicates));
    }
    let statics = d.predicates.iter().filter(|p| p.is_static).count();
    if statics > b.max_static_predicates {
        v.push(format!("{statics} static predicates exceed the bound {}", b.max_static_predicates));
    }
    let mut seen_static = false;
    let mut names = BTreeSet::new();
    for p in &d.predicates {
        if !(1..=b.max_pred_arity.min(2)).contains(&p.arity) {
            v.push(format!("predicate {} has arity {}", p.name, p.arity));
        }
        if p.is_static {
            seen_static = true;
        } else if seen_static {
            v.push(format!("dynamic predicate {} follows a static one", p.name));
        }
        if !names.insert(&p.name) {
            v.push(format!("duplicate predicate name {}", p.name));
        }
    }
    if d.schemas.is_empty() {
        v.push("no action schemas".into());
    }
    let mut labels = BTreeSet::new();
    for s in &d.schemas {
        if !labels.insert(&s.label) {
            v.push(format!("duplicate schema label {}", s.label));
        }
        if !(1..=b.max_action_arity.min(3)).contains(&s.arity) {
            v.push(format!("schema {} has arity {}", s.label, s.arity));
        }
        if s.params.len() != s.arity {
            v.push(format!("schema {} names {} parameters for arity {}", s.label, s.params.len(), s.arity));
        }
        if s.precs.len() > b.max_precs {
            v.push(format!("schema {} has {} preconditions", s.label, s.precs.len()));
        }
        if s.effs.is_empty() {
            v.push(format!("schema {} has no effects", s.label));
        }
        if s.effs.len() > b.max_effects {
            v.push(format!("schema {} has {} effects", s.label, s.effs.len()));
        }
        for (kind, lits) in [("precondition", &s.precs), ("effect", &s.effs)] {
            for l in lits.iter() {
                let Some(p) = d.predicates.get(l.pred) else {
                    v.push(format!("schema {} {kind} uses unknown predicate {}", s.label, l.pred));
                    continue;
                };
                if l.args.len() != p.arity {
                    v.push(format!("schema {} {kind} on {} has {} arguments", s.label, p.name, l.args.len()));
                }
                if l.args.iter().any(|&a| a == 0 || a > s.arity) {
                    v.push(format!("schema {}: arg index exceeds arity in {kind} on {}", s.label, p.name));
                }
                if kind == "effect" && p.is_static {
                    v.push(format!("schema {} has an effect on static predicate {}", s.label, p.name));
                }
            }
        }
        for w in s.effs.windows(2) {
            if w[0].pred == w[1].pred && w[0].args == w[1].args && w[0].value != w[1].value {
                v.push(format!("schema {}: contradictory effect pair", s.label));
            }
        }
    }
    if d.invariants.len() > b.num_invariants {
        v.push(format!("{} invariants exceed the bound {}", d.invariants.len(), b.num_invariants));
    }
    for inv in &d.invariants {
        if inv.members.is_empty() {
            v.push("empty invariant".into());
        }
        for &(p, pos) in &inv.members {
            match d.predicates.get(p) {
                None => v.push(format!("invariant uses unknown predicate {p}")),
                Some(sym) => {
                    if (pos == 1) != (sym.arity == 1) || !(1..=3).contains(&pos) {
                        v.push(format!("invariant position {pos} does not fit {}", sym.name));
                    }
                    if sym.arity == 2 && sym.is_static {
                        v.push(format!("invariant uses binary static {}", sym.name));
                    }
                }
            }
        }
    }
    if let Some(inst) = inst {
        if inst.num_objects == 0 {
            v.push("instance has no objects".into());
        }
        for (which, atoms, want_static) in [("static", &inst.static_true, true), ("init", &inst.init_true, false)] {
            for a in atoms.iter() {
                match d.predicates.get(a.pred) {
                    None => v.push(format!("{which} atom uses unknown predicate {}", a.pred)),
                    Some(p) => {
                        if p.is_static != want_static {
                            v.push(format!("{which} atom on {} has the wrong kind", p.name));
                        }
                        if a.objs.len() != p.arity || a.objs.iter().any(|&o| o >= inst.num_objects) {
                            v.push(format!("{which} atom on {} is out of range", p.name));
                        }
                    }
                }
            }
        }
    }
    v
}

/// Domain, instance and bounds as stored in a model file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelFile {
    pub bounds: Bounds,
    pub domain: Domain,
    pub instance: Instance,
}

#[derive(Serialize, Deserialize)]
struct JsonModel {
    bounds: Bounds,
    predicates: Vec<PredicateSym>,
    schemas: Vec<ActionSchema>,
    #[serde(default)]
    invariants: Vec<Invariant>,
    instance: FileInstance,
}

const JSON_MARKER: &str = "%% json";

impl ModelFile {
    pub fn to_json(&self) -> String {
        let j = JsonModel {
            bounds: self.bounds.clone(),
            predicates: self.domain.predicates.clone(),
            schemas: self.domain.schemas.clone(),
            invariants: self.domain.invariants.clone(),
            instance: self.instance.to_file(),
        };
        serde_json::to_string_pretty(&j).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let j: JsonModel = serde_json::from_str(text)?;
        let mut domain = Domain {
            predicates: j.predicates,
            schemas: j.schemas,
            invariants: j.invariants,
        };
        for s in &mut domain.schemas {
            s.canonicalize();
        }
        let instance = Instance::from_file(j.instance)?;
        let m = ModelFile {
            bounds: j.bounds,
            domain,
            instance,
        };
        m.check_references()?;
        Ok(m)
    }

    fn check_references(&self) -> Result<(), ModelError> {
        let np = self.domain.predicates.len();
        let bad = self
            .domain
            .schemas
            .iter()
            .flat_map(|s| s.precs.iter().chain(s.effs.iter()))
            .map(|l| l.pred)
            .chain(self.instance.static_true.iter().map(|a| a.pred))
            .chain(self.instance.init_true.iter().map(|a| a.pred))
            .find(|&p| p >= np);
        match bad {
            Some(p) => Err(ModelError::Invalid(format!("unknown predicate id {p}"))),
            None => Ok(()),
        }
    }

    /// Listing followed by the JSON section.
    pub fn render(&self) -> String {
        let mut out = render_listing(&self.domain);
        out.push('\n');
        out.push_str(JSON_MARKER);
        out.push('\n');
        out.push_str(&self.to_json());
        out.push('\n');
        out
    }

    /// Accepts a combined file, a bare JSON document, or a bare listing (which
    /// yields an instance with no objects).
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        if let Some(pos) = find_marker(text) {
            let listing = &text[..pos];
            let json_start = pos + JSON_MARKER.len();
            let m = ModelFile::from_json(&text[json_start..])?;
            let listed = parse_listing(listing)?;
            if listed != m.domain {
                return Err(ModelError::Invalid("listing and JSON sections disagree".into()));
            }
            return Ok(m);
        }
        if text.trim_start().starts_with('{') {
            return ModelFile::from_json(text);
        }
        Ok(ModelFile {
            bounds: Bounds::default(),
            domain: parse_listing(text)?,
            instance: Instance::default(),
        })
    }
}

fn find_marker(text: &str) -> Option<usize> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim_end() == JSON_MARKER {
            return Some(offset);
        }
        offset += line.len();
    }
    None
}

fn render_literal(d: &Domain, s: &ActionSchema, l: &SchemaLiteral) -> String {
    let args: Vec<&str> = l.args.iter().map(|&a| s.params[a - 1].as_str()).collect();
    format!(
        "{}{}({})",
        if l.value { "" } else { "-" },
        d.predicates[l.pred].name,
        args.join(",")
    )
}

fn render_invariant(d: &Domain, inv: &Invariant) -> String {
    let parts: Vec<String> = inv
        .members
        .iter()
        .map(|&(p, pos)| {
            let name = &d.predicates[p].name;
            match pos {
                1 => format!("{name}(o)"),
                2 => format!("{name}(o,_)"),
                _ => format!("{name}(_,o)"),
            }
        })
        .collect();
    parts.join(", ")
}

/// Human-readable listing of a domain.
pub fn render_listing(d: &Domain) -> String {
    let mut out = String::new();
    let decl = |stat: bool| -> String {
        d.predicates
            .iter()
            .filter(|p| p.is_static == stat)
            .map(|p| format!("{}/{}", p.name, p.arity))
            .collect::<Vec<_>>()
            .join(", ")
    };
    out.push_str(&format!("Predicates: {}\n", decl(false)));
    out.push_str(&format!("Static predicates: {}\n", decl(true)));
    for s in &d.schemas {
        out.push('\n');
        out.push_str(&format!("{}({})\n", s.label, s.params.join(",")));
        let mut shown: Vec<&SchemaLiteral> = s.precs.iter().collect();
        shown.sort_by_key(|l| (l.value, l.pred, l.args.clone()));
        let (stat, dynamic): (Vec<_>, Vec<_>) =
            shown.into_iter().partition(|l| d.predicates[l.pred].is_static);
        let join = |ls: &[&SchemaLiteral]| {
            ls.iter()
                .map(|l| render_literal(d, s, l))
                .collect::<Vec<_>>()
                .join(", ")
        };
        if !stat.is_empty() {
            out.push_str(&format!("  Static: {}\n", join(&stat)));
        }
        out.push_str(&format!("  Pre: {}\n", join(&dynamic)));
        let mut effs: Vec<&SchemaLiteral> = s.effs.iter().collect();
        effs.sort_by_key(|l| (l.value, l.pred, l.args.clone()));
        out.push_str(&format!("  Eff: {}\n", join(&effs)));
    }
    if !d.invariants.is_empty() {
        out.push('\n');
        for inv in &d.invariants {
            out.push_str(&format!("Invariant: {}\n", render_invariant(d, inv)));
        }
    }
    out
}

struct LineCursor<'a> {
    line: usize,
    text: &'a str,
    base_col: usize,
}

impl LineCursor<'_> {
    fn err(&self, at: &str, message: impl Into<String>) -> ModelError {
        let col = self.base_col + (at.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize) + 1;
        ModelError::Parse {
            line: self.line,
            col,
            message: message.into(),
        }
    }
}

/// Splits `name(a,b)` into the name and its argument strings.
fn split_call<'a>(cur: &LineCursor<'a>, s: &'a str) -> Result<(&'a str, Vec<&'a str>), ModelError> {
    let open = s.find('(').ok_or_else(|| cur.err(s, format!("expected '(' in '{s}'")))?;
    let close = s.rfind(')').ok_or_else(|| cur.err(s, format!("expected ')' in '{s}'")))?;
    if close < open || !s[close + 1..].trim().is_empty() {
        return Err(cur.err(s, format!("malformed term '{s}'")));
    }
    let name = s[..open].trim();
    if name.is_empty() {
        return Err(cur.err(s, "missing name"));
    }
    let inner = &s[open + 1..close];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|a| a.trim()).collect()
    };
    Ok((name, args))
}

/// Splits a comma-separated list of terms, respecting parentheses.
fn split_terms(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() {
        out.push(last);
    }
    out.into_iter().filter(|t| !t.is_empty()).collect()
}

fn parse_decls(cur: &LineCursor, s: &str, is_static: bool, out: &mut Vec<PredicateSym>) -> Result<(), ModelError> {
    for t in split_terms(s) {
        let (name, arity) = t
            .split_once('/')
            .ok_or_else(|| cur.err(t, format!("expected name/arity, found '{t}'")))?;
        let arity: usize = arity
            .trim()
            .parse()
            .map_err(|_| cur.err(t, format!("bad arity in '{t}'")))?;
        out.push(PredicateSym {
            name: name.trim().to_string(),
            arity,
            is_static,
        });
    }
    Ok(())
}

/// Parses the listing format produced by [`render_listing`].
pub fn parse_listing(text: &str) -> Result<Domain, ModelError> {
    let mut d = Domain::default();
    let mut current: Option<ActionSchema> = None;
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    let mut decls_done = false;
    let mut pending_invariants: Vec<(usize, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = raw.trim();
        let cur = LineCursor {
            line: line_no,
            text: raw,
            base_col: 0,
        };
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = match trimmed.split_once(':') {
            Some((k, r)) if !k.contains('(') => (k.trim(), r),
            _ => ("", trimmed),
        };
        match key {
            "Predicates" | "Static predicates" => {
                if decls_done {
                    return Err(cur.err(trimmed, "predicate declarations must precede schemas"));
                }
                let mut preds = Vec::new();
                parse_decls(&cur, rest, key != "Predicates", &mut preds)?;
                d.predicates.extend(preds);
            }
            "Static" | "Pre" | "Eff" => {
                let schema = current
                    .as_mut()
                    .ok_or_else(|| cur.err(trimmed, format!("'{key}:' outside a schema")))?;
                for t in split_terms(rest) {
                    let (neg, body) = match t.strip_prefix('-') {
                        Some(b) => (true, b.trim()),
                        None => (false, t),
                    };
                    let (name, args) = split_call(&cur, body)?;
                    let pred = *names
                        .get(name)
                        .ok_or_else(|| cur.err(body, format!("unknown predicate '{name}'")))?;
                    let mut idx = Vec::with_capacity(args.len());
                    for a in args {
                        let k = schema
                            .params
                            .iter()
                            .position(|p| p == a)
                            .ok_or_else(|| cur.err(body, format!("unknown parameter '{a}' in {name}")))?;
                        idx.push(k + 1);
                    }
                    if idx.len() != d.predicates[pred].arity {
                        return Err(cur.err(body, format!("{name} expects {} arguments", d.predicates[pred].arity)));
                    }
                    let is_static = d.predicates[pred].is_static;
                    if key == "Static" && !is_static {
                        return Err(cur.err(body, format!("'{name}' is not static")));
                    }
                    if key == "Pre" && is_static {
                        return Err(cur.err(body, format!("'{name}' is static; list it under Static")));
                    }
                    let lit = SchemaLiteral {
                        pred,
                        args: idx,
                        value: !neg,
                    };
                    if key == "Eff" {
                        schema.effs.push(lit);
                    } else {
                        schema.precs.push(lit);
                    }
                }
            }
            "Invariant" => pending_invariants.push((line_no, rest.trim().to_string())),
            _ => {
                if !decls_done {
                    names = d
                        .predicates
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (p.name.clone(), i))
                        .collect();
                    if names.len() != d.predicates.len() {
                        return Err(cur.err(trimmed, "duplicate predicate names"));
                    }
                    decls_done = true;
                }
                let head = trimmed.trim_end_matches(':');
                let (label, params) = split_call(&cur, head)?;
                if let Some(s) = current.take() {
                    d.schemas.push(s);
                }
                let params: Vec<&str> = params;
                current = Some(ActionSchema {
                    label: label.to_string(),
                    arity: params.len(),
                    params: params.iter().map(|p| p.to_string()).collect(),
                    precs: Vec::new(),
                    effs: Vec::new(),
                });
            }
        }
    }
    if let Some(s) = current.take() {
        d.schemas.push(s);
    }
    for s in &mut d.schemas {
        s.canonicalize();
    }
    if !decls_done {
        names = d
            .predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), i))
            .collect();
    }
    for (line_no, body) in pending_invariants {
        let cur = LineCursor {
            line: line_no,
            text: &body,
            base_col: 0,
        };
        let mut members = Vec::new();
        for t in split_terms(&body) {
            let (name, args) = split_call(&cur, t)?;
            let pred = *names
                .get(name)
                .ok_or_else(|| cur.err(t, format!("unknown predicate '{name}'")))?;
            let pos = match args.as_slice() {
                ["o"] => 1,
                ["o", "_"] => 2,
                ["_", "o"] => 3,
                _ => return Err(cur.err(t, format!("invariant member '{t}' must be p(o), p(o,_) or p(_,o)"))),
            };
            members.push((pred, pos));
        }
        d.invariants.push(Invariant { members });
    }
    Ok(d)
}
