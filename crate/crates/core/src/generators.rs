//! Benchmark graph families and the hand-written models that generate them.

use std::collections::BTreeSet;
use std::fmt;

use crate::graphio::LabeledGraph;
use crate::model::{parse_listing, Atom, Domain, Instance};
use crate::semantics::{expand, Caps, SemanticsError};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum DomainSpec {
    /// Blocks with a gripper arm.
    Blocks1 { blocks: usize },
    /// Blocks moved directly between towers.
    Blocks2 { blocks: usize },
    Hanoi { disks: usize, pegs: usize },
    /// Two rooms, two grippers.
    Gripper { balls: usize },
    /// Grid walk with one label per direction.
    GridV0 { rows: usize, cols: usize },
    /// Grid walk with a single label.
    GridV1 { rows: usize, cols: usize },
}

impl DomainSpec {
    /// Builds a spec from a family name and its integer parameters
    /// (`hanoi` takes disks then pegs, grids take rows then columns).
    pub fn from_family(family: &str, params: &[usize]) -> Result<Self, String> {
        let need = |n: usize| -> Result<(), String> {
            if params.len() != n {
                return Err(format!("family {family} takes {n} parameter(s), got {}", params.len()));
            }
            if params.contains(&0) {
                return Err("parameters must be positive".into());
            }
            Ok(())
        };
        let spec = match family {
            "blocks1" => {
                need(1)?;
                DomainSpec::Blocks1 { blocks: params[0] }
            }
            "blocks2" => {
                need(1)?;
                DomainSpec::Blocks2 { blocks: params[0] }
            }
            "hanoi" => {
                need(2)?;
                if params[1] < 3 {
                    return Err("hanoi needs at least 3 pegs".into());
                }
                DomainSpec::Hanoi {
                    disks: params[0],
                    pegs: params[1],
                }
            }
            "gripper" => {
                need(1)?;
                DomainSpec::Gripper { balls: params[0] }
            }
            "grid_v0" | "grid-v0" => {
                need(2)?;
                DomainSpec::GridV0 {
                    rows: params[0],
                    cols: params[1],
                }
            }
            "grid_v1" | "grid-v1" => {
                need(2)?;
                DomainSpec::GridV1 {
                    rows: params[0],
                    cols: params[1],
                }
            }
            _ => return Err(format!("unknown family {family}")),
        };
        Ok(spec)
    }

    /// Parses benchmark names such as `blocks1-4`, `grid-v0-3x4` or
    /// `hanoi-3x4`. Hanoi names read `pegs x disks`.
    pub fn from_name(name: &str) -> Result<Self, String> {
        let dims = |s: &str| -> Result<(usize, usize), String> {
            let (a, b) = s.split_once('x').ok_or_else(|| format!("expected AxB in {name}"))?;
            Ok((
                a.parse().map_err(|_| format!("bad number in {name}"))?,
                b.parse().map_err(|_| format!("bad number in {name}"))?,
            ))
        };
        let num = |s: &str| -> Result<usize, String> { s.parse().map_err(|_| format!("bad number in {name}")) };
        if let Some(r) = name.strip_prefix("blocks1-") {
            return DomainSpec::from_family("blocks1", &[num(r)?]);
        }
        if let Some(r) = name.strip_prefix("blocks2-") {
            return DomainSpec::from_family("blocks2", &[num(r)?]);
        }
        if let Some(r) = name.strip_prefix("gripper-") {
            return DomainSpec::from_family("gripper", &[num(r)?]);
        }
        if let Some(r) = name.strip_prefix("hanoi-") {
            let (pegs, disks) = dims(r)?;
            return DomainSpec::from_family("hanoi", &[disks, pegs]);
        }
        if let Some(r) = name.strip_prefix("grid-v0-") {
            let (a, b) = dims(r)?;
            return DomainSpec::from_family("grid_v0", &[a, b]);
        }
        if let Some(r) = name.strip_prefix("grid-v1-") {
            let (a, b) = dims(r)?;
            return DomainSpec::from_family("grid_v1", &[a, b]);
        }
        Err(format!("unknown benchmark {name}"))
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainSpec::Blocks1 { blocks } => write!(f, "blocks1-{blocks}"),
            DomainSpec::Blocks2 { blocks } => write!(f, "blocks2-{blocks}"),
            DomainSpec::Hanoi { disks, pegs } => write!(f, "hanoi-{pegs}x{disks}"),
            DomainSpec::Gripper { balls } => write!(f, "gripper-{balls}"),
            DomainSpec::GridV0 { rows, cols } => write!(f, "grid-v0-{rows}x{cols}"),
            DomainSpec::GridV1 { rows, cols } => write!(f, "grid-v1-{rows}x{cols}"),
        }
    }
}

pub fn generate(spec: &DomainSpec) -> Result<LabeledGraph, SemanticsError> {
    match *spec {
        DomainSpec::GridV0 { rows, cols } => Ok(grid(rows, cols, false)),
        DomainSpec::GridV1 { rows, cols } => Ok(grid(rows, cols, true)),
        _ => {
            let (d, inst) = reference_model(spec).expect("family has a reference model");
            Ok(expand(&d, &inst, Caps::default())?.graph)
        }
    }
}

/// Cells `r * cols + c`; node 0 is the top-left corner.
fn grid(rows: usize, cols: usize, single_label: bool) -> LabeledGraph {
    let labels: Vec<String> = if single_label {
        vec!["MOVE".into()]
    } else {
        ["UP", "DOWN", "LEFT", "RIGHT"].iter().map(|s| s.to_string()).collect()
    };
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let n = r * cols + c;
            let moves = [
                (r > 0, n.wrapping_sub(cols), 0),
                (r + 1 < rows, n + cols, 1),
                (c > 0, n.wrapping_sub(1), 2),
                (c + 1 < cols, n + 1, 3),
            ];
            for (ok, m, l) in moves {
                if ok {
                    edges.push((n, m, if single_label { 0 } else { l }));
                }
            }
        }
    }
    LabeledGraph::new(rows * cols, labels, edges)
}

const BLOCKS1: &str = "
Predicates: on/2, ontable/1, clear/1, holding/1, handempty/1
Static predicates: ARM/1

PICK-UP(x,a)
  Pre: clear(x), ontable(x), handempty(a)
  Eff: holding(x), -clear(x), -ontable(x), -handempty(a)

PUT-DOWN(x,a)
  Static: ARM(a)
  Pre: holding(x)
  Eff: ontable(x), clear(x), handempty(a), -holding(x)

STACK(x,y,a)
  Static: ARM(a)
  Pre: holding(x), clear(y)
  Eff: on(x,y), clear(x), handempty(a), -holding(x), -clear(y)

UNSTACK(x,y,a)
  Static: ARM(a)
  Pre: on(x,y), clear(x), handempty(a)
  Eff: holding(x), clear(y), -on(x,y), -clear(x), -handempty(a)
";

/// Learned Blocks-2 schemas. `clear(x)` reads as "something is on x" and
/// `p(x,y)` as "y is on x", or "x is on the table" when x = y.
pub const BLOCKS2_LISTING: &str = "
Predicates: clear/1, p/2
Static predicates: NEQ/2

NEWTOWER(x1,x2)
  Static: NEQ(x1,x2)
  Pre: -clear(x1), -p(x1,x1), clear(x2), p(x2,x1)
  Eff: -clear(x2), -p(x2,x1), p(x1,x1)

STACK(x1,x2)
  Static: NEQ(x1,x2)
  Pre: -clear(x1), -clear(x2), -p(x2,x1), p(x1,x1)
  Eff: -p(x1,x1), clear(x2), p(x2,x1)

MOVE(x1,x2,x3)
  Static: NEQ(x1,x2), NEQ(x1,x3), NEQ(x2,x3)
  Pre: -clear(x1), -clear(x3), -p(x3,x1), clear(x2), p(x2,x1)
  Eff: -clear(x2), -p(x2,x1), clear(x3), p(x3,x1)

Invariant: p(_,o)
";

/// Learned Hanoi schema. `p(x,y)` reads as "y is on x", or "x is clear" when
/// x = y.
pub const HANOI_LISTING: &str = "
Predicates: p/2
Static predicates: NEQ/2, BIGGER/2

MOVE(d,to,from)
  Static: NEQ(d,to), NEQ(d,from), NEQ(to,from), -BIGGER(d,to)
  Pre: -p(to,d), -p(from,from), p(d,d), p(to,to), p(from,d)
  Eff: -p(to,to), -p(from,d), p(to,d), p(from,from)

Invariant: p(o,_)
";

/// Learned Gripper schemas. `Nat(x)` reads as "the robot is not at x" and
/// `at-hold(x,b)` as "ball b is in room x or held by gripper x".
pub const GRIPPER_LISTING: &str = "
Predicates: Nat/1, Nfree/1, at-hold/2
Static predicates: NEQ/2, B1/2, B2/2

MOVE(x,to,from)
  Static: NEQ(x,from), NEQ(to,from), -B1(x,to), -B2(x,x), B1(from,x)
  Pre: -Nat(from), Nat(x), Nat(to)
  Eff: -Nat(to), Nat(from)

DROP(g,b,r)
  Static: NEQ(g,r), -B2(r,b), B1(g,g)
  Pre: -Nat(r), -at-hold(r,b), Nfree(g), at-hold(g,b)
  Eff: -Nfree(g), -at-hold(g,b), at-hold(r,b)

PICK(g,r,b)
  Static: NEQ(g,r), -B2(r,b), B1(g,g)
  Pre: -Nat(r), -Nfree(g), -at-hold(g,b), at-hold(r,b)
  Eff: -at-hold(r,b), Nfree(g), at-hold(g,b)
";

/// Hand-written Hanoi with a smaller-than relation.
pub const HANOI_INTENDED: &str = "
Predicates: clear/1, on/2
Static predicates: SMALLER/2

MOVE(d,from,to)
  Static: SMALLER(d,to)
  Pre: clear(d), clear(to), on(d,from)
  Eff: on(d,to), clear(from), -on(d,from), -clear(to)

Invariant: clear(o), on(_,o)
";

/// Hand-written Gripper; `carry(g,g)` reads as "gripper g is free".
pub const GRIPPER_INTENDED: &str = "
Predicates: at-robby/1, at/2, carry/2
Static predicates: ROOMS/2, BG/2

MOVE(from,to)
  Static: ROOMS(from,to)
  Pre: at-robby(from)
  Eff: -at-robby(from), at-robby(to)

PICK(b,r,g)
  Static: BG(b,g)
  Pre: at(b,r), at-robby(r), carry(g,g)
  Eff: carry(b,g), -at(b,r), -carry(g,g)

DROP(b,r,g)
  Static: BG(b,g)
  Pre: carry(b,g), at-robby(r)
  Eff: at(b,r), -carry(b,g), carry(g,g)
";

pub fn listing_domain(text: &str) -> Domain {
    parse_listing(text).expect("built-in listing parses")
}

fn atoms(d: &Domain, list: &[(&str, Vec<usize>)]) -> BTreeSet<Atom> {
    list.iter()
        .map(|(name, objs)| Atom::new(d.pred_by_name(name).expect("known predicate"), objs))
        .collect()
}

fn neq(n: usize) -> Vec<(&'static str, Vec<usize>)> {
    let mut v = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                v.push(("NEQ", vec![a, b]));
            }
        }
    }
    v
}

/// The hand-written model behind a generated family, with its initial state.
/// Grid families are generated procedurally and have none.
pub fn reference_model(spec: &DomainSpec) -> Option<(Domain, Instance)> {
    match *spec {
        DomainSpec::Blocks1 { blocks } => {
            let d = listing_domain(BLOCKS1);
            let arm = blocks;
            let mut init = vec![("handempty", vec![arm])];
            for b in 0..blocks {
                init.push(("ontable", vec![b]));
                init.push(("clear", vec![b]));
            }
            let inst = Instance {
                num_objects: blocks + 1,
                static_true: atoms(&d, &[("ARM", vec![arm])]),
                init_true: atoms(&d, &init),
                goal: Vec::new(),
            };
            Some((d, inst))
        }
        DomainSpec::Blocks2 { blocks } => {
            let d = listing_domain(BLOCKS2_LISTING);
            let init: Vec<_> = (0..blocks).map(|b| ("p", vec![b, b])).collect();
            let inst = Instance {
                num_objects: blocks,
                static_true: atoms(&d, &neq(blocks)),
                init_true: atoms(&d, &init),
                goal: Vec::new(),
            };
            Some((d, inst))
        }
        DomainSpec::Hanoi { disks, pegs } => {
            // Disks 0..disks with 0 the smallest, then pegs; all disks start on the first peg.
            let d = listing_domain(HANOI_LISTING);
            let n = disks + pegs;
            let mut statics = neq(n);
            for x in 0..disks {
                for y in 0..x {
                    statics.push(("BIGGER", vec![x, y]));
                }
            }
            let mut init = vec![("p", vec![disks, disks - 1])];
            for x in 0..disks - 1 {
                init.push(("p", vec![x + 1, x]));
            }
            init.push(("p", vec![0, 0]));
            for peg in disks + 1..n {
                init.push(("p", vec![peg, peg]));
            }
            let inst = Instance {
                num_objects: n,
                static_true: atoms(&d, &statics),
                init_true: atoms(&d, &init),
                goal: Vec::new(),
            };
            Some((d, inst))
        }
        DomainSpec::Gripper { balls } => Some(intended_gripper(balls)),
        DomainSpec::GridV0 { .. } | DomainSpec::GridV1 { .. } => None,
    }
}

/// Rooms 0 and 1, then the balls, then two grippers. Everything starts in room 0.
pub fn intended_gripper(balls: usize) -> (Domain, Instance) {
    let d = listing_domain(GRIPPER_INTENDED);
    let grippers = [2 + balls, 3 + balls];
    let mut statics = vec![("ROOMS", vec![0, 1]), ("ROOMS", vec![1, 0])];
    let mut init = vec![("at-robby", vec![0])];
    for b in 2..2 + balls {
        init.push(("at", vec![b, 0]));
        for g in grippers {
            statics.push(("BG", vec![b, g]));
        }
    }
    for g in grippers {
        init.push(("carry", vec![g, g]));
    }
    let inst = Instance {
        num_objects: balls + 4,
        static_true: atoms(&d, &statics),
        init_true: atoms(&d, &init),
        goal: Vec::new(),
    };
    (d, inst)
}

/// Intended Hanoi over `disks` disks and `pegs` pegs (disks first, 0 smallest).
pub fn intended_hanoi(disks: usize, pegs: usize) -> (Domain, Instance) {
    let d = listing_domain(HANOI_INTENDED);
    let n = disks + pegs;
    let mut statics = Vec::new();
    for x in 0..disks {
        for y in 0..n {
            if y >= disks || y > x {
                statics.push(("SMALLER", vec![x, y]));
            }
        }
    }
    let mut init = vec![("on", vec![disks - 1, disks]), ("clear", vec![0])];
    for x in 0..disks - 1 {
        init.push(("on", vec![x, x + 1]));
    }
    for peg in disks + 1..n {
        init.push(("clear", vec![peg]));
    }
    let inst = Instance {
        num_objects: n,
        static_true: atoms(&d, &statics),
        init_true: atoms(&d, &init),
        goal: Vec::new(),
    };
    (d, inst)
}
