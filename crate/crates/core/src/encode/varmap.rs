//! Variable layout shared by the builder, the decoder and the sidecar file.

use std::fmt::Write as _;

use graphlift_sat::Lit;

use super::{BLit, EncodeError};
use crate::model::{Domain, ModelFile};

/// Argument tuples `(t1, t2)` over action parameter positions, 1-based.
/// A unary atom uses the diagonal `(t, t)`.
pub const T_TUPLES: [(usize, usize); 9] =
    [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)];
pub const NUM_T: usize = 9;

pub fn t_index(t1: usize, t2: usize) -> usize {
    (t1 - 1) * 3 + (t2 - 1)
}

/// Every atom family of the encoding, indexed densely. Ground atoms are padded:
/// the atom index `g = o1 * N + o2`, unary atoms sit on the diagonal.
#[derive(Clone, Debug, Default)]
pub struct VarMap {
    pub num_vars: usize,
    pub labels: Vec<String>,
    pub num_objects: usize,
    /// Node count per graph; states are numbered graph after graph.
    pub graph_nodes: Vec<usize>,
    pub is_static: Vec<bool>,
    pub num_invariants: usize,
    pub ar: Vec<[BLit; 3]>,
    pub bin: Vec<BLit>,
    pub used: Vec<BLit>,
    pub prec: Vec<BLit>,
    pub eff: Vec<BLit>,
    pub sval: Vec<BLit>,
    pub val: Vec<BLit>,
    pub sel: Vec<BLit>,
    /// `(schema, tuple, state, lit)`, tuple index `(o1 * N + o2) * N + o3`.
    pub appl: Vec<(usize, usize, usize, BLit)>,
    /// `(graph, edge, tuple, lit)`.
    pub next: Vec<(usize, usize, usize, BLit)>,
    /// Set when the domain is fixed, as in verification.
    pub fixed_domain: Option<Domain>,
}

impl VarMap {
    pub fn num_preds(&self) -> usize {
        self.is_static.len()
    }

    pub fn num_atoms(&self) -> usize {
        self.num_objects * self.num_objects
    }

    pub fn num_states(&self) -> usize {
        self.graph_nodes.iter().sum()
    }

    pub fn state_of(&self, graph: usize, node: usize) -> usize {
        self.graph_nodes[..graph].iter().sum::<usize>() + node
    }

    pub fn graph_of_state(&self, state: usize) -> usize {
        let mut s = state;
        for (i, &n) in self.graph_nodes.iter().enumerate() {
            if s < n {
                return i;
            }
            s -= n;
        }
        panic!("state {state} out of range")
    }

    pub(crate) fn pt_index(&self, a: usize, p: usize, t: usize, pol: bool) -> usize {
        ((a * self.num_preds() + p) * NUM_T + t) * 2 + pol as usize
    }

    pub fn prec(&self, a: usize, p: usize, t: usize, pol: bool) -> BLit {
        self.prec[self.pt_index(a, p, t, pol)]
    }

    pub fn eff(&self, a: usize, p: usize, t: usize, pol: bool) -> BLit {
        self.eff[self.pt_index(a, p, t, pol)]
    }

    pub fn sval(&self, graph: usize, p: usize, g: usize) -> BLit {
        self.sval[(graph * self.num_preds() + p) * self.num_atoms() + g]
    }

    pub fn val(&self, state: usize, p: usize, g: usize) -> BLit {
        self.val[(state * self.num_preds() + p) * self.num_atoms() + g]
    }

    /// Value of atom `(p, g)` in `state`, static or not.
    pub fn value(&self, state: usize, p: usize, g: usize) -> BLit {
        if self.is_static[p] {
            self.sval(self.graph_of_state(state), p, g)
        } else {
            self.val(state, p, g)
        }
    }

    pub fn sel(&self, k: usize, p: usize, pos: u8) -> BLit {
        self.sel[(k * self.num_preds() + p) * 3 + pos as usize - 1]
    }

    /// Sidecar text: a header, then one family line per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graphlift-varmap 1");
        let _ = writeln!(s, "vars {}", self.num_vars);
        let _ = writeln!(s, "objects {}", self.num_objects);
        let _ = writeln!(s, "labels {}", self.labels.join(" "));
        let graphs: Vec<String> = self.graph_nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "graphs {}", graphs.join(" "));
        let statics: Vec<&str> = self.is_static.iter().map(|&b| if b { "s" } else { "d" }).collect();
        let _ = writeln!(s, "preds {}", statics.join(" "));
        let _ = writeln!(s, "invariants {}", self.num_invariants);
        if let Some(d) = &self.fixed_domain {
            let f = ModelFile {
                bounds: Default::default(),
                domain: d.clone(),
                instance: Default::default(),
            };
            let _ = writeln!(s, "fixed {}", f.to_json().replace('\n', " "));
        }
        for (a, ar) in self.ar.iter().enumerate() {
            for (k, &b) in ar.iter().enumerate() {
                let _ = writeln!(s, "ar {} {a} {}", fmt(b), k + 1);
            }
        }
        for (p, &b) in self.bin.iter().enumerate() {
            let _ = writeln!(s, "bin {} {p}", fmt(b));
        }
        for (p, &b) in self.used.iter().enumerate() {
            let _ = writeln!(s, "used {} {p}", fmt(b));
        }
        let np = self.num_preds();
        for a in 0..self.ar.len() {
            for p in 0..np {
                for (t, &(t1, t2)) in T_TUPLES.iter().enumerate() {
                    for pol in [false, true] {
                        let (pr, ef) = (self.prec(a, p, t, pol), self.eff(a, p, t, pol));
                        if pr != BLit::FALSE {
                            let _ = writeln!(s, "prec {} {a} {p} {t1} {t2} {}", fmt(pr), pol as u8);
                        }
                        if ef != BLit::FALSE {
                            let _ = writeln!(s, "eff {} {a} {p} {t1} {t2} {}", fmt(ef), pol as u8);
                        }
                    }
                }
            }
        }
        let n = self.num_objects;
        for graph in 0..self.graph_nodes.len() {
            for p in 0..np {
                for g in 0..self.num_atoms() {
                    let b = self.sval(graph, p, g);
                    if b != BLit::FALSE {
                        let _ = writeln!(s, "sval {} {graph} {p} {} {}", fmt(b), g / n + 1, g % n + 1);
                    }
                }
            }
        }
        for state in 0..self.num_states() {
            for p in 0..np {
                for g in 0..self.num_atoms() {
                    let b = self.val(state, p, g);
                    if b != BLit::FALSE {
                        let _ = writeln!(s, "val {} {state} {p} {} {}", fmt(b), g / n + 1, g % n + 1);
                    }
                }
            }
        }
        for k in 0..self.num_invariants {
            for p in 0..np {
                for pos in 1..=3u8 {
                    let b = self.sel(k, p, pos);
                    if b != BLit::FALSE {
                        let _ = writeln!(s, "schema {} {k} {p} {pos}", fmt(b));
                    }
                }
            }
        }
        for &(a, oo, state, b) in &self.appl {
            let _ = writeln!(s, "appl {} {a} {oo} {state}", fmt(b));
        }
        for &(graph, e, oo, b) in &self.next {
            let _ = writeln!(s, "next {} {graph} {e} {oo}", fmt(b));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<VarMap, EncodeError> {
        let mut vm = VarMap::default();
        let mut lines = text.lines().enumerate();
        let bad = |i: usize, m: &str| EncodeError::VarMapFormat(format!("line {}: {m}", i + 1));
        match lines.next() {
            Some((_, "graphlift-varmap 1")) => {}
            _ => return Err(bad(0, "missing header")),
        }
        let mut sized = false;
        for (i, line) in lines {
            let mut it = line.split_whitespace();
            let Some(tag) = it.next() else { continue };
            let rest: Vec<&str> = it.collect();
            let num = |k: usize| -> Result<usize, EncodeError> {
                rest.get(k)
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| bad(i, &format!("bad field {}", k + 1)))
            };
            match tag {
                "vars" => vm.num_vars = num(0)?,
                "objects" => vm.num_objects = num(0)?,
                "labels" => vm.labels = rest.iter().map(|s| s.to_string()).collect(),
                "graphs" => {
                    vm.graph_nodes = (0..rest.len()).map(num).collect::<Result<_, _>>()?;
                }
                "preds" => vm.is_static = rest.iter().map(|&s| s == "s").collect(),
                "invariants" => vm.num_invariants = num(0)?,
                "fixed" => {
                    let json = line["fixed".len()..].trim();
                    let f = ModelFile::from_json(json).map_err(|e| bad(i, &e.to_string()))?;
                    vm.fixed_domain = Some(f.domain);
                }
                _ => {
                    if !sized {
                        vm.allocate();
                        sized = true;
                    }
                    let lit = parse_blit(rest.first().copied()).ok_or_else(|| bad(i, "bad literal"))?;
                    let np = vm.num_preds();
                    let n = vm.num_objects;
                    let atom = |a: usize, b: usize| -> Result<usize, EncodeError> {
                        let (x, y) = (num(a)?, num(b)?);
                        if x == 0 || y == 0 || x > n || y > n {
                            return Err(bad(i, "object out of range"));
                        }
                        Ok((x - 1) * n + y - 1)
                    };
                    match tag {
                        "ar" => {
                            let (a, k) = (num(1)?, num(2)?);
                            if a >= vm.ar.len() || !(1..=3).contains(&k) {
                                return Err(bad(i, "index out of range"));
                            }
                            vm.ar[a][k - 1] = lit;
                        }
                        "bin" | "used" => {
                            let p = num(1)?;
                            if p >= np {
                                return Err(bad(i, "index out of range"));
                            }
                            if tag == "bin" {
                                vm.bin[p] = lit;
                            } else {
                                vm.used[p] = lit;
                            }
                        }
                        "prec" | "eff" => {
                            let (a, p, t1, t2, pol) = (num(1)?, num(2)?, num(3)?, num(4)?, num(5)?);
                            if a >= vm.ar.len() || p >= np || !(1..=3).contains(&t1) || !(1..=3).contains(&t2) {
                                return Err(bad(i, "index out of range"));
                            }
                            let idx = vm.pt_index(a, p, t_index(t1, t2), pol == 1);
                            if tag == "prec" {
                                vm.prec[idx] = lit;
                            } else {
                                vm.eff[idx] = lit;
                            }
                        }
                        "sval" => {
                            let (graph, p, g) = (num(1)?, num(2)?, atom(3, 4)?);
                            if graph >= vm.graph_nodes.len() || p >= np {
                                return Err(bad(i, "index out of range"));
                            }
                            let idx = (graph * np + p) * vm.num_atoms() + g;
                            vm.sval[idx] = lit;
                        }
                        "val" => {
                            let (state, p, g) = (num(1)?, num(2)?, atom(3, 4)?);
                            if state >= vm.num_states() || p >= np {
                                return Err(bad(i, "index out of range"));
                            }
                            let idx = (state * np + p) * vm.num_atoms() + g;
                            vm.val[idx] = lit;
                        }
                        "schema" => {
                            let (k, p, pos) = (num(1)?, num(2)?, num(3)?);
                            if k >= vm.num_invariants || p >= np || !(1..=3).contains(&pos) {
                                return Err(bad(i, "index out of range"));
                            }
                            vm.sel[(k * np + p) * 3 + pos - 1] = lit;
                        }
                        "appl" => vm.appl.push((num(1)?, num(2)?, num(3)?, lit)),
                        "next" => vm.next.push((num(1)?, num(2)?, num(3)?, lit)),
                        _ => return Err(bad(i, &format!("unknown family {tag}"))),
                    }
                }
            }
        }
        if !sized {
            vm.allocate();
        }
        Ok(vm)
    }

    /// Sizes every family from the header, all constants false.
    pub(crate) fn allocate(&mut self) {
        let (l, p, na) = (self.labels.len(), self.num_preds(), self.num_atoms());
        self.ar = vec![[BLit::FALSE; 3]; l];
        self.bin = vec![BLit::FALSE; p];
        self.used = vec![BLit::FALSE; p];
        self.prec = vec![BLit::FALSE; l * p * NUM_T * 2];
        self.eff = vec![BLit::FALSE; l * p * NUM_T * 2];
        self.sval = vec![BLit::FALSE; self.graph_nodes.len() * p * na];
        self.val = vec![BLit::FALSE; self.num_states() * p * na];
        self.sel = vec![BLit::FALSE; self.num_invariants * p * 3];
    }
}

fn fmt(b: BLit) -> String {
    match b {
        BLit::Const(true) => "T".into(),
        BLit::Const(false) => "F".into(),
        BLit::Lit(l) => l.to_dimacs().to_string(),
    }
}

fn parse_blit(s: Option<&str>) -> Option<BLit> {
    match s? {
        "T" => Some(BLit::TRUE),
        "F" => Some(BLit::FALSE),
        x => Lit::from_dimacs(x.parse().ok()?).map(BLit::Lit),
    }
}
