//! Propositional encodings of learning and verification problems.
//!
//! Every term of the encoding is a [`BLit`]: either a solver literal or a
//! constant. Verification reuses the learning builder with the domain's
//! structure supplied as constants, so most of the formula folds away.

mod build;
pub mod card;
mod decode;
mod varmap;

use std::ops::Not;

use graphlift_sat::{Cnf, Lit, Solver, SolverConfig, Var};
use thiserror::Error;

pub use build::{
    build_learning_model, build_verification_model, precheck, EncodeOptions, Encoding, Tier, TierKind,
};
pub use decode::{decode_model, tier_values, Decoded};
pub use varmap::{VarMap, NUM_T, T_TUPLES};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("empty graph")]
    EmptyGraph,
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("no actions to learn")]
    NoLabels,
    #[error("object count must be positive")]
    NoObjects,
    #[error("{0}")]
    Bounds(String),
    #[error("domain does not fit the encoding: {0}")]
    Domain(String),
    #[error("label {0} has no matching schema")]
    Label(String),
    #[error("assignment is inconsistent with the variable map: {0}")]
    Assignment(String),
    #[error("variable map: {0}")]
    VarMapFormat(String),
}

/// A literal or a truth constant.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BLit {
    Const(bool),
    Lit(Lit),
}

impl BLit {
    pub const TRUE: BLit = BLit::Const(true);
    pub const FALSE: BLit = BLit::Const(false);

    pub fn eval(self, assignment: &[bool]) -> bool {
        match self {
            BLit::Const(b) => b,
            BLit::Lit(l) => l.var().index() < assignment.len() && l.eval(assignment),
        }
    }

    pub fn is_const(self) -> bool {
        matches!(self, BLit::Const(_))
    }

    pub fn is_false(self) -> bool {
        self == BLit::FALSE
    }

    pub fn is_true(self) -> bool {
        self == BLit::TRUE
    }

    pub fn lit(self) -> Option<Lit> {
        match self {
            BLit::Lit(l) => Some(l),
            BLit::Const(_) => None,
        }
    }

    /// Literal with the given truth value of `self`.
    pub fn with(self, value: bool) -> BLit {
        if value {
            self
        } else {
            !self
        }
    }
}

impl Not for BLit {
    type Output = BLit;

    fn not(self) -> BLit {
        match self {
            BLit::Const(b) => BLit::Const(!b),
            BLit::Lit(l) => BLit::Lit(!l),
        }
    }
}

impl From<Lit> for BLit {
    fn from(l: Lit) -> Self {
        BLit::Lit(l)
    }
}

/// Decision hints for the embedded solver.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Hint {
    pub var: Var,
    pub priority: i32,
    pub phase: bool,
}

/// Clause database with named groups, stored flat.
#[derive(Clone, Debug, Default)]
pub struct ConstraintModel {
    pub num_vars: usize,
    lits: Vec<Lit>,
    starts: Vec<usize>,
    groups: Vec<(String, usize)>,
    pub hints: Vec<Hint>,
    trivially_unsat: bool,
}

impl ConstraintModel {
    pub fn new() -> Self {
        ConstraintModel::default()
    }

    pub fn new_var(&mut self) -> Lit {
        let v = Var::new(self.num_vars as u32);
        self.num_vars += 1;
        v.pos()
    }

    pub fn new_blit(&mut self) -> BLit {
        BLit::Lit(self.new_var())
    }

    pub fn hint(&mut self, b: BLit, priority: i32, phase: bool) {
        if let BLit::Lit(l) = b {
            self.hints.push(Hint {
                var: l.var(),
                priority,
                phase: phase != l.is_negated(),
            });
        }
    }

    /// Starts a named group; following clauses belong to it.
    pub fn group(&mut self, name: &str) {
        self.groups.push((name.to_string(), self.starts.len()));
    }

    /// Adds a clause after folding constants. Returns false if the clause was empty.
    pub fn add(&mut self, clause: &[BLit]) -> bool {
        let start = self.lits.len();
        for &b in clause {
            match b {
                BLit::Const(true) => {
                    self.lits.truncate(start);
                    return true;
                }
                BLit::Const(false) => {}
                BLit::Lit(l) => self.lits.push(l),
            }
        }
        if self.lits.len() == start {
            self.trivially_unsat = true;
        }
        self.starts.push(start);
        self.lits.len() > start
    }

    pub fn add_lits(&mut self, clause: &[Lit]) {
        if clause.is_empty() {
            self.trivially_unsat = true;
        }
        self.starts.push(self.lits.len());
        self.lits.extend_from_slice(clause);
    }

    /// `a ⇒ b`
    pub fn implies(&mut self, a: BLit, b: BLit) {
        self.add(&[!a, b]);
    }

    pub fn num_clauses(&self) -> usize {
        self.starts.len()
    }

    pub fn num_literals(&self) -> usize {
        self.lits.len()
    }

    pub fn is_trivially_unsat(&self) -> bool {
        self.trivially_unsat
    }

    pub fn clause(&self, i: usize) -> &[Lit] {
        let end = self.starts.get(i + 1).copied().unwrap_or(self.lits.len());
        &self.lits[self.starts[i]..end]
    }

    pub fn clauses(&self) -> impl Iterator<Item = &[Lit]> + '_ {
        (0..self.starts.len()).map(move |i| self.clause(i))
    }

    /// Group names with their clause ranges.
    pub fn groups(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let mut out = Vec::with_capacity(self.groups.len());
        for (i, (name, start)) in self.groups.iter().enumerate() {
            let end = self.groups.get(i + 1).map(|g| g.1).unwrap_or(self.starts.len());
            out.push((name.clone(), *start..end));
        }
        out
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses()
            .all(|c| c.iter().any(|l| l.var().index() < assignment.len() && l.eval(assignment)))
    }

    pub fn first_violated(&self, assignment: &[bool]) -> Option<(usize, String)> {
        let i = (0..self.num_clauses()).find(|&i| {
            !self
                .clause(i)
                .iter()
                .any(|l| l.var().index() < assignment.len() && l.eval(assignment))
        })?;
        let group = self
            .groups
            .iter()
            .rev()
            .find(|g| g.1 <= i)
            .map(|g| g.0.clone())
            .unwrap_or_default();
        Some((i, group))
    }

    pub fn to_cnf(&self) -> Cnf {
        let mut cnf = Cnf::new(self.num_vars);
        for c in self.clauses() {
            cnf.clauses.push(c.to_vec());
        }
        cnf
    }

    /// Fresh solver holding every clause and hint.
    pub fn to_solver(&self, config: SolverConfig) -> Solver {
        let mut s = Solver::with_config(config);
        s.ensure_vars(self.num_vars);
        for h in &self.hints {
            s.set_priority(h.var, h.priority);
            s.set_phase(h.var, h.phase);
        }
        for c in self.clauses() {
            if !s.add_clause(c) {
                break;
            }
        }
        s
    }

    /// Clauses added since clause index `from`.
    pub fn clauses_from(&self, from: usize) -> impl Iterator<Item = &[Lit]> + '_ {
        (from..self.starts.len()).map(move |i| self.clause(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_fold() {
        let mut m = ConstraintModel::new();
        let a = m.new_blit();
        assert!(m.add(&[a, BLit::FALSE]));
        assert!(m.add(&[a, BLit::TRUE]));
        assert_eq!(m.num_clauses(), 1);
        assert!(!m.is_trivially_unsat());
        assert!(!m.add(&[BLit::FALSE]));
        assert!(m.is_trivially_unsat());
    }

    #[test]
    fn groups_partition() {
        let mut m = ConstraintModel::new();
        let a = m.new_blit();
        m.group("one");
        m.add(&[a]);
        m.group("two");
        m.add(&[!a, a]);
        m.add(&[!a]);
        let g = m.groups();
        assert_eq!(g[0].1, 0..1);
        assert_eq!(g[1].1, 1..3);
        assert_eq!(m.first_violated(&[true]).unwrap().1, "two");
    }
}
