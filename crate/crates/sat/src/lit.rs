use std::fmt;
use std::ops::Not;

/// A propositional variable, numbered from zero.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    pub const fn new(index: u32) -> Self {
        Var(index)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    pub const fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    /// Literal of this variable with the given truth value.
    pub const fn lit(self, value: bool) -> Lit {
        if value {
            self.pos()
        } else {
            self.neg()
        }
    }
}

/// A literal: a variable or its negation. Encoded as `2 * var + negated`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub const fn new(var: Var, negated: bool) -> Self {
        Lit((var.0 << 1) | negated as u32)
    }

    pub const fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub const fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// Dense index usable for per-literal tables.
    pub const fn code(self) -> usize {
        self.0 as usize
    }

    pub const fn from_code(code: u32) -> Self {
        Lit(code)
    }

    /// Signed 1-based DIMACS integer.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Parses a nonzero signed DIMACS integer.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > u32::MAX as u64 / 2 {
            return None;
        }
        let var = Var((value.unsigned_abs() - 1) as u32);
        Some(Lit::new(var, value < 0))
    }

    /// Truth value of this literal under a total assignment indexed by variable.
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var().index()] != self.is_negated()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Evaluates a clause under a total assignment.
pub fn clause_satisfied(clause: &[Lit], assignment: &[bool]) -> bool {
    clause.iter().any(|l| l.eval(assignment))
}
