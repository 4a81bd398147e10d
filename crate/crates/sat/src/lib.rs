//! A small incremental CDCL SAT solver.
//!
//! ```
//! use graphlift_sat::{Budget, Solver, Status};
//!
//! let mut s = Solver::new();
//! let a = s.new_var();
//! let b = s.new_var();
//! s.add_clause(&[a.pos(), b.pos()]);
//! s.add_clause(&[a.neg()]);
//! assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat);
//! assert!(s.model()[b.index()]);
//! ```

pub mod dimacs;
mod lit;
mod solver;

pub use dimacs::{read_assignment, read_cnf, write_assignment, write_cnf, Cnf, DimacsError};
pub use lit::{clause_satisfied, Lit, Var};
pub use solver::{Budget, Solver, SolverConfig, Stats, Status};

/// Loads every clause of `cnf` into a fresh solver.
pub fn solver_from_cnf(cnf: &Cnf, config: SolverConfig) -> Solver {
    let mut s = Solver::with_config(config);
    s.ensure_vars(cnf.num_vars);
    for c in &cnf.clauses {
        if !s.add_clause(c) {
            break;
        }
    }
    s
}
