//! Solving constraint models: plain satisfiability, an external solver
//! bridge, and lexicographic descent over the cost tiers.

use std::io::{BufReader, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use graphlift_sat::{read_assignment, write_cnf, Budget, Cnf, Lit, Solver, SolverConfig, Stats, Status};
use log::{debug, info};
use thiserror::Error;

use crate::encode::{decode_model, tier_values, BLit, ConstraintModel, Encoding};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("external solver: {0}")]
    External(String),
    #[error("solver returned an assignment violating clause {clause} in group {group}")]
    BadModel { clause: usize, group: String },
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: Status,
    pub assignment: Option<Vec<bool>>,
    pub stats: Stats,
    pub elapsed: Duration,
}

/// Something that answers satisfiability queries over a growing clause set.
pub trait Oracle {
    fn add_clause(&mut self, clause: &[Lit]);
    fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> Result<Status, SolveError>;
    fn model(&self) -> Vec<bool>;
    fn conflicts(&self) -> u64;
    fn stats(&self) -> Stats {
        Stats::default()
    }
}

pub struct Internal {
    solver: Solver,
}

impl Internal {
    pub fn new(m: &ConstraintModel, config: SolverConfig) -> Self {
        Internal {
            solver: m.to_solver(config),
        }
    }
}

impl Oracle for Internal {
    fn add_clause(&mut self, clause: &[Lit]) {
        if let Some(max) = clause.iter().map(|l| l.var().index() + 1).max() {
            self.solver.ensure_vars(max);
        }
        self.solver.add_clause(clause);
    }

    fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> Result<Status, SolveError> {
        Ok(self.solver.solve(assumptions, budget))
    }

    fn model(&self) -> Vec<bool> {
        self.solver.model().to_vec()
    }

    fn conflicts(&self) -> u64 {
        self.solver.stats().conflicts
    }

    fn stats(&self) -> Stats {
        self.solver.stats().clone()
    }
}

/// Runs `sh -c <command>` with DIMACS on stdin and reads a model from stdout.
pub struct External {
    command: String,
    cnf: Cnf,
    model: Vec<bool>,
}

impl External {
    pub fn new(m: &ConstraintModel, command: &str) -> Self {
        External {
            command: command.to_string(),
            cnf: m.to_cnf(),
            model: Vec::new(),
        }
    }
}

impl Oracle for External {
    fn add_clause(&mut self, clause: &[Lit]) {
        self.cnf.add(clause.to_vec());
    }

    fn solve(&mut self, assumptions: &[Lit], _budget: &Budget) -> Result<Status, SolveError> {
        let mut cnf = self.cnf.clone();
        for &a in assumptions {
            cnf.add(vec![a]);
        }
        let mut text = Vec::new();
        write_cnf(&cnf, &[], &mut text).map_err(|e| SolveError::External(e.to_string()))?;
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolveError::External(e.to_string()))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            // a solver may exit before reading everything
            let _ = stdin.write_all(&text);
        }
        let out = child.wait_with_output().map_err(|e| SolveError::External(e.to_string()))?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        if stdout.lines().any(|l| l.trim() == "s UNSATISFIABLE") {
            return Ok(Status::Unsat);
        }
        if !stdout.lines().any(|l| l.trim() == "s SATISFIABLE") {
            return Ok(Status::Unknown);
        }
        let model = read_assignment(BufReader::new(stdout.as_bytes()), cnf.num_vars)
            .map_err(|e| SolveError::External(e.to_string()))?;
        if !cnf.is_satisfied_by(&model) {
            return Err(SolveError::External("assignment does not satisfy the formula".into()));
        }
        self.model = model;
        Ok(Status::Sat)
    }

    fn model(&self) -> Vec<bool> {
        self.model.clone()
    }

    fn conflicts(&self) -> u64 {
        0
    }
}

fn check(m: &ConstraintModel, assignment: &[bool]) -> Result<(), SolveError> {
    match m.first_violated(assignment) {
        None => Ok(()),
        Some((clause, group)) => Err(SolveError::BadModel { clause, group }),
    }
}

/// One satisfiability call on a fresh internal solver.
pub fn solve(
    m: &ConstraintModel,
    assumptions: &[Lit],
    budget: &Budget,
    config: SolverConfig,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    if m.is_trivially_unsat() {
        return Ok(SolveResult {
            status: Status::Unsat,
            assignment: None,
            stats: Stats::default(),
            elapsed: start.elapsed(),
        });
    }
    let mut s = m.to_solver(config);
    let status = s.solve(assumptions, budget);
    let assignment = if status == Status::Sat {
        let a = s.model().to_vec();
        check(m, &a)?;
        Some(a)
    } else {
        None
    };
    Ok(SolveResult {
        status,
        assignment,
        stats: s.stats().clone(),
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug)]
pub struct Improvement {
    pub values: [usize; 4],
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    /// `Sat` once any model was found, `Unsat` if none exists.
    pub status: Status,
    pub best: Option<Vec<bool>>,
    pub values: Option<[usize; 4]>,
    /// Every tier closed by an unsatisfiable call.
    pub optimal: bool,
    pub log: Vec<Improvement>,
    pub first_time: Option<Duration>,
    pub best_time: Option<Duration>,
    pub models: usize,
    pub stats: Stats,
}

/// Budget left after `used` conflicts.
fn remaining(budget: &Budget, used: u64) -> Option<Budget> {
    let mut b = budget.clone();
    if let Some(max) = budget.max_conflicts {
        if used >= max {
            return None;
        }
        b.max_conflicts = Some(max - used);
    }
    if let Some(d) = budget.deadline {
        if Instant::now() >= d {
            return None;
        }
    }
    Some(b)
}

/// Solves, adding violated lazy distinctness pairs until the model holds.
fn sat_call(
    enc: &mut Encoding,
    oracle: &mut dyn Oracle,
    assumptions: &[Lit],
    budget: &Budget,
    start_conflicts: u64,
) -> Result<Status, SolveError> {
    loop {
        let Some(b) = remaining(budget, oracle.conflicts() - start_conflicts) else {
            return Ok(Status::Unknown);
        };
        let st = oracle.solve(assumptions, &b)?;
        if st != Status::Sat {
            return Ok(st);
        }
        let model = oracle.model();
        let before = enc.model.num_clauses();
        let added = enc.add_violated_pairs(&model);
        if added == 0 {
            check(&enc.model, &model)?;
            return Ok(st);
        }
        debug!("lazy distinctness: {added} pairs added");
        for c in enc.model.clauses_from(before) {
            oracle.add_clause(c);
        }
    }
}

/// Plain satisfiability of an encoding, lazy pairs included.
pub fn find_model(enc: &mut Encoding, oracle: &mut dyn Oracle, budget: &Budget) -> Result<Status, SolveError> {
    if enc.model.is_trivially_unsat() {
        return Ok(Status::Unsat);
    }
    let c0 = oracle.conflicts();
    sat_call(enc, oracle, &[], budget, c0)
}

/// Lexicographic descent: the first tier is lowered one step at a time until
/// unsatisfiable, then frozen, and so on down the tiers.
pub fn optimize_lex(enc: &mut Encoding, oracle: &mut dyn Oracle, budget: &Budget) -> Result<OptimizeResult, SolveError> {
    let start = Instant::now();
    let c0 = oracle.conflicts();
    let mut res = OptimizeResult {
        status: Status::Unknown,
        best: None,
        values: None,
        optimal: false,
        log: Vec::new(),
        first_time: None,
        best_time: None,
        models: 0,
        stats: Stats::default(),
    };
    if enc.model.is_trivially_unsat() {
        res.status = Status::Unsat;
        res.optimal = true;
        return Ok(res);
    }
    let st = sat_call(enc, oracle, &[], budget, c0)?;
    if st != Status::Sat {
        res.status = st;
        res.optimal = st == Status::Unsat;
        res.stats = oracle.stats();
        return Ok(res);
    }
    let value_of = |enc: &Encoding, model: &[bool]| -> [usize; 4] {
        let d = decode_model(model, &enc.varmap).expect("model decodes");
        tier_values(&d.domain, &d.cost)
    };
    let mut best = oracle.model();
    let mut values = value_of(enc, &best);
    res.status = Status::Sat;
    res.models = 1;
    res.first_time = Some(start.elapsed());
    res.best_time = res.first_time;
    res.log.push(Improvement {
        values,
        elapsed: start.elapsed(),
    });
    info!("first model {values:?}");

    let mut frozen: Vec<Lit> = Vec::new();
    let mut all_closed = true;
    let tiers = enc.tiers.clone();
    'tiers: for (i, tier) in tiers.iter().enumerate() {
        loop {
            if values[i] == 0 {
                break;
            }
            let lit = tier.bound(values[i] - 1);
            let l = match lit {
                BLit::Const(false) => break,
                BLit::Const(true) => unreachable!("bound below the current value is never implied"),
                BLit::Lit(l) => l,
            };
            let mut assumptions = frozen.clone();
            assumptions.push(l);
            match sat_call(enc, oracle, &assumptions, budget, c0)? {
                Status::Sat => {
                    let model = oracle.model();
                    let v = value_of(enc, &model);
                    assert!(v < values && v[..i] == values[..i], "descent must improve: {v:?} after {values:?}");
                    res.models += 1;
                    best = model;
                    values = v;
                    res.best_time = Some(start.elapsed());
                    res.log.push(Improvement {
                        values,
                        elapsed: start.elapsed(),
                    });
                    info!("improved to {values:?}");
                }
                Status::Unsat => break,
                Status::Unknown => {
                    all_closed = false;
                    break 'tiers;
                }
            }
        }
        if let BLit::Lit(l) = tier.bound(values[i]) {
            frozen.push(l);
        }
    }
    res.optimal = all_closed;
    res.best = Some(best);
    res.values = Some(values);
    res.stats = oracle.stats();
    Ok(res)
}
