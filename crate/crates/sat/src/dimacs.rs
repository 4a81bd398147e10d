//! DIMACS CNF and assignment file interchange.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::lit::Lit;

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> DimacsError {
    DimacsError::Parse {
        line,
        message: message.into(),
    }
}

/// An in-memory CNF formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn add(&mut self, clause: Vec<Lit>) {
        for l in &clause {
            self.num_vars = self.num_vars.max(l.var().index() + 1);
        }
        self.clauses.push(clause);
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.var().index() < assignment.len() && l.eval(assignment)))
    }
}

pub fn write_cnf<W: Write>(cnf: &Cnf, comments: &[String], out: &mut W) -> io::Result<()> {
    for c in comments {
        writeln!(out, "c {c}")?;
    }
    writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len())?;
    let mut line = String::new();
    for clause in &cnf.clauses {
        line.clear();
        for l in clause {
            line.push_str(&l.to_dimacs().to_string());
            line.push(' ');
        }
        line.push('0');
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_cnf<R: BufRead>(input: R) -> Result<Cnf, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut cnf = Cnf::default();
    let mut current: Vec<Lit> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if t.starts_with('p') {
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(parse_err(lineno, "malformed problem line"));
            }
            let nv = parts[2]
                .parse()
                .map_err(|_| parse_err(lineno, "bad variable count"))?;
            let nc = parts[3]
                .parse()
                .map_err(|_| parse_err(lineno, "bad clause count"))?;
            header = Some((nv, nc));
            cnf.num_vars = nv;
            continue;
        }
        let (nv, _) = header.ok_or_else(|| parse_err(lineno, "clause before problem line"))?;
        for tok in t.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad literal '{tok}'")))?;
            if v == 0 {
                cnf.clauses.push(std::mem::take(&mut current));
            } else {
                if v.unsigned_abs() as usize > nv {
                    return Err(parse_err(lineno, format!("literal {v} exceeds declared variables")));
                }
                current.push(Lit::from_dimacs(v).unwrap());
            }
        }
    }
    if !current.is_empty() {
        cnf.clauses.push(current);
    }
    if header.is_none() {
        return Err(parse_err(0, "missing problem line"));
    }
    Ok(cnf)
}

/// Writes an assignment as whitespace-separated signed literals.
pub fn write_assignment<W: Write>(assignment: &[bool], out: &mut W) -> io::Result<()> {
    let mut line = String::new();
    for (v, &b) in assignment.iter().enumerate() {
        let d = v as i64 + 1;
        line.push_str(&(if b { d } else { -d }).to_string());
        line.push(' ');
    }
    line.push('0');
    writeln!(out, "{line}")
}

/// Reads whitespace-separated signed literals. Accepts solver output with
/// `s`/`v` prefixes. Missing variables default to false.
pub fn read_assignment<R: BufRead>(input: R, num_vars: usize) -> Result<Vec<bool>, DimacsError> {
    let mut values = vec![false; num_vars];
    let mut seen = vec![false; num_vars];
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut t = line.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('s') {
            if rest.trim() == "UNSATISFIABLE" {
                return Err(parse_err(lineno, "assignment file reports UNSATISFIABLE"));
            }
            continue;
        }
        if let Some(rest) = t.strip_prefix('v') {
            t = rest;
        }
        for tok in t.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad literal '{tok}'")))?;
            if v == 0 {
                continue;
            }
            let idx = v.unsigned_abs() as usize - 1;
            if idx >= num_vars {
                return Err(parse_err(lineno, format!("variable {} out of range", idx + 1)));
            }
            if seen[idx] && values[idx] != (v > 0) {
                return Err(parse_err(lineno, format!("variable {} assigned both ways", idx + 1)));
            }
            seen[idx] = true;
            values[idx] = v > 0;
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_formula_round_trips() {
        let cnf = Cnf::default();
        let mut buf = Vec::new();
        write_cnf(&cnf, &[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "p cnf 0 0\n");
        assert_eq!(read_cnf(&buf[..]).unwrap(), cnf);
    }

    #[test]
    fn clause_spanning_lines() {
        let text = "c hi\np cnf 3 2\n1 -2\n 3 0 -1 0\n";
        let cnf = read_cnf(text.as_bytes()).unwrap();
        assert_eq!(cnf.clauses.len(), 2);
        assert_eq!(cnf.clauses[0].len(), 3);
    }

    #[test]
    fn out_of_range_literal_is_reported() {
        let err = read_cnf("p cnf 1 1\n2 0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn assignment_accepts_competition_output() {
        let a = read_assignment("s SATISFIABLE\nv 1 -2\nv 3 0\n".as_bytes(), 3).unwrap();
        assert_eq!(a, vec![true, false, true]);
    }
}
