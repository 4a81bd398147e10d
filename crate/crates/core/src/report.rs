//! Report tables for learning runs.
//!
//! CSV columns, in order:
//! `graph,objects,status,models,first_ms,best_ms,cost_a,cost_b,cost_c,cost_d,optimal,verified,selected`.
//! Costs are arity sums (schemas, dynamic predicates, static predicates) and
//! the largest state; empty cells mean no model.

use std::fmt::Write as _;
use std::time::Duration;

use graphlift_sat::Status;

use crate::learner::{LearnReport, VerifyOutcome};
use crate::model::{lex_cmp, CostVector};

pub const CSV_HEADER: [&str; 13] = [
    "graph", "objects", "status", "models", "first_ms", "best_ms", "cost_a", "cost_b", "cost_c", "cost_d",
    "optimal", "verified", "selected",
];

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Sat => "sat",
        Status::Unsat => "unsat",
        Status::Unknown => "unknown",
    }
}

fn ms(d: Option<Duration>) -> String {
    d.map(|d| d.as_millis().to_string()).unwrap_or_default()
}

pub fn render_csv(reports: &[LearnReport]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        for (i, o) in r.outcomes.iter().enumerate() {
            let cost = o.cost.map(|c| c.as_array().map(|x| x.to_string()));
            let cell = |k: usize| cost.as_ref().map(|c| c[k].clone()).unwrap_or_default();
            w.write_record([
                r.name.clone(),
                o.objects.to_string(),
                status_str(o.status).to_string(),
                o.models.to_string(),
                ms(o.first),
                ms(o.best),
                cell(0),
                cell(1),
                cell(2),
                cell(3),
                (o.optimal as u8).to_string(),
                o.verified.map(|v| (v as u8).to_string()).unwrap_or_default(),
                ((r.selected == Some(i)) as u8).to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn secs(d: Option<Duration>) -> String {
    match d {
        Some(d) => format!("{:.2}", d.as_secs_f64()),
        None => "-".into(),
    }
}

fn cost_str(c: Option<CostVector>) -> String {
    c.map(|c| c.to_string()).unwrap_or_else(|| "-".into())
}

/// Fixed-width table, one row per object count.
pub fn render_text(r: &LearnReport) -> String {
    let mut s = String::new();
    if !r.name.is_empty() {
        let _ = writeln!(s, "{}", r.name);
    }
    let _ = writeln!(
        s,
        "{:>5} {:>8} {:>5} {:>9} {:>9} {:>4} {:>4} {:>16}",
        "#obj", "status", "#mod", "first", "best", "ver", "opt", "cost"
    );
    for (i, o) in r.outcomes.iter().enumerate() {
        let ver = match o.verified {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        let opt = if o.models == 0 {
            "-"
        } else if o.optimal {
            "yes"
        } else {
            "no"
        };
        let _ = writeln!(
            s,
            "{:>5} {:>8} {:>5} {:>9} {:>9} {:>4} {:>4} {:>16}{}",
            o.objects,
            status_str(o.status),
            if o.models == 0 { "-".to_string() } else { o.models.to_string() },
            secs(o.first),
            secs(o.best),
            ver,
            opt,
            cost_str(o.cost),
            if r.selected == Some(i) { "  <" } else { "" }
        );
    }
    if let Some(n) = &r.note {
        let _ = writeln!(s, "note: {n}");
    }
    for v in &r.verification {
        let _ = writeln!(s, "{}", verify_line(v));
    }
    s
}

pub fn verify_line(v: &VerifyOutcome) -> String {
    let mut s = format!("verify {}: {}", v.graph, status_str(v.status));
    if let Some(n) = v.objects {
        let _ = write!(s, " with {n} objects");
    }
    let _ = write!(s, " ({:.2}s)", v.elapsed.as_secs_f64());
    if let Some(note) = &v.note {
        let _ = write!(s, " [{note}]");
    }
    s
}

/// Aggregate over repeated runs (e.g. seeds of a partial graph).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchSummary {
    pub runs: usize,
    /// Runs with a selected model.
    pub solved: usize,
    /// Selected models that also passed verification on every test graph.
    pub verified: usize,
    pub optimal: usize,
    pub min_cost: Option<CostVector>,
    pub max_cost: Option<CostVector>,
}

pub fn summarize(reports: &[LearnReport]) -> BatchSummary {
    let mut b = BatchSummary {
        runs: reports.len(),
        ..BatchSummary::default()
    };
    for r in reports {
        let Some(o) = r.selected() else { continue };
        b.solved += 1;
        if r.verification.iter().all(|v| v.status == Status::Sat) {
            b.verified += 1;
        }
        if o.optimal {
            b.optimal += 1;
        }
        if let Some(c) = o.cost {
            if b.min_cost.map_or(true, |m| lex_cmp(&c, &m).is_lt()) {
                b.min_cost = Some(c);
            }
            if b.max_cost.map_or(true, |m| lex_cmp(&c, &m).is_gt()) {
                b.max_cost = Some(c);
            }
        }
    }
    b
}

pub fn render_summary(label: &str, b: &BatchSummary) -> String {
    format!(
        "{label}: n={}/{} v={} opt={} min={} max={}",
        b.solved,
        b.runs,
        b.verified,
        b.optimal,
        cost_str(b.min_cost),
        cost_str(b.max_cost)
    )
}
