//! Object-count sweeps for learning and verification, with an independent
//! semantic re-check of everything the solver returns.

use std::time::{Duration, Instant};

use graphlift_sat::{Budget, SolverConfig, Status};
use log::{info, warn};
use thiserror::Error;

use crate::encode::{
    build_learning_model, build_verification_model, decode_model, precheck, tier_values, Decoded, EncodeError,
    EncodeOptions, Encoding,
};
use crate::graphio::LabeledGraph;
use crate::isocheck::{accounts_for, partial_witness_check};
use crate::model::{lex_cmp, validate, Bounds, CostVector, Domain, Instance, ModelFile};
use crate::par::{self, Exec};
use crate::semantics::{expand, Caps};
use crate::solve::{find_model, optimize_lex, External, Internal, Oracle, SolveError};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Conflict and wall-clock limits. Either may be absent, not both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    pub conflicts: Option<u64>,
    pub time: Option<Duration>,
}

impl Limits {
    pub fn time(d: Duration) -> Self {
        Limits {
            conflicts: None,
            time: Some(d),
        }
    }

    pub fn conflicts(n: u64) -> Self {
        Limits {
            conflicts: Some(n),
            time: None,
        }
    }

    /// A budget starting now.
    pub fn start(&self) -> Budget {
        Budget {
            max_conflicts: self.conflicts,
            deadline: self.time.map(|t| Instant::now() + t),
            interrupt: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub min_objects: usize,
    pub max_objects: usize,
    /// Per object count when learning, per graph when verifying.
    pub limits: Limits,
    /// Wall-clock cap on a whole learning sweep.
    pub total: Option<Duration>,
    pub bounds: Bounds,
    pub seed: u64,
    pub jobs: usize,
    pub exec: Exec,
    pub encode: EncodeOptions,
    /// Keep sweeping after the first verified object count.
    pub exhaustive: bool,
    /// Shell command for an external DIMACS solver.
    pub external_solver: Option<String>,
    pub caps: Caps,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            min_objects: 1,
            max_objects: 10,
            limits: Limits::time(Duration::from_secs(15 * 60)),
            total: None,
            bounds: Bounds::default(),
            seed: 0,
            jobs: 1,
            exec: Exec::default(),
            encode: EncodeOptions::default(),
            exhaustive: false,
            external_solver: None,
            caps: Caps::default(),
        }
    }
}

impl SearchConfig {
    pub fn check(&self) -> Result<(), LearnError> {
        if self.min_objects == 0 || self.min_objects > self.max_objects {
            return Err(LearnError::Config(format!(
                "object range {}..{} is empty",
                self.min_objects, self.max_objects
            )));
        }
        if self.limits.conflicts == Some(0) || self.limits.time == Some(Duration::ZERO) {
            return Err(LearnError::Config("budget must be positive".into()));
        }
        if self.limits.conflicts.is_none() && self.limits.time.is_none() {
            return Err(LearnError::Config("a conflict or time budget is required".into()));
        }
        if self.jobs == 0 {
            return Err(LearnError::Config("jobs must be at least 1".into()));
        }
        self.bounds.check().map_err(LearnError::Config)
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            seed: self.seed,
            ..SolverConfig::default()
        }
    }

    fn oracle(&self, enc: &Encoding) -> Box<dyn Oracle> {
        match &self.external_solver {
            Some(cmd) => Box::new(External::new(&enc.model, cmd)),
            None => Box::new(Internal::new(&enc.model, self.solver_config())),
        }
    }
}

/// What happened at one object count.
#[derive(Clone, Debug)]
pub struct ObjectOutcome {
    pub objects: usize,
    pub status: Status,
    /// Why the count was skipped or rejected, if it was.
    pub note: Option<String>,
    pub models: usize,
    pub first: Option<Duration>,
    pub best: Option<Duration>,
    pub elapsed: Duration,
    pub cost: Option<CostVector>,
    /// Objective values as optimized, see [`tier_values`].
    pub tiers: Option<[usize; 4]>,
    pub optimal: bool,
    /// Result of the semantic re-check; `None` without a model.
    pub verified: Option<bool>,
    pub model: Option<ModelFile>,
    pub conflicts: u64,
}

impl ObjectOutcome {
    fn empty(objects: usize, status: Status) -> Self {
        ObjectOutcome {
            objects,
            status,
            note: None,
            models: 0,
            first: None,
            best: None,
            elapsed: Duration::ZERO,
            cost: None,
            tiers: None,
            optimal: false,
            verified: None,
            model: None,
            conflicts: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub graph: String,
    pub status: Status,
    /// Object count and label assignment of the witness.
    pub objects: Option<usize>,
    pub label_map: Option<Vec<usize>>,
    pub instance: Option<Instance>,
    pub elapsed: Duration,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct LearnReport {
    pub name: String,
    pub outcomes: Vec<ObjectOutcome>,
    /// Index into `outcomes`.
    pub selected: Option<usize>,
    pub note: Option<String>,
    pub verification: Vec<VerifyOutcome>,
}

impl LearnReport {
    pub fn selected(&self) -> Option<&ObjectOutcome> {
        self.selected.map(|i| &self.outcomes[i])
    }

    pub fn model(&self) -> Option<&ModelFile> {
        self.selected().and_then(|o| o.model.as_ref())
    }

    /// Object counts whose model passed the re-check.
    pub fn verified_objects(&self) -> Vec<usize> {
        self.outcomes.iter().filter(|o| o.verified == Some(true)).map(|o| o.objects).collect()
    }
}

/// Does the decoded model really produce every graph? Complete inputs need an
/// isomorphism, partial or noisy ones an embedding.
pub fn semantic_check(d: &Decoded, graphs: &[LabeledGraph], bounds: &Bounds, caps: Caps) -> Result<(), String> {
    for (g, inst) in graphs.iter().zip(&d.instances) {
        let problems = validate(&d.domain, Some(inst), bounds);
        if !problems.is_empty() {
            return Err(problems.join("; "));
        }
        let space = expand(&d.domain, inst, caps).map_err(|e| e.to_string())?;
        let ok = if g.is_complete() {
            accounts_for(&space.graph, g).is_some()
        } else {
            partial_witness_check(&space.graph, g)
        };
        if !ok {
            return Err(format!(
                "expansion with {} nodes and {} edges does not account for the input",
                space.graph.num_nodes,
                space.graph.edges.len()
            ));
        }
    }
    Ok(())
}

fn learn_one(
    graphs: &[LabeledGraph],
    n: usize,
    cfg: &SearchConfig,
    deadline: Option<Instant>,
) -> Result<ObjectOutcome, LearnError> {
    let start = Instant::now();
    if let Err(why) = precheck(graphs, &cfg.bounds, n, None) {
        let mut o = ObjectOutcome::empty(n, Status::Unsat);
        o.note = Some(why);
        o.optimal = true;
        return Ok(o);
    }
    let mut enc = build_learning_model(graphs, &cfg.bounds, n, &cfg.encode)?;
    info!(
        "N={n}: {} variables, {} clauses",
        enc.model.num_vars,
        enc.model.num_clauses()
    );
    let mut oracle = cfg.oracle(&enc);
    let mut budget = cfg.limits.start();
    if let Some(d) = deadline {
        budget.deadline = Some(budget.deadline.map_or(d, |b| b.min(d)));
    }
    let res = optimize_lex(&mut enc, oracle.as_mut(), &budget)?;
    let mut o = ObjectOutcome::empty(n, res.status);
    o.models = res.models;
    o.first = res.first_time;
    o.best = res.best_time;
    o.optimal = res.optimal;
    o.conflicts = res.stats.conflicts;
    if let Some(best) = &res.best {
        let d = decode_model(best, &enc.varmap)?;
        o.cost = Some(d.cost);
        o.tiers = Some(tier_values(&d.domain, &d.cost));
        match semantic_check(&d, graphs, &cfg.bounds, cfg.caps) {
            Ok(()) => o.verified = Some(true),
            Err(why) => {
                warn!("N={n}: model rejected: {why}");
                o.verified = Some(false);
                o.note = Some(why);
            }
        }
        o.model = Some(ModelFile {
            bounds: cfg.bounds.clone(),
            domain: d.domain,
            instance: d.instances.into_iter().next().unwrap_or_default(),
        });
    }
    o.elapsed = start.elapsed();
    Ok(o)
}

/// Smallest verified object count, then the lex-smallest cost.
pub fn select(outcomes: &[ObjectOutcome]) -> Option<usize> {
    (0..outcomes.len())
        .filter(|&i| outcomes[i].verified == Some(true))
        .min_by(|&a, &b| {
            let (x, y) = (&outcomes[a], &outcomes[b]);
            x.objects
                .cmp(&y.objects)
                .then_with(|| lex_cmp(x.cost.as_ref().unwrap(), y.cost.as_ref().unwrap()))
        })
}

pub fn learn(graphs: &[LabeledGraph], cfg: &SearchConfig) -> Result<LearnReport, LearnError> {
    cfg.check()?;
    for g in graphs {
        g.validate().map_err(|e| LearnError::Graph(e.to_string()))?;
    }
    let mut report = LearnReport::default();
    if graphs.is_empty() {
        report.note = Some("no graphs to learn from".into());
        return Ok(report);
    }
    if graphs.iter().all(|g| g.labels.is_empty()) {
        report.note = Some("no actions to learn".into());
        return Ok(report);
    }
    let counts: Vec<usize> = (cfg.min_objects..=cfg.max_objects).collect();
    let deadline = cfg.total.map(|t| Instant::now() + t);
    if cfg.jobs > 1 && cfg.exec == Exec::Rayon {
        let results = par::map_jobs(cfg.exec, cfg.jobs, &counts, |&n| learn_one(graphs, n, cfg, deadline));
        for r in results {
            report.outcomes.push(r?);
        }
    } else {
        for &n in &counts {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                report.note = Some(format!("time ran out before {n} objects"));
                break;
            }
            let o = learn_one(graphs, n, cfg, deadline)?;
            let done = o.verified == Some(true) && !cfg.exhaustive;
            report.outcomes.push(o);
            if done {
                break;
            }
        }
    }
    report.selected = select(&report.outcomes);
    if report.selected.is_none() && report.note.is_none() {
        report.note = Some("no verified model in the object range".into());
    }
    Ok(report)
}

/// Injective assignments of graph labels to schemas. Matching names win
/// outright; otherwise every assignment is tried.
pub fn label_maps(d: &Domain, g: &LabeledGraph) -> Vec<Vec<usize>> {
    let by_name: Option<Vec<usize>> = g.labels.iter().map(|l| d.schema_by_label(l)).collect();
    if let Some(m) = by_name {
        return vec![m];
    }
    let k = g.labels.len();
    let s = d.schemas.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(k: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in 0..s {
            if !cur.contains(&x) {
                cur.push(x);
                rec(k, s, cur, out);
                cur.pop();
            }
        }
    }
    rec(k, s, &mut cur, &mut out);
    out
}

/// Graph labels renamed to the schema labels they are mapped to, so that the
/// expansion and the graph can be compared directly.
fn relabeled(d: &Domain, g: &LabeledGraph, map: &[usize]) -> LabeledGraph {
    let mut h = g.clone();
    h.labels = map.iter().map(|&s| d.schemas[s].label.clone()).collect();
    h
}

fn verify_one(d: &Domain, name: &str, g: &LabeledGraph, cfg: &SearchConfig) -> Result<VerifyOutcome, LearnError> {
    let start = Instant::now();
    let bounds = cfg.bounds.widened_for(d);
    let budget = cfg.limits.start();
    let mut out = VerifyOutcome {
        graph: name.to_string(),
        status: Status::Unsat,
        objects: None,
        label_map: None,
        instance: None,
        elapsed: Duration::ZERO,
        note: None,
    };
    let maps = label_maps(d, g);
    if maps.is_empty() {
        out.note = Some("graph has more labels than the domain has schemas".into());
    }
    let mut used = 0u64;
    'sweep: for n in cfg.min_objects..=cfg.max_objects {
        for map in &maps {
            if precheck(std::slice::from_ref(g), &bounds, n, Some((d, map))).is_err() {
                continue;
            }
            let mut b = budget.clone();
            if let Some(max) = b.max_conflicts {
                if used >= max {
                    out.status = Status::Unknown;
                    break 'sweep;
                }
                b.max_conflicts = Some(max - used);
            }
            let mut enc = build_verification_model(d, g, map, &bounds, n, &cfg.encode)?;
            let mut oracle = cfg.oracle(&enc);
            let st = find_model(&mut enc, oracle.as_mut(), &b)?;
            used += oracle.conflicts();
            match st {
                Status::Unsat => {}
                Status::Unknown => {
                    out.status = Status::Unknown;
                    break 'sweep;
                }
                Status::Sat => {
                    let dec = decode_model(&oracle.model(), &enc.varmap)?;
                    let h = relabeled(d, g, map);
                    match semantic_check(&dec, std::slice::from_ref(&h), &bounds, cfg.caps) {
                        Ok(()) => {
                            out.status = Status::Sat;
                            out.objects = Some(n);
                            out.label_map = Some(map.clone());
                            out.instance = dec.instances.into_iter().next();
                            break 'sweep;
                        }
                        Err(why) => {
                            // the encoding is meant to rule this out
                            warn!("{name}: N={n} witness rejected: {why}");
                            out.note = Some(why);
                        }
                    }
                }
            }
        }
    }
    out.elapsed = start.elapsed();
    Ok(out)
}

/// Checks a fixed domain against each graph, sweeping object counts.
pub fn verify(d: &Domain, graphs: &[(String, LabeledGraph)], cfg: &SearchConfig) -> Result<Vec<VerifyOutcome>, LearnError> {
    cfg.check()?;
    let problems = validate(d, None, &cfg.bounds.widened_for(d));
    if !problems.is_empty() {
        return Err(LearnError::Config(format!("invalid domain: {}", problems.join("; "))));
    }
    for (name, g) in graphs {
        g.validate().map_err(|e| LearnError::Graph(format!("{name}: {e}")))?;
    }
    let results = par::map_jobs(cfg.exec, cfg.jobs, graphs, |(name, g)| verify_one(d, name, g, cfg));
    results.into_iter().collect()
}
