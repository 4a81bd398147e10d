use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graphlift::encode::{build_learning_model, build_verification_model, decode_model, EncodeOptions, VarMap};
use graphlift::generators::{generate, DomainSpec};
use graphlift::graphio::{corrupt_noise, sample_partial, LabeledGraph};
use graphlift::isocheck::accounts_for;
use graphlift::learner::{self, label_maps, LearnReport, Limits, SearchConfig};
use graphlift::model::{render_listing, Bounds, ModelFile};
use graphlift::par::Exec;
use graphlift::report;
use graphlift::semantics::{expand, Caps};
use graphlift_sat::{read_assignment, write_cnf, Status};

const OK: u8 = 0;
const NONE: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "graphlift", version, about = "Learn lifted STRIPS models from labeled state graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the state graph of a built-in family.
    Gen {
        /// blocks1, blocks2, hanoi, gripper, grid-v0, grid-v1
        #[arg(long)]
        family: String,
        /// Comma-separated sizes, e.g. 3,3 for hanoi (disks, pegs).
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Keep the edges covered by a random walk.
    Sample {
        input: PathBuf,
        /// Percent of edges to traverse.
        #[arg(short, long)]
        p: u32,
        #[arg(long, env = "GRAPHLIFT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Redirect a share of the edges to fresh ambiguous nodes.
    Noise {
        input: PathBuf,
        /// Percent of edges left untouched.
        #[arg(short, long)]
        q: u32,
        #[arg(long, env = "GRAPHLIFT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print node, edge and label counts.
    Stats {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Test two complete graphs for isomorphism up to label renaming.
    CheckIso { a: PathBuf, b: PathBuf },
    /// Expand a model file into its reachable state graph.
    Expand {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Learn a model from one or more graphs.
    Learn {
        #[arg(required = true)]
        graphs: Vec<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
        /// Keep sweeping after the first verified object count.
        #[arg(long)]
        exhaustive: bool,
        /// Wall-clock cap on the whole sweep, e.g. `30m`.
        #[arg(long)]
        total: Option<String>,
        /// Graphs to verify the selected model on afterwards.
        #[arg(long = "test", num_args = 1..)]
        tests: Vec<PathBuf>,
        /// Where to write the selected model.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// CSV report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a model's domain against graphs.
    Verify {
        model: PathBuf,
        #[arg(required = true)]
        graphs: Vec<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write the constraint model for one object count as DIMACS.
    EmitCnf {
        graph: PathBuf,
        #[arg(long)]
        objects: usize,
        /// Encode verification of this model's domain instead of learning.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        varmap: PathBuf,
    },
    /// Decode an external solver's assignment through a variable map.
    ImportAssignment {
        varmap: PathBuf,
        assignment: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    max_predicates: Option<usize>,
    #[arg(long)]
    max_static: Option<usize>,
    #[arg(long)]
    max_precs: Option<usize>,
    #[arg(long)]
    max_effects: Option<usize>,
    #[arg(long)]
    max_action_arity: Option<usize>,
    #[arg(long)]
    max_pred_arity: Option<usize>,
    #[arg(long)]
    max_true_atoms: Option<usize>,
    #[arg(long)]
    invariants: Option<usize>,
    /// Drop symmetry-breaking clauses.
    #[arg(long)]
    no_symmetry: bool,
    /// Encode all distinctness pairs even when refinement separates them.
    #[arg(long)]
    no_prune: bool,
    /// Add distinctness pairs only once a model violates them.
    #[arg(long)]
    lazy_distinct: bool,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        let mut b = Bounds::default();
        let set = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut b.max_predicates, self.max_predicates);
        set(&mut b.max_static_predicates, self.max_static);
        set(&mut b.max_precs, self.max_precs);
        set(&mut b.max_effects, self.max_effects);
        set(&mut b.max_action_arity, self.max_action_arity);
        set(&mut b.max_pred_arity, self.max_pred_arity);
        set(&mut b.max_true_atoms_per_state, self.max_true_atoms);
        set(&mut b.num_invariants, self.invariants);
        b
    }

    fn encode(&self) -> EncodeOptions {
        EncodeOptions {
            symmetry_breaking: !self.no_symmetry,
            prune_distinct: !self.no_prune,
            lazy_distinct: self.lazy_distinct,
            ..EncodeOptions::default()
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Object counts to try, `A..B` or a single number.
    #[arg(long, default_value = "1..10")]
    objects: String,
    /// Per object count (learn) or per graph (verify): `500000c` conflicts,
    /// or a duration like `90s`, `15m`, `2h`.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long, env = "GRAPHLIFT_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads over object counts (learn) or graphs (verify).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Shell command reading DIMACS on stdin and printing a model.
    #[arg(long)]
    external_solver: Option<String>,
    #[command(flatten)]
    bounds: BoundArgs,
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| anyhow!("bad object count {x:?}"));
    match s.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

fn parse_budget(s: &str) -> Result<Limits> {
    let s = s.trim();
    let (num, unit) = s.split_at(s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len()));
    let n: u64 = num.parse().map_err(|_| anyhow!("bad budget {s:?}"))?;
    Ok(match unit {
        "c" => Limits::conflicts(n),
        "" | "s" => Limits::time(Duration::from_secs(n)),
        "m" => Limits::time(Duration::from_secs(60 * n)),
        "h" => Limits::time(Duration::from_secs(3600 * n)),
        _ => bail!("bad budget unit in {s:?}"),
    })
}

impl SearchArgs {
    fn config(&self, default_limit: Duration) -> Result<SearchConfig> {
        let (min_objects, max_objects) = parse_range(&self.objects)?;
        let limits = match &self.budget {
            Some(b) => parse_budget(b)?,
            None => Limits::time(default_limit),
        };
        let cfg = SearchConfig {
            min_objects,
            max_objects,
            limits,
            bounds: self.bounds.bounds(),
            seed: self.seed,
            jobs: self.jobs,
            exec: if self.jobs > 1 { Exec::Rayon } else { Exec::Sequential },
            encode: self.bounds.encode(),
            external_solver: self.external_solver.clone(),
            ..SearchConfig::default()
        };
        cfg.check().map_err(|e| Usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Errors that map to the usage exit code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load_graph(p: &Path) -> Result<LabeledGraph> {
    LabeledGraph::load(p).with_context(|| format!("reading {}", p.display()))
}

fn load_model(p: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    ModelFile::parse(&text).with_context(|| format!("parsing {}", p.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn graph_name(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn stats_line(name: &str, g: &LabeledGraph) -> String {
    let s = g.stats();
    format!(
        "{name}: {} labels, {} nodes, {} edges, {} unvisited, {} ambiguous",
        s.labels, s.nodes, s.edges, s.unvisited_total, s.ambiguous_count
    )
}

fn verify_code(outcomes: &[learner::VerifyOutcome]) -> u8 {
    if outcomes.iter().any(|v| v.status == Status::Unsat) {
        NONE
    } else if outcomes.iter().any(|v| v.status == Status::Unknown) {
        BUDGET
    } else {
        OK
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Gen { family, params, output } => {
            let spec = DomainSpec::from_family(&family, &params).map_err(Usage)?;
            let g = generate(&spec)?;
            write_out(output.as_deref(), &g.to_json())?;
            eprintln!("{}", stats_line(&spec.to_string(), &g));
            Ok(OK)
        }
        Cmd::Sample { input, p, seed, output } => {
            let g = sample_partial(&load_graph(&input)?, p, seed)?;
            write_out(output.as_deref(), &g.to_json())?;
            Ok(OK)
        }
        Cmd::Noise { input, q, seed, output } => {
            let g = corrupt_noise(&load_graph(&input)?, q, seed)?;
            write_out(output.as_deref(), &g.to_json())?;
            Ok(OK)
        }
        Cmd::Stats { inputs } => {
            for p in inputs {
                println!("{}", stats_line(&graph_name(&p), &load_graph(&p)?));
            }
            Ok(OK)
        }
        Cmd::CheckIso { a, b } => {
            let (ga, gb) = (load_graph(&a)?, load_graph(&b)?);
            match accounts_for(&ga, &gb) {
                Some(w) => {
                    println!("isomorphic, labels {:?}", w.label_map);
                    Ok(OK)
                }
                None => {
                    println!("not isomorphic");
                    Ok(NONE)
                }
            }
        }
        Cmd::Expand { model, output } => {
            let m = load_model(&model)?;
            let space = expand(&m.domain, &m.instance, Caps::default())?;
            eprintln!("{}", stats_line(&graph_name(&model), &space.graph));
            if output.is_some() {
                write_out(output.as_deref(), &space.graph.to_json())?;
            }
            Ok(OK)
        }
        Cmd::Learn {
            graphs,
            search,
            exhaustive,
            total,
            tests,
            output,
            report: report_path,
        } => {
            let mut cfg = search.config(Duration::from_secs(15 * 60))?;
            cfg.exhaustive = exhaustive;
            if let Some(t) = &total {
                cfg.total = match parse_budget(t)? {
                    Limits { time: Some(d), .. } => Some(d),
                    _ => return Err(Usage(format!("--total takes a duration, not {t:?}")).into()),
                };
            }
            let inputs: Vec<LabeledGraph> = graphs.iter().map(|p| load_graph(p)).collect::<Result<_>>()?;
            let mut r: LearnReport = learner::learn(&inputs, &cfg)?;
            r.name = graphs.iter().map(|p| graph_name(p)).collect::<Vec<_>>().join("+");
            if let Some(m) = r.model().cloned() {
                if !tests.is_empty() {
                    let named: Vec<(String, LabeledGraph)> =
                        tests.iter().map(|p| Ok((graph_name(p), load_graph(p)?))).collect::<Result<_>>()?;
                    let mut vcfg = cfg.clone();
                    vcfg.limits = match &search.budget {
                        Some(b) => parse_budget(b)?,
                        None => Limits::time(Duration::from_secs(5 * 60)),
                    };
                    r.verification = learner::verify(&m.domain, &named, &vcfg)?;
                }
                print!("{}", render_listing(&m.domain));
                if let Some(p) = &output {
                    fs::write(p, m.render()).with_context(|| format!("writing {}", p.display()))?;
                }
            }
            eprint!("{}", report::render_text(&r));
            if let Some(p) = &report_path {
                fs::write(p, report::render_csv(std::slice::from_ref(&r))?)?;
            }
            Ok(if r.selected.is_some() {
                verify_code(&r.verification)
            } else if r.outcomes.iter().any(|o| o.status == Status::Unknown) {
                BUDGET
            } else {
                NONE
            })
        }
        Cmd::Verify { model, graphs, search } => {
            let cfg = search.config(Duration::from_secs(5 * 60))?;
            let m = load_model(&model)?;
            let named: Vec<(String, LabeledGraph)> =
                graphs.iter().map(|p| Ok((graph_name(p), load_graph(p)?))).collect::<Result<_>>()?;
            let outcomes = learner::verify(&m.domain, &named, &cfg)?;
            for v in &outcomes {
                println!("{}", report::verify_line(v));
            }
            Ok(verify_code(&outcomes))
        }
        Cmd::EmitCnf {
            graph,
            objects,
            model,
            bounds,
            output,
            varmap,
        } => {
            let g = load_graph(&graph)?;
            let b = bounds.bounds();
            let enc = match model {
                Some(mp) => {
                    let m = load_model(&mp)?;
                    let map = label_maps(&m.domain, &g)
                        .into_iter()
                        .next()
                        .ok_or_else(|| anyhow!("graph has more labels than the domain"))?;
                    build_verification_model(&m.domain, &g, &map, &b.widened_for(&m.domain), objects, &bounds.encode())?
                }
                None => build_learning_model(std::slice::from_ref(&g), &b, objects, &bounds.encode())?,
            };
            let mut text = Vec::new();
            write_cnf(&enc.model.to_cnf(), &[format!("graphlift {} objects", objects)], &mut text)?;
            fs::write(&output, text).with_context(|| format!("writing {}", output.display()))?;
            fs::write(&varmap, enc.varmap.to_text()).with_context(|| format!("writing {}", varmap.display()))?;
            eprintln!("{} variables, {} clauses", enc.model.num_vars, enc.model.num_clauses());
            Ok(OK)
        }
        Cmd::ImportAssignment {
            varmap,
            assignment,
            output,
        } => {
            let vm = VarMap::from_text(&fs::read_to_string(&varmap)?)?;
            let text = fs::read_to_string(&assignment)?;
            if text.lines().any(|l| l.trim() == "s UNSATISFIABLE") {
                println!("unsatisfiable");
                return Ok(NONE);
            }
            let a = read_assignment(BufReader::new(text.as_bytes()), vm.num_vars)?;
            let d = decode_model(&a, &vm)?;
            print!("{}", render_listing(&d.domain));
            println!("cost {}", d.cost);
            if let Some(p) = &output {
                let m = ModelFile {
                    bounds: Bounds::default().widened_for(&d.domain),
                    domain: d.domain,
                    instance: d.instances.into_iter().next().unwrap_or_default(),
                };
                fs::write(p, m.render())?;
            }
            Ok(OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}
