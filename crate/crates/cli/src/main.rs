use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use amalgam_core::amalgam::{free_amalgam, AmalgamationTriple, Configuration};
use amalgam_core::format::{
    parse_bms, parse_dds, parse_edge_list, serialize_bms, serialize_dds, serialize_edge_list,
    serialize_space, BmsFile,
};
use amalgam_core::girth::{dd_realize, dd_validate, og_realize, og_validate, OddGirthGraph};
use amalgam_core::harness::{run_acceptance, sop_witness_graph, HarnessError, SuiteCaps, SUITES};
use amalgam_core::independence::{indep_at_level, ladder_check, level_bounds, spread_sequence};
use amalgam_core::sop::{base_case_contradiction, DividingConfiguration, SopError};
use amalgam_core::spaces::{enumerate_spaces, min_plus_complete, EnumerationCaps, SpaceError};
use amalgam_core::{Digraph, Distance};

#[derive(Parser)]
#[command(
    name = "amalgam",
    version,
    about = "Bounded metric spaces, free amalgams and short-cycle checks"
)]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also print tallies and counterexamples.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

/// Point sets for configuration commands, comma separated.
#[derive(clap::Args)]
struct ConfigArgs {
    /// Ambient space (.bms, total).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    base: Vec<String>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    left: Vec<String>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    right: Vec<String>,
    /// Overrides the file's nstar.
    #[arg(long)]
    nstar: Option<Distance>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a .bms file: metric axioms if total, completability if partial.
    Validate { file: PathBuf },
    /// Complete a partial .bms file by shortest chains.
    Complete {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free amalgam of two .bms spaces over shared points.
    Amalgamate {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        base: Vec<String>,
        #[arg(long)]
        nstar: Option<Distance>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independence of left and right over base at a level.
    Indep {
        #[arg(long)]
        level: u32,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Spread the right side into copies over the left.
    Spread {
        #[arg(long)]
        level: u32,
        #[arg(long)]
        count: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Climb the independence ladder up to a level.
    Ladder {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Consistency of a .dds directed-distance file.
    DigraphCheck { file: PathBuf },
    /// Realize a .dds file as a digraph edge list.
    DigraphRealize {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Realize a partial .bms (odd n) with no short odd cycle, or check an
    /// edge list against `--n`.
    OddgirthCheck {
        file: PathBuf,
        #[arg(long)]
        n: Option<Distance>,
    },
    /// Base-case cycle certificate at level n.
    SopDemo {
        #[arg(long)]
        n: u32,
        /// Edge list; by default the realized anchor chain c0 -> c1 -> c2.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Anchor edge, `first,second`.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = ["c1".to_string(), "c2".to_string()])]
        anchors: Vec<String>,
        /// Bound of the default witness graph, 2^(n+1) + 1 unless given.
        #[arg(long, conflicts_with = "graph")]
        bound: Option<Distance>,
    },
    /// List every metric on `points` points with values up to `n`.
    Enumerate {
        #[arg(long)]
        points: usize,
        #[arg(long)]
        n: Distance,
        #[arg(long)]
        count: bool,
        #[arg(long, env = "AMALGAM_MAX_POINTS", default_value_t = 5)]
        max_points: usize,
        #[arg(long, env = "AMALGAM_MAX_BOUND", default_value_t = 8)]
        max_bound: Distance,
    },
    /// Run acceptance suites (all by default).
    Accept {
        suites: Vec<String>,
        #[arg(long, env = "AMALGAM_MAX_POINTS")]
        max_points: Option<usize>,
        #[arg(long, env = "AMALGAM_MAX_BOUND")]
        max_bound: Option<Distance>,
    },
}

/// What went wrong, and which exit code it maps to.
enum Failure {
    /// Bad flags, unreadable or malformed input: exit 2.
    Usage(String),
    /// Well-formed input on which the requested construction fails: exit 1.
    Input(String),
}

impl From<SpaceError> for Failure {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::UnknownPoint(_)
            | SpaceError::InvalidName(_)
            | SpaceError::CapExceeded { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

/// Result of one subcommand: pass or fail, text lines and a JSON payload.
struct Done {
    pass: bool,
    text: String,
    result: Value,
    witnesses: Vec<String>,
}

impl Done {
    fn new(pass: bool, text: impl Into<String>, result: Value) -> Self {
        Done {
            pass,
            text: text.into(),
            result,
            witnesses: Vec::new(),
        }
    }

    fn witness(mut self, w: impl ToString) -> Self {
        self.witnesses.push(w.to_string());
        self
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_bms(path: &Path) -> Result<BmsFile, Failure> {
    parse_bms(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_config(args: &ConfigArgs) -> Result<Configuration, Failure> {
    let file = load_bms(&args.config)?;
    let nstar = args.nstar.unwrap_or_else(|| file.nstar_or_default());
    let space = file.spec.into_space()?;
    Configuration::new(space, nstar, &args.base, &args.left, &args.right).map_err(|e| match e {
        amalgam_core::AmalgamError::Space(s) => Failure::from(s),
        amalgam_core::AmalgamError::InvalidNstar { .. } => usage(e),
        other => input(other),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<String, Failure> {
    match out {
        Some(p) => {
            write(p, text)?;
            Ok(format!("wrote {}", p.display()))
        }
        None => Ok(text.trim_end().to_string()),
    }
}

fn run(cli: &Cli) -> Result<Done, Failure> {
    match &cli.command {
        Command::Validate { file } => {
            let f = load_bms(file)?;
            let canonical = serialize_bms(&f);
            if f.is_total() {
                match f.spec.into_space() {
                    Ok(_) => Ok(Done::new(
                        true,
                        "metric",
                        json!({ "total": true, "violations": [], "canonical": canonical }),
                    )),
                    Err(SpaceError::NotAMetric(report)) => {
                        let mut done = Done::new(
                            false,
                            format!("not a metric: {report}"),
                            json!({ "total": true, "violations": report.violations, "canonical": canonical }),
                        );
                        for v in &report.violations {
                            done = done.witness(v);
                        }
                        Ok(done)
                    }
                    Err(e) => Err(e.into()),
                }
            } else {
                match min_plus_complete(&f.spec) {
                    Ok(_) => Ok(Done::new(true, "partial, completable", json!({ "total": false, "completable": true, "canonical": canonical }))),
                    Err(e) => Ok(Done::new(false, e.to_string(), json!({ "total": false, "completable": false, "infeasible": e, "canonical": canonical }))
                        .witness(&e)),
                }
            }
        }
        Command::Complete { file, out } => {
            let f = load_bms(file)?;
            match min_plus_complete(&f.spec) {
                Ok(space) => {
                    let text = serialize_space(&space, f.nstar);
                    let shown = emit(out.as_deref(), &text)?;
                    Ok(Done::new(true, shown, json!({ "bms": text })))
                }
                Err(e) => {
                    Ok(Done::new(false, e.to_string(), json!({ "infeasible": e })).witness(&e))
                }
            }
        }
        Command::Amalgamate {
            left,
            right,
            base,
            nstar,
            out,
        } => {
            let (lf, rf) = (load_bms(left)?, load_bms(right)?);
            let nstar = nstar.or(lf.nstar).or(rf.nstar);
            let (l, r) = (lf.spec.into_space()?, rf.spec.into_space()?);
            let triple =
                AmalgamationTriple::over_shared_points(l, r, base, nstar).map_err(|e| match e {
                    amalgam_core::AmalgamError::Space(s) => Failure::from(s),
                    amalgam_core::AmalgamError::InvalidNstar { .. } => usage(e),
                    other => input(other),
                })?;
            let am = free_amalgam(&triple).map_err(input)?;
            let text = serialize_space(&am.space, Some(triple.nstar()));
            let shown = emit(out.as_deref(), &text)?;
            Ok(Done::new(
                true,
                shown,
                json!({ "bms": text, "left": am.left.map, "right": am.right.map, "nstar": triple.nstar() }),
            ))
        }
        Command::Indep { level, cfg } => {
            let c = load_config(cfg)?;
            let holds = indep_at_level(&c, *level);
            let window = if *level == 0 {
                Value::Null
            } else {
                json!(level_bounds(*level, c.space().bound(), c.nstar()).map_err(usage)?)
            };
            let mut done = Done::new(
                holds,
                format!(
                    "level {level}: {}",
                    if holds {
                        "independent"
                    } else {
                        "not independent"
                    }
                ),
                json!({ "level": level, "holds": holds, "window": window }),
            );
            if let Value::Array(w) = &window {
                let (lo, hi) = (
                    w[0].as_u64().unwrap() as Distance,
                    w[1].as_u64().unwrap() as Distance,
                );
                if let Ok(Some(p)) = c.below_witness(lo) {
                    done = done.witness(format!("below {lo}: {p}"));
                }
                if let Ok(Some(p)) = c.above_witness(hi) {
                    done = done.witness(format!("above {hi}: {p}"));
                }
            }
            Ok(done)
        }
        Command::Spread {
            level,
            count,
            cfg,
            out,
        } => {
            let c = load_config(cfg)?;
            let seq = spread_sequence(&c, *level, *count).map_err(input)?;
            let text = serialize_space(&seq.space, Some(seq.nstar));
            let mut shown = emit(out.as_deref(), &text)?;
            for (j, copy) in seq.copies.iter().enumerate() {
                shown.push_str(&format!("\n# B{j}: {}", copy.join(" ")));
            }
            Ok(Done::new(
                true,
                shown,
                json!({ "bms": text, "copies": seq.copies }),
            ))
        }
        Command::Ladder { k, count, cfg } => {
            let c = load_config(cfg)?;
            let report = ladder_check(&c, *k, *count).map_err(input)?;
            let text = report
                .rungs
                .iter()
                .map(|r| {
                    format!(
                        "level {}: {} ({})",
                        r.level,
                        if r.passed { "pass" } else { "fail" },
                        r.detail
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let mut done = Done::new(
                report.passed(),
                text,
                serde_json::to_value(&report).unwrap(),
            );
            if let Some(r) = report.rungs.iter().find(|r| !r.passed) {
                done = done.witness(&r.detail);
            }
            Ok(done)
        }
        Command::DigraphCheck { file } => {
            let s =
                parse_dds(&read(file)?).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let report = dd_validate(&s);
            let mut done = Done::new(
                report.is_ok(),
                if report.is_ok() {
                    "consistent".into()
                } else {
                    format!("inconsistent: {report}")
                },
                json!({ "violations": report.violations, "canonical": serialize_dds(&s) }),
            );
            for v in &report.violations {
                done = done.witness(v);
            }
            Ok(done)
        }
        Command::DigraphRealize { file, out } => {
            let s =
                parse_dds(&read(file)?).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let r = dd_realize(&s).map_err(input)?;
            let edges = r.graph.edges();
            write(out, &serialize_edge_list(&edges))?;
            Ok(Done::new(
                true,
                format!(
                    "wrote {} ({} vertices, {} edges)",
                    out.display(),
                    r.graph.vertex_count(),
                    edges.len()
                ),
                json!({ "vertices": r.graph.vertex_count(), "edges": edges.len() }),
            ))
        }
        Command::OddgirthCheck { file, n } => {
            let text = read(file)?;
            let is_bms = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .find(|l| !l.is_empty())
                .is_some_and(|l| l.starts_with("bms"));
            if is_bms {
                let f = parse_bms(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
                match og_realize(&f.spec) {
                    Ok(g) => Ok(Done::new(
                        true,
                        format!(
                            "realized ({} vertices, {} edges)",
                            g.vertex_count(),
                            g.edges().len()
                        ),
                        json!({ "realized": true, "edges": g.edges() }),
                    )),
                    Err(e) => Ok(Done::new(
                        false,
                        format!("not realizable: {e}"),
                        json!({ "realized": false }),
                    )
                    .witness(e)),
                }
            } else {
                let n = n.ok_or_else(|| usage("an edge list needs --n"))?;
                let edges = parse_edge_list(&text)
                    .map_err(|e| usage(format!("{}: {e}", file.display())))?;
                let g = OddGirthGraph::from_edges(n, &edges).map_err(usage)?;
                let report = og_validate(&g);
                let mut done = Done::new(
                    report.is_ok(),
                    match report.violation() {
                        None => format!("no odd cycle of length <= {n}"),
                        Some(c) => format!("odd cycle of length {}: {}", c.len(), c.join(" ")),
                    },
                    serde_json::to_value(&report).unwrap(),
                );
                if let Some(c) = report.violation() {
                    done = done.witness(c.join(" "));
                }
                Ok(done)
            }
        }
        Command::SopDemo {
            n,
            graph,
            anchors,
            bound,
        } => {
            let cfg = DividingConfiguration::new(*n, &anchors[0], &anchors[1]).map_err(usage)?;
            let g: Digraph = match graph {
                Some(p) => {
                    let edges = parse_edge_list(&read(p)?)
                        .map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    Digraph::from_edges(&edges)
                }
                None => {
                    let b = bound.unwrap_or(cfg.cycle_length() as Distance);
                    sop_witness_graph(b).map_err(input)?
                }
            };
            match base_case_contradiction(&g, &cfg) {
                Ok(cert) => Ok(Done::new(
                    true,
                    format!(
                        "certified: no common witness among {} vertices, no cycle of length <= {}",
                        cert.vertices_checked,
                        cfg.cycle_length()
                    ),
                    serde_json::to_value(&cert).unwrap(),
                )),
                Err(SopError::WitnessCycle(w)) | Err(SopError::ShortCycle(w)) => Ok(Done::new(
                    false,
                    format!("cycle of length {}: {w}", w.len()),
                    json!({ "cycle": w.vertices, "length": w.len() }),
                )
                .witness(&w)),
                Err(e @ (SopError::UnknownVertex(_) | SopError::MissingAnchorEdge(..))) => {
                    Err(usage(e))
                }
                Err(e) => Err(input(e)),
            }
        }
        Command::Enumerate {
            points,
            n,
            count,
            max_points,
            max_bound,
        } => {
            let caps = EnumerationCaps {
                max_points: *max_points,
                max_bound: *max_bound,
            };
            let spaces = enumerate_spaces(*points, *n, caps)?;
            if *count {
                let total = spaces.count();
                return Ok(Done::new(
                    true,
                    total.to_string(),
                    json!({ "count": total }),
                ));
            }
            let texts: Vec<String> = spaces.map(|s| serialize_space(&s, None)).collect();
            Ok(Done::new(
                true,
                texts.join("\n"),
                json!({ "count": texts.len(), "spaces": texts }),
            ))
        }
        Command::Accept {
            suites,
            max_points,
            max_bound,
        } => {
            let names: Vec<String> = if suites.is_empty() {
                SUITES.iter().map(|s| s.to_string()).collect()
            } else {
                suites.clone()
            };
            let mut reports = Vec::new();
            for name in &names {
                let mut caps = SuiteCaps::for_suite(name)
                    .ok_or_else(|| usage(HarnessError::UnknownSuite(name.clone())))?;
                caps.max_points = max_points.unwrap_or(caps.max_points);
                caps.max_bound = max_bound.unwrap_or(caps.max_bound);
                reports.push(run_acceptance(name, caps).map_err(usage)?);
            }
            let pass = reports.iter().all(|r| r.passed());
            let mut text = Vec::new();
            let mut done_witnesses = Vec::new();
            for r in &reports {
                text.push(r.to_string());
                if cli.verbose {
                    for (k, v) in &r.tallies {
                        text.push(format!("  {k}: {v}"));
                    }
                }
                for c in &r.counterexamples {
                    text.push(format!("  counterexample: {c}"));
                    done_witnesses.push(format!("{}: {c}", r.suite));
                }
            }
            let mut done = Done::new(
                pass,
                text.join("\n"),
                serde_json::to_value(&reports).unwrap(),
            );
            done.witnesses = done_witnesses;
            Ok(done)
        }
    }
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Complete { .. } => "complete",
        Command::Amalgamate { .. } => "amalgamate",
        Command::Indep { .. } => "indep",
        Command::Spread { .. } => "spread",
        Command::Ladder { .. } => "ladder",
        Command::DigraphCheck { .. } => "digraph-check",
        Command::DigraphRealize { .. } => "digraph-realize",
        Command::OddgirthCheck { .. } => "oddgirth-check",
        Command::SopDemo { .. } => "sop-demo",
        Command::Enumerate { .. } => "enumerate",
        Command::Accept { .. } => "accept",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(&cli);
    let duration_ms = start.elapsed().as_millis();
    let (code, label) = match &outcome {
        Ok(d) if d.pass => (0, "pass"),
        Ok(_) => (1, "fail"),
        Err(Failure::Input(_)) => (1, "error"),
        Err(Failure::Usage(_)) => (2, "error"),
    };
    if cli.json {
        let mut report = json!({ "subcommand": name(&cli.command), "outcome": label, "duration_ms": duration_ms });
        match outcome {
            Ok(d) => {
                report["result"] = d.result;
                report["witnesses"] = json!(d.witnesses);
            }
            Err(Failure::Input(m) | Failure::Usage(m)) => {
                report["error"] = json!(m);
                report["witnesses"] = json!([]);
            }
        }
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        match outcome {
            Ok(d) => {
                if !d.text.is_empty() {
                    println!("{}", d.text);
                }
            }
            Err(Failure::Input(m)) => eprintln!("error: {m}"),
            Err(Failure::Usage(m)) => eprintln!("usage error: {m}"),
        }
    }
    ExitCode::from(code)
}
