//! Command-line surface. [`run`] returns the exit code and both output
//! streams so the binary and the tests share one code path.

use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pagid_core::adjustment::{gac, Gac, GacFail};
use pagid_core::expr::Expr;
use pagid_core::graph::mag_of_dag;
use pagid_core::ident_dag::{c_components, id_dag_with};
use pagid_core::ident_pag::{idp_with, CandidateOrder, IdOptions, Identification, Run};
use pagid_core::oracle::{equivalence_class, pag_of_class};
use pagid_core::structure::{cpc_components, dc_component, pc_component, pto};
use pagid_core::{MixedGraph, NodeSet};
use serde::Serialize;
use serde_json::json;

use crate::format::{node_list, parse, serialize, GraphFile};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_IDENTIFIED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "pagid", version, about = "Causal effect identification from partial ancestral graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Identify P_x(y) from a PAG.
    Idp(Query),
    /// Identify P_x(y) from a DAG with latent confounders.
    IdDag(Query),
    /// Decide the generalized adjustment criterion on a PAG or MAG.
    Gac(GacArgs),
    /// Print the partial topological order of a PAG or MAG.
    Pto(GraphArg),
    /// Print components: cpc-components of a PAG, c-components of a DAG.
    Components(ComponentArgs),
    /// Print the PAG of the equivalence class of a DAG's MAG.
    PagOfDag(PagOfDagArgs),
    /// Run the seeded verification pipeline.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Graph file.
    #[arg(long)]
    graph: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Args, Debug)]
struct Query {
    /// Graph file.
    #[arg(long)]
    graph: String,
    /// Treatment nodes, comma separated.
    #[arg(long)]
    treat: String,
    /// Outcome nodes, comma separated.
    #[arg(long)]
    outcome: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print a JSON envelope with verdict, expression, witness and timings.
    #[arg(long)]
    json: bool,
    /// Print every reduction step before the result.
    #[arg(long)]
    trace: bool,
    /// Try removal candidates in an order shuffled from this seed.
    #[arg(long)]
    shuffle: Option<u64>,
}

#[derive(Args, Debug)]
struct GacArgs {
    /// Graph file.
    #[arg(long)]
    graph: String,
    /// Treatment nodes, comma separated.
    #[arg(long)]
    treat: String,
    /// Outcome nodes, comma separated.
    #[arg(long)]
    outcome: String,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ComponentArgs {
    /// Graph file.
    #[arg(long)]
    graph: String,
    /// Also print the pc-component of these nodes.
    #[arg(long)]
    pc: Option<String>,
    /// Also print the dc-component of these nodes.
    #[arg(long)]
    dc: Option<String>,
}

#[derive(Args, Debug)]
struct PagOfDagArgs {
    /// Graph file.
    #[arg(long)]
    graph: String,
    /// Print the MAG instead of the PAG.
    #[arg(long)]
    mag: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// SCMs per DAG in numeric checks.
    #[arg(long, default_value_t = 5)]
    scms: u64,
    #[arg(long)]
    json: bool,
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(code: i32, stdout: String) -> Output {
        Output { code, stdout, stderr: String::new() }
    }

    fn error(message: impl std::fmt::Display) -> Output {
        Output { code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

type Res<T> = Result<T, String>;

/// Runs one command line; `args[0]` is the program name.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output::ok(EXIT_OK, text),
                _ => Output { code: EXIT_ERROR, stdout: String::new(), stderr: text },
            };
        }
    };
    let result = match cli.command {
        Command::Idp(q) => identify(&q, false),
        Command::IdDag(q) => identify(&q, true),
        Command::Gac(a) => adjustment(&a),
        Command::Pto(a) => order(&a),
        Command::Components(a) => components(&a),
        Command::PagOfDag(a) => pag_of_dag(&a),
        Command::Verify(a) => run_verify(&a),
    };
    result.unwrap_or_else(Output::error)
}

fn load(path: &str) -> Res<GraphFile> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    parse(&text).map_err(|e| format!("{path}: {e}"))
}

fn marked(f: &GraphFile, cmd: &str) -> Res<MixedGraph> {
    match f {
        GraphFile::Pag(p) => Ok(p.graph().clone()),
        GraphFile::Mag(m) => Ok(m.graph().clone()),
        GraphFile::Dag(_) => Err(format!("`{cmd}` needs a pag or mag file")),
    }
}

fn query_sets(treat: &str, outcome: &str) -> Res<(NodeSet, NodeSet)> {
    let (x, y) = (node_list(treat), node_list(outcome));
    if x.is_empty() || y.is_empty() {
        return Err("--treat and --outcome must each name at least one node".into());
    }
    Ok((x, y))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn render(e: &Expr, format: Format) -> String {
    match format {
        Format::Latex => e.to_latex(),
        _ => e.to_text(),
    }
}

fn identify(q: &Query, on_dag: bool) -> Res<Output> {
    let start = Instant::now();
    let file = load(&q.graph)?;
    let parse_ms = ms(start);
    let (x, y) = query_sets(&q.treat, &q.outcome)?;
    let opts = IdOptions { order: q.shuffle.map_or(CandidateOrder::Reverse, CandidateOrder::Shuffled) };
    let start = Instant::now();
    let run: Run = match (&file, on_dag) {
        (GraphFile::Dag(d), true) => id_dag_with(d, &x, &y, &opts),
        (GraphFile::Pag(p), false) => idp_with(p, &x, &y, &opts),
        (_, true) => return Err(format!("`id-dag` needs a dag file, got {}", file.kind().as_str())),
        (_, false) => return Err(format!("`idp` needs a pag file, got {}", file.kind().as_str())),
    }
    .map_err(|e| e.to_string())?;
    let identify_ms = ms(start);
    let code = if run.outcome.is_identified() { EXIT_OK } else { EXIT_NOT_IDENTIFIED };

    let mut out = String::new();
    if q.json {
        let envelope = match &run.outcome {
            Identification::Identified { expression } => json!({
                "verdict": "identified",
                "expression": render(expression, q.format),
                "timings": { "parse_ms": parse_ms, "identify_ms": identify_ms },
            }),
            Identification::NotIdentified { fail } => json!({
                "verdict": "not_identified",
                "witness": fail,
                "timings": { "parse_ms": parse_ms, "identify_ms": identify_ms },
            }),
        };
        out = to_json(&envelope)?;
        return Ok(Output::ok(code, out));
    }
    if q.format == Format::Json {
        out = to_json(&if q.trace { json!(run) } else { json!(run.outcome) })?;
        return Ok(Output::ok(code, out));
    }
    if q.trace {
        let _ = writeln!(out, "D = {}; components {}", run.d, list(&run.components));
        for s in &run.steps {
            let _ = writeln!(
                out,
                "Q[{}] from Q[{}] removing {}: {}",
                s.t.difference(&s.removed),
                s.t,
                s.removed,
                render(&s.q, q.format)
            );
        }
    }
    match &run.outcome {
        Identification::Identified { expression } => out.push_str(&render(expression, q.format)),
        Identification::NotIdentified { fail } => {
            let _ = write!(out, "not identifiable: {fail}");
        }
    }
    out.push('\n');
    Ok(Output::ok(code, out))
}

fn to_json<T: Serialize>(v: &T) -> Res<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| e.to_string())
}

fn list(sets: &[NodeSet]) -> String {
    sets.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn adjustment(a: &GacArgs) -> Res<Output> {
    let file = load(&a.graph)?;
    let g = marked(&file, "gac")?;
    let (x, y) = query_sets(&a.treat, &a.outcome)?;
    let verdict = gac(&g, &x, &y).map_err(|e| e.to_string())?;
    let code = if matches!(verdict, Gac::Adjust { .. }) { EXIT_OK } else { EXIT_NOT_IDENTIFIED };
    if a.json {
        return Ok(Output::ok(code, to_json(&verdict)?));
    }
    let text = match verdict {
        Gac::Adjust { set } => format!("adjustment set {set}\n"),
        Gac::Fail { fail: GacFail::NotAmenable { path } } => {
            format!("no adjustment: not amenable, path {} leaves x through an invisible edge\n", path.join(" "))
        }
        Gac::Fail { fail: GacFail::OpenPath { path, set } } => {
            format!("no adjustment: path {} is open given {set}\n", path.nodes.join(" "))
        }
    };
    Ok(Output::ok(code, text))
}

fn order(a: &GraphArg) -> Res<Output> {
    let file = load(&a.graph)?;
    let g = marked(&file, "pto")?;
    let o = pto(&g).map_err(|e| e.to_string())?;
    Ok(Output::ok(EXIT_OK, format!("{o}\n")))
}

fn components(a: &ComponentArgs) -> Res<Output> {
    let file = load(&a.graph)?;
    let mut out = String::new();
    match &file {
        GraphFile::Dag(d) => {
            let _ = writeln!(out, "c-components {}", list(&c_components(d)));
            if a.pc.is_some() || a.dc.is_some() {
                return Err("--pc and --dc need a pag or mag file".into());
            }
        }
        _ => {
            let g = file.graph();
            let _ = writeln!(out, "cpc-components {}", list(&cpc_components(g)));
            if let Some(s) = &a.pc {
                let _ = writeln!(out, "pc-component {}", pc_component(g, &node_list(s)).map_err(|e| e.to_string())?);
            }
            if let Some(s) = &a.dc {
                let _ = writeln!(out, "dc-component {}", dc_component(g, &node_list(s)).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(Output::ok(EXIT_OK, out))
}

fn pag_of_dag(a: &PagOfDagArgs) -> Res<Output> {
    let file = load(&a.graph)?;
    let GraphFile::Dag(d) = &file else {
        return Err(format!("`pag-of-dag` needs a dag file, got {}", file.kind().as_str()));
    };
    let mag = mag_of_dag(d);
    if a.mag {
        return Ok(Output::ok(EXIT_OK, serialize(&GraphFile::Mag(mag))));
    }
    let class = equivalence_class(&mag).map_err(|e| e.to_string())?;
    let pag = pag_of_class(&class).map_err(|e| e.to_string())?;
    Ok(Output::ok(EXIT_OK, serialize(&GraphFile::Pag(pag))))
}

fn run_verify(a: &VerifyArgs) -> Res<Output> {
    if a.runs == 0 {
        return Err("--runs must be positive".into());
    }
    let cfg = verify::Config { seed: a.seed, runs: a.runs, tol: a.tol, scms: a.scms, ..verify::Config::default() };
    let start = Instant::now();
    let report = verify::run(&cfg, |_, _| {}).map_err(|e| e.to_string())?;
    let code = if report.passed() { EXIT_OK } else { EXIT_NOT_IDENTIFIED };
    let stdout = if a.json { to_json(&report)? } else { format!("{report}\n") };
    Ok(Output { code, stdout, stderr: format!("elapsed {:.1}s\n", start.elapsed().as_secs_f64()) })
}
