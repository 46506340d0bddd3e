//! Command-line front end. Each subcommand returns a [`Report`] and an exit
//! code; `main` only prints and exits.
//!
//! Exit codes: 0 success, 1 a negative or failed result, 2 an input that
//! violates a precondition, 3 an I/O or format error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::colouring::{find_equitable, synth_instance, Colouring, ColouringError, EquitableSearch};
use crate::graph::{Graph, GraphError};
use crate::oracle::{brute_force_decompose, verify_decomposition, OracleLimits, OracleOutcome};
use crate::pipeline::{decompose, Outcome, PipelineConfig};
use crate::pseudo::{choose_c, parse_copies, write_copies, BladeMode, ConflictTable, DegreeTable, Rational};
use crate::repair::SwitchScope;
use crate::report::{
    dense_records, failure_records, instance_record, stage_record, violation_records, Record, Report,
};
use crate::tree::LabelledTree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "treedecomp", version, about = "Decompose bipartite graphs into copies of a tree")]
pub struct Cli {
    /// Print the report as JSON instead of key=value lines.
    #[arg(long, global = true)]
    pub json: bool,
    /// Add wall-clock timings to the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a planted instance: graph, colouring and decomposition.
    Gen(GenArgs),
    /// Search for an equitable colouring.
    Colour(ColourArgs),
    /// Run the full pipeline.
    Decompose(DecomposeArgs),
    /// Check a decomposition file.
    Verify(VerifyArgs),
    /// Exhaustive decomposition search for small graphs.
    Oracle(OracleArgs),
    /// Conflict table, goodness histogram and connectivity of a decomposition.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct Inputs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub tree: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub copies: usize,
    #[arg(long)]
    pub a_pool: usize,
    #[arg(long)]
    pub b_pool: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives graph.txt, tree.txt, colouring.txt, planted.txt.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ColourArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Search node budget.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// One blade per colour class.
    Fallback,
    /// Blades of size c and c - 1 with the minimum colour-degree requirement.
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SwitchArg {
    BadOnly,
    All,
}

/// Degree-bound factor; `None` when the bound is off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Relax(pub Option<Rational>);

/// `off`, an integer, or a fraction `p/q`.
pub fn parse_relax(s: &str) -> Result<Relax, String> {
    if s == "off" {
        return Ok(Relax(None));
    }
    parse_ratio(s).map(|r| Relax(Some(r)))
}

pub fn parse_ratio(s: &str) -> Result<Rational, String> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: u64 = n.trim().parse().map_err(|_| format!("bad number {s}"))?;
    let d: u64 = d.trim().parse().map_err(|_| format!("bad number {s}"))?;
    if d == 0 {
        return Err(format!("zero denominator in {s}"));
    }
    Ok(Rational::new(n, d))
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub colouring: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Fallback)]
    pub mode: ModeArg,
    /// Blade size for `--mode paper`; computed from eps and delta if absent.
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long = "switch", value_enum, default_value_t = SwitchArg::BadOnly)]
    pub switch: SwitchArg,
    /// Factor on the matching degree bound, or `off`.
    #[arg(long, default_value = "off", value_parser = parse_relax)]
    pub relax: Relax,
    /// Node budget for the colouring search.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    /// Reseeds per failing repair stage.
    #[arg(long, default_value_t = 8)]
    pub retries: usize,
    /// Pseudo-decompositions drawn while looking for a dense one.
    #[arg(long, default_value_t = 64)]
    pub dense_attempts: usize,
    #[arg(long, default_value = "1/2", value_parser = parse_ratio)]
    pub eps: Rational,
    #[arg(long, default_value = "1", value_parser = parse_ratio)]
    pub delta: Rational,
    /// Fresh pseudo-decompositions tried before reporting failure.
    #[arg(long, default_value_t = 4)]
    pub rounds: usize,
    /// Keep repaired copies in H until the last stage.
    #[arg(long)]
    pub no_reclassify: bool,
    /// Where to write the decomposition.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub decomposition: PathBuf,
    /// Also require every copy to respect this colouring.
    #[arg(long)]
    pub colouring: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = 50_000_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 24)]
    pub max_edges: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub decomposition: PathBuf,
}

#[derive(Debug)]
pub struct CmdOutput {
    pub report: Report,
    pub code: i32,
}

struct Fail(CmdOutput);

impl Fail {
    fn new(code: i32, kind: &str, message: impl Into<String>) -> Fail {
        let message = message.into();
        let mut report = Report::default();
        report.push(Record::new("error").field("kind", kind).field("message", &message));
        if code == EXIT_INFEASIBLE {
            report.push(
                Record::new("outcome")
                    .field("status", "INFEASIBLE_INPUT")
                    .field("reason", message),
            );
        }
        Fail(CmdOutput { report, code })
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path)
        .map_err(|e| Fail::new(EXIT_IO, "io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| Fail::new(EXIT_IO, "io", format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Fail> {
    Graph::parse(&read(path)?).map_err(|e| match e {
        GraphError::NotBipartite { .. } => Fail::new(
            EXIT_INFEASIBLE,
            "infeasible_input",
            format!("{}: {e}", path.display()),
        ),
        e => Fail::new(EXIT_IO, "format", format!("{}: {e}", path.display())),
    })
}

fn load_tree(path: &Path) -> Result<LabelledTree, Fail> {
    LabelledTree::parse(&read(path)?)
        .map_err(|e| Fail::new(EXIT_IO, "format", format!("{}: {e}", path.display())))
}

fn load_inputs(inputs: &Inputs) -> Result<(Graph, LabelledTree), Fail> {
    Ok((load_graph(&inputs.graph)?, load_tree(&inputs.tree)?))
}

fn load_colouring(g: &Graph, tree: &LabelledTree, path: &Path) -> Result<Colouring, Fail> {
    Colouring::parse(g, &read(path)?, tree.edge_count())
        .map_err(|e| Fail::new(EXIT_IO, "format", format!("{}: {e}", path.display())))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> CmdOutput {
    let start = Instant::now();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Colour(a) => cmd_colour(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Stats(a) => cmd_stats(a),
    };
    let mut out = result.unwrap_or_else(|Fail(o)| o);
    if cli.timings {
        out.report
            .push(Record::new("timings").field("total_ms", start.elapsed().as_millis()));
    }
    out
}

fn done(report: Report, code: i32) -> Result<CmdOutput, Fail> {
    Ok(CmdOutput { report, code })
}

fn cmd_gen(a: &GenArgs) -> Result<CmdOutput, Fail> {
    let tree = load_tree(&a.tree)?;
    let inst = match synth_instance(&tree, a.copies, a.a_pool, a.b_pool, a.seed) {
        Ok(inst) => inst,
        Err(e @ (ColouringError::EmbeddingFailed { .. } | ColouringError::NoCopies)) => {
            return Err(Fail::new(EXIT_INFEASIBLE, "infeasible_input", e.to_string()))
        }
        Err(e) => return Err(Fail::new(EXIT_FAILED, "generator", e.to_string())),
    };
    fs::create_dir_all(&a.out)
        .map_err(|e| Fail::new(EXIT_IO, "io", format!("{}: {e}", a.out.display())))?;
    write(&a.out.join("graph.txt"), &inst.graph.to_text())?;
    write(&a.out.join("tree.txt"), &tree.to_text())?;
    write(&a.out.join("colouring.txt"), &inst.colouring.to_text(&inst.graph))?;
    write(&a.out.join("planted.txt"), &write_copies(&inst.graph, &inst.planted))?;
    let mut report = Report::default();
    report.push(instance_record(&inst.graph, &tree));
    report.push(
        Record::new("gen")
            .field("copies", a.copies)
            .field("seed", a.seed)
            .field("out", a.out.display()),
    );
    done(report, EXIT_OK)
}

fn cmd_colour(a: &ColourArgs) -> Result<CmdOutput, Fail> {
    let (g, tree) = load_inputs(&a.inputs)?;
    let mut report = Report::default();
    report.push(instance_record(&g, &tree));
    let code = match find_equitable(&g, &tree, a.budget) {
        EquitableSearch::Found(col) => {
            write(&a.out, &col.to_text(&g))?;
            report.push(Record::new("colour").field("status", "SAT").field("out", a.out.display()));
            EXIT_OK
        }
        EquitableSearch::Unsat => {
            report.push(Record::new("colour").field("status", "UNSAT"));
            EXIT_FAILED
        }
        EquitableSearch::BudgetExhausted { nodes } => {
            report.push(Record::new("colour").field("status", "BUDGET").field("nodes", nodes));
            EXIT_FAILED
        }
    };
    done(report, code)
}

fn blade_mode(a: &DecomposeArgs, m: usize) -> Result<BladeMode, Fail> {
    match a.mode {
        ModeArg::Fallback => Ok(BladeMode::Whole),
        ModeArg::Paper => {
            let c = match a.c {
                Some(c) => c,
                None => {
                    let big = |r: Rational| {
                        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
                    };
                    let c = choose_c(m as u64, &big(a.eps), &big(a.delta)).map_err(|e| {
                        Fail::new(EXIT_INFEASIBLE, "infeasible_input", e.to_string())
                    })?;
                    c.to_usize().ok_or_else(|| {
                        Fail::new(
                            EXIT_INFEASIBLE,
                            "infeasible_input",
                            format!("blade size c = {c} does not fit a machine word"),
                        )
                    })?
                }
            };
            Ok(BladeMode::Sized {
                c,
                require_min_degree: true,
            })
        }
    }
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<CmdOutput, Fail> {
    let (g, tree) = load_inputs(&a.inputs)?;
    let m = tree.edge_count();
    let col = match &a.colouring {
        Some(p) => Some(load_colouring(&g, &tree, p)?),
        None => None,
    };
    let mut report = Report::default();
    report.push(instance_record(&g, &tree));
    let mode = match blade_mode(a, m) {
        Ok(mode) => mode,
        Err(Fail(mut o)) => {
            report.extend(o.report.records);
            o.report = report;
            return Err(Fail(o));
        }
    };
    let cfg = PipelineConfig {
        seed: a.seed,
        mode,
        dense_eps: a.eps,
        dense_delta: a.delta,
        dense_attempts: a.dense_attempts,
        colour_budget: a.budget,
        relax: a.relax.0,
        scope: match a.switch {
            SwitchArg::BadOnly => SwitchScope::BadOnly,
            SwitchArg::All => SwitchScope::All,
        },
        reclassify: !a.no_reclassify,
        stage_retries: a.retries,
        rounds: a.rounds,
        ..PipelineConfig::default()
    };
    report.push(
        Record::new("config")
            .field("seed", a.seed)
            .field("mode", a.mode.to_possible_value().expect("not skipped").get_name())
            .field("switch", a.switch.to_possible_value().expect("not skipped").get_name())
            .field("relax", a.relax.0.map_or_else(|| "off".to_string(), |r| r.to_string()))
            .field("reclassify", !a.no_reclassify),
    );
    let outcome = decompose(&g, &tree, col.as_ref(), &cfg);
    let code = match &outcome {
        Outcome::Decomposed(d) => {
            report.extend(dense_records(&g, &d.dense));
            report.extend(d.stages.iter().map(stage_record));
            let violations = verify_decomposition(&g, &tree, &d.decomposition.copies, None);
            report.push(
                Record::new("verify")
                    .field("status", if violations.is_empty() { "ok" } else { "violations" })
                    .field("count", violations.len()),
            );
            if let Some(out) = &a.out {
                write(out, &d.decomposition.to_text(&g))?;
            }
            report.push(
                Record::new("outcome")
                    .field("status", outcome.status())
                    .field("copies", d.decomposition.len())
                    .field("dense_attempts", d.dense_attempts)
                    .field("round", d.round),
            );
            EXIT_OK
        }
        Outcome::Failed { dense, failure } => {
            if let Some(dense) = dense {
                report.extend(dense_records(&g, dense));
            }
            report.extend(failure_records(&g, failure));
            report.push(Record::new("outcome").field("status", outcome.status()));
            EXIT_FAILED
        }
        Outcome::InfeasibleInput { reason } => {
            report.push(
                Record::new("outcome")
                    .field("status", outcome.status())
                    .field("reason", reason),
            );
            EXIT_INFEASIBLE
        }
    };
    done(report, code)
}

fn load_copies(g: &Graph, tree: &LabelledTree, path: &Path) -> Result<Vec<crate::pseudo::PseudoCopy>, Fail> {
    parse_copies(g, tree.edge_count(), &read(path)?)
        .map_err(|e| Fail::new(EXIT_IO, "format", format!("{}: {e}", path.display())))
}

fn cmd_verify(a: &VerifyArgs) -> Result<CmdOutput, Fail> {
    let (g, tree) = load_inputs(&a.inputs)?;
    let copies = load_copies(&g, &tree, &a.decomposition)?;
    let col = match &a.colouring {
        Some(p) => Some(load_colouring(&g, &tree, p)?),
        None => None,
    };
    let violations = verify_decomposition(&g, &tree, &copies, col.as_ref());
    let mut report = Report::default();
    report.push(instance_record(&g, &tree));
    report.extend(violation_records(&violations));
    report.push(
        Record::new("verify")
            .field("status", if violations.is_empty() { "ok" } else { "violations" })
            .field("copies", copies.len())
            .field("count", violations.len()),
    );
    done(report, if violations.is_empty() { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_oracle(a: &OracleArgs) -> Result<CmdOutput, Fail> {
    let (g, tree) = load_inputs(&a.inputs)?;
    let limits = OracleLimits {
        max_edges: a.max_edges,
        node_budget: a.budget,
    };
    let mut report = Report::default();
    report.push(instance_record(&g, &tree));
    let code = match brute_force_decompose(&g, &tree, limits) {
        OracleOutcome::Found(copies) => {
            if let Some(out) = &a.out {
                write(out, &write_copies(&g, &copies))?;
            }
            report.push(Record::new("oracle").field("status", "EXISTS").field("copies", copies.len()));
            EXIT_OK
        }
        OracleOutcome::NoDecomposition => {
            report.push(Record::new("oracle").field("status", "NONE"));
            EXIT_FAILED
        }
        OracleOutcome::BudgetExhausted { nodes } => {
            report.push(Record::new("oracle").field("status", "BUDGET").field("nodes", nodes));
            EXIT_FAILED
        }
        OracleOutcome::TooLarge { edges, max_edges } => {
            report.push(
                Record::new("oracle")
                    .field("status", "TOO_LARGE")
                    .field("edges", edges)
                    .field("max_edges", max_edges),
            );
            EXIT_INFEASIBLE
        }
    };
    done(report, code)
}

fn cmd_stats(a: &StatsArgs) -> Result<CmdOutput, Fail> {
    let (g, tree) = load_inputs(&a.inputs)?;
    let copies = load_copies(&g, &tree, &a.decomposition)?;
    let m = tree.edge_count();
    let mut report = Report::default();
    report.push(instance_record(&g, &tree));
    let degrees = DegreeTable::new(g.vertex_count(), m, &copies);
    let conf = ConflictTable::new(m, &copies);
    for (v, t, r) in conf.entries() {
        report.push(
            Record::new("conf")
                .field("vertex", g.name(v))
                .field("t", t)
                .field("d", degrees.get(v, t))
                .field("value", r),
        );
    }
    report.push(Record::new("conf_global").field("value", conf.global()));
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &copies {
        *hist.entry(c.goodness()).or_default() += 1;
    }
    for (k, n) in hist {
        report.push(Record::new("goodness").field("value", k).field("count", n));
    }
    done(report, EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relax_values() {
        assert_eq!(parse_relax("off"), Ok(Relax(None)));
        assert_eq!(parse_relax("3"), Ok(Relax(Some(Rational::from_integer(3)))));
        assert_eq!(parse_relax("3/2"), Ok(Relax(Some(Rational::new(3, 2)))));
        assert!(parse_relax("1/0").is_err());
        assert!(parse_relax("x").is_err());
    }

    #[test]
    fn command_line_parses() {
        let cli = Cli::try_parse_from([
            "treedecomp", "decompose", "--graph", "g.txt", "--tree", "t.txt", "--seed", "5",
            "--switch", "all", "--relax", "3", "--mode", "paper", "--c", "4", "--json",
        ])
        .unwrap();
        match cli.command {
            Command::Decompose(a) => {
                assert_eq!(a.seed, 5);
                assert_eq!(a.switch, SwitchArg::All);
                assert_eq!(a.mode, ModeArg::Paper);
                assert_eq!(a.c, Some(4));
                assert_eq!(a.relax, Relax(Some(Rational::from_integer(3))));
            }
            other => panic!("parsed as {other:?}"),
        }
        assert!(cli.json);
    }
}
