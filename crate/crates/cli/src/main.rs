//! `medbounds`: bounds, derivation, simulation and feasibility checks from
//! the command line.
//!
//! Exit codes: 0 success, 1 a self-check failed (catalog/oracle containment
//! or a simulation violation), 2 bad input or configuration, 3 infeasible or
//! crossed bounds (the report is still printed), 4 a combination the catalog
//! does not cover.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use medbounds::catalog::{self, catalog_bounds, CatalogError};
use medbounds::counts::{estimate, parse_any};
use medbounds::feasibility::check_feasibility;
use medbounds::oracle::{oracle_bounds, OracleError};
use medbounds::par::Execution;
use medbounds::report::{self, round3};
use medbounds::sim::{run_property_suite, SuiteConfig, SuiteReport};
use medbounds::vertex::{derive, InsertionOrder, VertexOptions};
use medbounds::{
    AssumptionSet, BoundResult, BoundStatus, CausalParameter, Direction, Method, ObservedDistribution, SymbolicBound,
    SymbolicExpr,
};

#[derive(Parser)]
#[command(name = "medbounds", version, about = "Bounds on mediation effects in randomized trials with noncompliance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound parameters from a count table.
    Bounds(BoundsArgs),
    /// Derive the symbolic bound formula by vertex enumeration.
    Derive(DeriveArgs),
    /// Run the seeded property suite on simulated worlds.
    Simulate(SimulateArgs),
    /// Check which assumption sets the data are compatible with.
    Validate(ValidateArgs),
}

/// Assumption sets. Each `--assumptions` value is one set; the single flags
/// add one more set made of every flag given.
#[derive(Args, Debug, Default)]
struct AssumptionArgs {
    /// Assumption set such as `a4,a5` or `none`; repeat for several.
    #[arg(short = 's', long = "assumptions", value_name = "SET")]
    sets: Vec<AssumptionSet>,
    /// Monotone compliance, A(1) >= A(0).
    #[arg(long, visible_alias = "monotone-compliance")]
    a4: bool,
    /// Monotone mediator, M(1) >= M(0).
    #[arg(long, visible_alias = "monotone-mediator")]
    a5: bool,
    /// Outcome monotone in the mediator, Y(a,1) >= Y(a,0).
    #[arg(long, visible_alias = "monotone-outcome-mediator")]
    a6: bool,
    /// Outcome monotone in treatment, Y(1,m) >= Y(0,m).
    #[arg(long, visible_alias = "monotone-outcome-treatment")]
    a7: bool,
}

impl AssumptionArgs {
    /// Requested sets in display order; `default` when none were given.
    fn resolve(&self, default: impl FnOnce() -> Vec<AssumptionSet>) -> Vec<AssumptionSet> {
        let mut sets = self.sets.clone();
        if self.a4 || self.a5 || self.a6 || self.a7 {
            sets.push(AssumptionSet::from_flags(self.a4, self.a5, self.a6, self.a7));
        }
        if sets.is_empty() {
            sets = default();
        }
        sets.sort();
        sets.dedup();
        sets
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Catalog,
    Oracle,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Machine,
}

impl From<FormatArg> for report::Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => report::Format::Table,
            FormatArg::Machine => report::Format::Machine,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Lower,
    Upper,
    Both,
}

#[derive(Args)]
struct BoundsArgs {
    /// Count table: `z,a,m,y,count` or one subject per row with `z,a,m,y`.
    input: PathBuf,
    #[command(flatten)]
    assumptions: AssumptionArgs,
    /// Parameters such as `acme1,nde0`, or the groups `population`, `local`,
    /// `all`. Defaults to the four population parameters.
    #[arg(short, long = "parameters", value_name = "LIST", value_delimiter = ',')]
    parameters: Vec<String>,
    #[arg(short, long, value_enum, default_value_t = MethodArg::Catalog)]
    method: MethodArg,
    #[arg(short, long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Args)]
struct DeriveArgs {
    /// Parameter, e.g. `lacme1`.
    #[arg(short, long)]
    parameter: CausalParameter,
    #[command(flatten)]
    assumptions: AssumptionArgs,
    #[arg(short, long, value_enum, default_value_t = DirectionArg::Both)]
    direction: DirectionArg,
    /// Drop entries that never bind on the model's data space.
    #[arg(long)]
    envelope: bool,
    /// Insertion order for the double description: max-cutoff, min-cutoff, lex.
    #[arg(long, default_value = "max-cutoff")]
    order: InsertionOrder,
    #[arg(short, long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worlds per assumption set.
    #[arg(short, long, default_value_t = 100)]
    worlds: u64,
    #[command(flatten)]
    assumptions: AssumptionArgs,
    /// Skip comparing oracle intervals across nested sets.
    #[arg(long)]
    no_nesting: bool,
    /// Evaluate worlds on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(short, long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Args)]
struct ValidateArgs {
    input: PathBuf,
    #[command(flatten)]
    assumptions: AssumptionArgs,
    #[arg(short, long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

const OK: u8 = 0;
const SELF_CHECK: u8 = 1;
const USAGE: u8 = 2;
const INFEASIBLE: u8 = 3;
const UNCATALOGED: u8 = 4;

/// A run that stops before producing a report.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: USAGE, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bounds(args) => bounds(&args),
        Command::Derive(args) => run_derive(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Validate(args) => validate(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &PathBuf) -> Result<ObservedDistribution, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let counts = parse_any(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    estimate(&counts).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_parameters(raw: &[String]) -> Result<Vec<CausalParameter>, Failure> {
    let mut out = Vec::new();
    for token in raw.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
        match token.to_ascii_lowercase().as_str() {
            "population" => out.extend(CausalParameter::POPULATION),
            "local" => out.extend(CausalParameter::LOCAL),
            "all" => out.extend(CausalParameter::POPULATION.into_iter().chain(CausalParameter::LOCAL)),
            _ => out.push(token.parse().map_err(|e| usage(format!("{e}")))?),
        }
    }
    if out.is_empty() {
        out.extend(CausalParameter::POPULATION);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn require_a4(parameters: &[CausalParameter], sets: &[AssumptionSet]) -> Result<(), Failure> {
    for p in parameters.iter().filter(|p| p.is_local()) {
        if let Some(s) = sets.iter().find(|s| !s.monotone_treatment_assignment) {
            return Err(usage(format!("{p} is a local parameter and needs a4; set `{s}` lacks it")));
        }
    }
    Ok(())
}

enum Evaluated {
    Done(BoundResult),
    Uncataloged(String),
}

fn evaluate_one(
    observed: &ObservedDistribution,
    parameter: CausalParameter,
    assumptions: AssumptionSet,
    method: Method,
) -> Result<Evaluated, Failure> {
    let result = match method {
        Method::Catalog => catalog_bounds(observed, parameter, assumptions),
        Method::Oracle => oracle_bounds(observed, parameter, assumptions).map_err(|e| match e {
            OracleError::Catalog(c) => c,
            OracleError::Lp(lp) => CatalogError::NoCompliers(format!("internal LP failure: {lp}")),
        }),
    };
    match result {
        Ok(r) => Ok(Evaluated::Done(r)),
        // No compliers under a4 means the data contradict it.
        Err(CatalogError::NoCompliers(_)) => Ok(Evaluated::Done(BoundResult::infeasible(parameter, assumptions, method))),
        Err(e @ CatalogError::Uncataloged { .. }) => Ok(Evaluated::Uncataloged(e.to_string())),
        Err(e) => Err(Failure { code: USAGE, message: e.to_string() }),
    }
}

/// Catalog/oracle disagreements that should be impossible.
fn self_check(results: &[BoundResult]) -> Vec<String> {
    let mut by_key: BTreeMap<(CausalParameter, AssumptionSet), [Option<&BoundResult>; 2]> = BTreeMap::new();
    for r in results {
        let slot = usize::from(r.method == Method::Oracle);
        by_key.entry((r.parameter, r.assumptions)).or_default()[slot] = Some(r);
    }
    let mut problems = Vec::new();
    for ((p, s), pair) in by_key {
        let [Some(cat), Some(ora)] = pair else { continue };
        if ora.status != BoundStatus::Ok || cat.status != BoundStatus::Ok {
            continue;
        }
        if !ora.within(cat) {
            problems.push(format!("{p} under {s}: oracle interval is not inside the catalog interval"));
        } else if s.monotone_treatment_assignment && !ora.same_interval(cat) {
            problems.push(format!("{p} under {s}: catalog and oracle differ where the formulas are sharp"));
        }
    }
    problems
}

fn bounds(args: &BoundsArgs) -> Result<u8, Failure> {
    let parameters = parse_parameters(&args.parameters)?;
    let default_sets =
        if parameters.iter().any(|p| p.is_local()) { catalog::local_combinations } else { catalog::population_combinations };
    let sets = args.assumptions.resolve(default_sets);
    require_a4(&parameters, &sets)?;
    let observed = load(&args.input)?;
    let methods: &[Method] = match args.method {
        MethodArg::Catalog => &[Method::Catalog],
        MethodArg::Oracle => &[Method::Oracle],
        MethodArg::Both => &[Method::Catalog, Method::Oracle],
    };

    let mut jobs = Vec::new();
    for &p in &parameters {
        for &s in &sets {
            for &m in methods {
                jobs.push((p, s, m));
            }
        }
    }
    let evaluated = Execution::default().map(&jobs, |&(p, s, m)| evaluate_one(&observed, p, s, m));

    let mut results = Vec::new();
    let mut uncataloged = Vec::new();
    for e in evaluated {
        match e? {
            Evaluated::Done(r) => results.push(r),
            Evaluated::Uncataloged(msg) => uncataloged.push(msg),
        }
    }
    results.sort_by_key(|r| (r.parameter, r.assumptions, r.method));

    if methods.contains(&Method::Catalog) && sets.contains(&AssumptionSet::NONE) {
        if parameters.iter().any(|p| matches!(p, CausalParameter::Nde(_))) {
            eprintln!(
                "warning: under `none` the catalog uses the a4 formulas, and for NDE these can be narrower than \
                 the sharp bounds without a4; use --method oracle"
            );
        } else if !parameters.iter().all(|p| p.is_local()) && observed.compliance_share() < medbounds::int(0) {
            eprintln!(
                "warning: under `none` the catalog uses the a4 formulas, and these data have \
                 P(A=1|Z=1) < P(A=1|Z=0); use --method oracle"
            );
        }
    }
    for msg in &uncataloged {
        eprintln!("error: {msg}");
    }
    print!("{}", report::render(&results, args.format.into()));

    let problems = self_check(&results);
    for p in &problems {
        eprintln!("self-check failed: {p}");
    }
    let flagged = results.iter().any(|r| r.status != BoundStatus::Ok);
    Ok(if !problems.is_empty() {
        SELF_CHECK
    } else if !uncataloged.is_empty() {
        UNCATALOGED
    } else if flagged {
        INFEASIBLE
    } else {
        OK
    })
}

fn sorted_entries(bound: &SymbolicBound) -> Vec<SymbolicExpr> {
    let mut entries = bound.entries.clone();
    entries.sort_by_key(ToString::to_string);
    entries
}

fn expr_json(e: &SymbolicExpr) -> serde_json::Value {
    let coefficients: BTreeMap<String, i64> = e.coefficients.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    json!({ "text": e.to_string(), "constant": e.constant, "coefficients": coefficients })
}

fn run_derive(args: &DeriveArgs) -> Result<u8, Failure> {
    let sets = args.assumptions.resolve(|| vec![AssumptionSet::NONE]);
    let [assumptions] = sets[..] else {
        return Err(usage("derive takes exactly one assumption set"));
    };
    require_a4(&[args.parameter], &sets)?;
    let directions: &[Direction] = match args.direction {
        DirectionArg::Lower => &[Direction::Lower],
        DirectionArg::Upper => &[Direction::Upper],
        DirectionArg::Both => &[Direction::Lower, Direction::Upper],
    };
    let options = VertexOptions { order: args.order, envelope: args.envelope, ..VertexOptions::new() };
    let cataloged = catalog::lookup(args.parameter, assumptions).ok();

    let mut text = String::new();
    let mut documents = Vec::new();
    for &direction in directions {
        let d = derive(args.parameter, assumptions, direction, &options).map_err(|e| usage(e.to_string()))?;
        let shown = d.envelope.as_ref().unwrap_or(&d.full);
        let entries = sorted_entries(shown);
        let agreement = cataloged.map(|f| f.bound(direction).same_entries(shown));
        let op = if direction == Direction::Lower { "max" } else { "min" };
        let _ = writeln!(text, "{} under {}, {direction}: {op} of {} entries", args.parameter, assumptions, entries.len());
        for e in &entries {
            let _ = writeln!(text, "  {e}");
        }
        let aliased = cataloged.is_some_and(|f| f.assumptions != assumptions);
        let note = match (agreement, aliased) {
            (Some(true), false) => "catalog: same entries",
            (Some(false), false) => "catalog: entries differ",
            (Some(true), true) => "catalog (a4 formulas): same entries",
            (Some(false), true) => "catalog (a4 formulas): entries differ",
            (None, _) => "catalog: not cataloged",
        };
        let _ = writeln!(text, "  # {note}; {} vertices, peak {} rays", d.stats.vertices, d.stats.peak_rays);
        documents.push(json!({
            "direction": direction.to_string(),
            "entries": entries.iter().map(expr_json).collect::<Vec<_>>(),
            "envelope": args.envelope,
            "vertices": d.stats.vertices,
            "inequalities": d.stats.inequalities,
            "after_pruning": d.stats.after_pruning,
            "peak_rays": d.stats.peak_rays,
            "matches_catalog": agreement,
        }));
    }
    match args.format {
        FormatArg::Table => print!("{text}"),
        FormatArg::Machine => {
            let doc = json!({
                "parameter": args.parameter.to_string(),
                "assumptions": assumptions.to_string(),
                "bounds": documents,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }
    Ok(OK)
}

fn suite_table(report: &SuiteReport) -> String {
    let mut out = format!("seed {}, {} worlds per set\n", report.seed, report.worlds_per_combo);
    for c in &report.combos {
        let _ = writeln!(out, "{:<12} checks {:>6}  violations {}", c.assumptions.to_string(), c.checks, c.violations);
    }
    for v in &report.violations {
        let param = v.parameter.map_or_else(|| "-".to_string(), |p| p.to_string());
        let _ = writeln!(out, "\nviolation {:?} {} world {} {}: {}", v.check, v.assumptions, v.world, param, v.detail);
        let _ = writeln!(out, "  latent {}", v.latent.join(" "));
    }
    out
}

fn simulate(args: &SimulateArgs) -> Result<u8, Failure> {
    let combos = args.assumptions.resolve(catalog::population_combinations);
    let mut config = SuiteConfig::new(combos, args.worlds, args.seed);
    config.nesting = !args.no_nesting;
    if args.sequential {
        config.execution = Execution::Sequential;
    }
    let report = run_property_suite(&config);
    match args.format {
        FormatArg::Table => print!("{}", suite_table(&report)),
        FormatArg::Machine => println!("{}", serde_json::to_string_pretty(&report).expect("json")),
    }
    Ok(if report.passed() { OK } else { SELF_CHECK })
}

fn validate(args: &ValidateArgs) -> Result<u8, Failure> {
    let sets = args.assumptions.resolve(AssumptionSet::all);
    let observed = load(&args.input)?;
    let mut reports = Vec::new();
    for s in sets {
        reports.push(check_feasibility(&observed, s).map_err(|e| usage(format!("internal LP failure: {e}")))?);
    }
    match args.format {
        FormatArg::Table => {
            let delta = observed.compliance_share();
            println!("compliance share {} ({})", delta, round3(&delta));
            for r in &reports {
                let verdict = if r.feasible { "feasible" } else { "infeasible" };
                println!("{:<12} {verdict}", r.assumptions.to_string());
            }
        }
        FormatArg::Machine => println!("{}", serde_json::to_string_pretty(&reports).expect("json")),
    }
    Ok(if reports.iter().all(|r| r.feasible) { OK } else { INFEASIBLE })
}
