//! `riskcal` command-line front end. Every run prints one JSON document.

mod catalog;

use std::fs;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use riskcal::envelopes::{verify_envelope, EnvelopeOptions, MemberKind};
use riskcal::infconv::{infconv_bruteforce, infconv_comonotone, BruteForceOptions, ComonotoneOptions, InfConvResult};
use riskcal::measures::{parse_measure, LambdaFn};
use riskcal::portfolio::{optimize_portfolio, ScenarioMatrix};
use riskcal::prob::ScenarioTable;
use riskcal::replicate::{run_all, run_suite};
use riskcal::{check_axiom, Axiom, CheckConfig, RiskError, Rv};

use catalog::{pick, read_json, Kind, MeasureArgs, ModeArg, VariableArgs};

/// Version tag stamped on every report; matches the files under `schemas/`.
const SCHEMA_VERSION: &str = "v1";

#[derive(Parser)]
#[command(name = "riskcal", version, about = "Cash-subadditive risk measures on finite scenario spaces")]
struct Cli {
    /// Write the JSON report to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a risk measure on one scenario column.
    Measure(MeasureCmd),
    /// Run the seeded axiom checker.
    Check(CheckCmd),
    /// Verify a lower-envelope representation on an anchor family.
    Envelope(EnvelopeCmd),
    /// Inf-convolution of several measures at one position.
    Infconv(InfconvCmd),
    /// Expected-loss portfolio under a lambda-quantile constraint.
    Portfolio(PortfolioCmd),
    /// Run a named replication suite, or `all`.
    Replicate(ReplicateCmd),
}

#[derive(Args)]
struct MeasureCmd {
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    variable: VariableArgs,
}

#[derive(Args)]
struct CheckCmd {
    #[arg(long)]
    axiom: Axiom,
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Outcome counts to sample spaces from, comma separated.
    #[arg(long, value_delimiter = ',')]
    space_sizes: Option<Vec<usize>>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Check a single supplied case: a case or witness JSON file (replays a witness).
    #[arg(long)]
    case: Option<PathBuf>,
}

#[derive(Args)]
struct EnvelopeCmd {
    /// rho_Z, tilde_rho_Z, psi_Z_ssd, phi_Z_fsd or monetary_acceptance.
    #[arg(long)]
    kind: MemberKind,
    /// Base measure shorthand, as for --measure elsewhere.
    #[arg(long, conflicts_with_all = ["base_kind", "lambda", "params"])]
    base_measure: Option<String>,
    /// Structured base measure kind; parameters come from --lambda or --params.
    #[arg(long, value_enum)]
    base_kind: Option<Kind>,
    #[arg(long)]
    lambda: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "primal")]
    mode: ModeArg,
    /// Anchor CSV: every column is an anchor variable.
    #[arg(long)]
    anchors: PathBuf,
    /// Anchor column holding X.
    #[arg(long)]
    var: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials for the precondition checks on the base measure.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Also spot-check each member for its expected axioms.
    #[arg(long)]
    check_members: bool,
}

#[derive(Args)]
struct InfconvCmd {
    /// Comma-separated measure shorthands.
    #[arg(long, value_delimiter = ',', required = true)]
    measures: Vec<String>,
    #[command(flatten)]
    variable: VariableArgs,
    /// Grid steps per unit of max(|X|, 1).
    #[arg(long, default_value_t = 40)]
    grid: usize,
    /// Search comonotonic allocations only.
    #[arg(long)]
    comonotone: bool,
    /// Increment split resolution for the comonotone search.
    #[arg(long, default_value_t = 40, requires = "comonotone")]
    resolution: usize,
    /// Skip the divergence probes of the brute-force search.
    #[arg(long, conflicts_with = "comonotone")]
    no_divergence_check: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PortfolioCmd {
    /// Loss CSV: `prob` followed by one column per asset.
    #[arg(long)]
    scenarios: PathBuf,
    #[arg(long)]
    lambda: PathBuf,
    /// Constraint level z.
    #[arg(long, allow_hyphen_values = true)]
    level: f64,
    #[arg(long, default_value_t = 20)]
    resolution: usize,
}

#[derive(Args)]
struct ReplicateCmd {
    suite: String,
    #[arg(long, default_value_t = 20_240_611)]
    seed: u64,
}

/// A finished report and whether it represents a failed check.
struct Report {
    body: Value,
    failed: bool,
}

fn with_header(command: &str, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("command".into(), json!(command));
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    match body {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

fn measure(cmd: &MeasureCmd) -> riskcal::Result<Report> {
    let (name, x) = cmd.variable.load()?;
    let rho = cmd.measure.build(Some(x.space()))?;
    let value = rho.evaluate(&x)?;
    let body = json!({"measure": rho.name(), "variable": name, "value": value});
    Ok(Report { body: with_header("measure", body), failed: false })
}

fn load_case(path: &Path) -> riskcal::Result<riskcal::axioms::Case> {
    let mut v: Value = read_json(path)?;
    if let Some(w) = v.get("witness") {
        if w.is_null() {
            return Err(RiskError::Input("the report has no witness to replay".into()));
        }
        v = w.clone();
    }
    let case = v.get("case").cloned().unwrap_or(v);
    Ok(serde_json::from_value(case)?)
}

fn check(cmd: &CheckCmd) -> riskcal::Result<Report> {
    let mut cfg = CheckConfig::default().with_seed(cmd.seed).with_trials(cmd.trials);
    if let Some(sizes) = &cmd.space_sizes {
        cfg.space_sizes = sizes.clone();
    }
    if let Some(t) = cmd.tolerance {
        cfg.tolerance = t;
    }
    let mut space = None;
    if let Some(path) = &cmd.case {
        let case = load_case(path)?;
        space = Some(case_space(&case).clone());
        cfg = cfg.with_case(case);
    }
    let rho = cmd.measure.build(space.as_ref())?;
    let rep = check_axiom(cmd.axiom, &rho, &cfg)?;
    Ok(Report { failed: !rep.passed(), body: with_header("check", serde_json::to_value(&rep)?) })
}

fn case_space(case: &riskcal::axioms::Case) -> &riskcal::FiniteSpace {
    use riskcal::axioms::Case;
    match case {
        Case::Pair { x, .. }
        | Case::Shift { x, .. }
        | Case::Mix { x, .. }
        | Case::Star { x, .. }
        | Case::Constant { x } => x.space(),
    }
}

fn envelope(cmd: &EnvelopeCmd) -> riskcal::Result<Report> {
    let table = ScenarioTable::from_path(&cmd.anchors)?;
    let (_, x) = pick(&table, Some(&cmd.var))?;
    let base = MeasureArgs {
        measure: cmd.base_measure.clone(),
        kind: cmd.base_kind,
        lambda: cmd.lambda.clone(),
        params: cmd.params.clone(),
        mode: cmd.mode,
    };
    let rho = base.build(Some(table.space()))?;
    let precondition_cfg = CheckConfig::default().with_seed(cmd.seed).with_trials(cmd.trials);
    let member_cfg = cmd.check_members.then(|| precondition_cfg.clone());
    let opts = EnvelopeOptions { precondition_cfg, member_cfg, tolerance: cmd.tolerance };
    let rep = verify_envelope(&rho, cmd.kind, &x, table.columns(), &opts)?;
    let mut body = serde_json::to_value(&rep)?;
    let names: Vec<&String> = if cmd.kind == MemberKind::MonetaryAcceptance {
        std::iter::once(&cmd.var).chain(table.names()).collect()
    } else {
        table.names().iter().collect()
    };
    body["anchors"] = json!(names);
    Ok(Report { failed: !rep.holds(), body: with_header("envelope", body) })
}

fn allocation_table(x: &Rv, res: &InfConvResult) -> Value {
    match &res.allocation {
        None => Value::Null,
        Some(a) => {
            let rows: Vec<Value> = (0..x.len())
                .map(|w| {
                    let comps: Vec<f64> = a.components().iter().map(|c| c.values()[w]).collect();
                    json!({"prob": x.probs()[w], "x": x.values()[w], "components": comps})
                })
                .collect();
            json!({"comonotonic": a.is_comonotonic(), "rows": rows})
        }
    }
}

fn infconv(cmd: &InfconvCmd) -> riskcal::Result<Report> {
    let (name, x) = cmd.variable.load()?;
    if cmd.grid == 0 {
        return Err(RiskError::Input("--grid must be positive".into()));
    }
    let rhos = cmd.measures.iter().map(|m| parse_measure(m)).collect::<riskcal::Result<Vec<_>>>()?;
    let step_fraction = 1.0 / cmd.grid as f64;
    let res = if cmd.comonotone {
        let precondition_cfg = Some(CheckConfig::default().with_seed(cmd.seed).with_trials(300));
        let opts =
            ComonotoneOptions { resolution: cmd.resolution, step_fraction, precondition_cfg, ..Default::default() };
        infconv_comonotone(&rhos, &x, &opts)?
    } else {
        let opts =
            BruteForceOptions { step_fraction, detect_divergence: !cmd.no_divergence_check, ..Default::default() };
        infconv_bruteforce(&rhos, &x, &opts)?
    };
    let body = json!({
        "measures": rhos.iter().map(|r| r.name()).collect::<Vec<_>>(),
        "variable": name,
        "method": if cmd.comonotone { "comonotone" } else { "bruteforce" },
        "value": res.value,
        "diverged": res.diverged,
        "grid_tolerance": res.grid_tolerance,
        "heuristic": res.heuristic,
        "configurations": res.configurations,
        "allocation": allocation_table(&x, &res),
    });
    Ok(Report { body: with_header("infconv", body), failed: false })
}

fn portfolio(cmd: &PortfolioCmd) -> riskcal::Result<Report> {
    let table = ScenarioTable::from_path(&cmd.scenarios)?;
    let l = ScenarioMatrix::from_table(&table)?;
    let lam: LambdaFn = read_json(&cmd.lambda)?;
    let sol = optimize_portfolio(&l, &lam, cmd.level, cmd.resolution)?;
    let body = json!({
        "assets": l.assets(),
        "level": cmd.level,
        "resolution": cmd.resolution,
        "feasible": sol.is_some(),
        "weights": sol.as_ref().map(|s| s.weights.values()),
        "value": sol.as_ref().map(|s| s.value),
        "feasible_points": sol.as_ref().map_or(0, |s| s.feasible_points),
        "grid_points": sol.as_ref().map(|s| s.grid_points),
    });
    Ok(Report { body: with_header("portfolio", body), failed: false })
}

fn replicate(cmd: &ReplicateCmd) -> riskcal::Result<Report> {
    let suites = if cmd.suite == "all" { run_all(cmd.seed)? } else { vec![run_suite(&cmd.suite, cmd.seed)?] };
    let passed = suites.iter().all(|s| s.passed);
    let body = json!({"suite": cmd.suite, "seed": cmd.seed, "passed": passed, "suites": suites});
    Ok(Report { body: with_header("replicate", body), failed: !passed })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Measure(_) => "measure",
        Command::Check(_) => "check",
        Command::Envelope(_) => "envelope",
        Command::Infconv(_) => "infconv",
        Command::Portfolio(_) => "portfolio",
        Command::Replicate(_) => "replicate",
    }
}

fn run(cli: &Cli) -> riskcal::Result<Report> {
    match &cli.command {
        Command::Measure(c) => measure(c),
        Command::Check(c) => check(c),
        Command::Envelope(c) => envelope(c),
        Command::Infconv(c) => infconv(c),
        Command::Portfolio(c) => portfolio(c),
        Command::Replicate(c) => replicate(c),
    }
}

/// Exit code for a library error: 1 for results that cannot be represented, 2 for bad input.
fn error_code(e: &RiskError) -> u8 {
    match e {
        RiskError::Unbounded(_) => 1,
        _ => 2,
    }
}

fn error_report(command: Option<&str>, kind: &str, message: &str) -> Value {
    json!({
        "command": command,
        "schema_version": SCHEMA_VERSION,
        "error": {"kind": kind, "message": message},
    })
}

fn emit(doc: &Value, output: Option<&PathBuf>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("reports serialize");
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("RISKCAL_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().map_err(|_| format!("RISKCAL_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("RISKCAL_THREADS must be a positive integer".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = emit(&error_report(None, "usage", e.render().to_string().trim_end()), None);
            return ExitCode::from(2);
        }
    };
    let name = command_name(&cli.command);
    if let Err(msg) = configure_threads() {
        let _ = emit(&error_report(Some(name), "usage", &msg), cli.output.as_ref());
        return ExitCode::from(2);
    }
    let (doc, code) = match panic::catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(r)) => {
            let code = if r.failed { 3 } else { 0 };
            (r.body, code)
        }
        Ok(Err(e)) => {
            let code = error_code(&e);
            let kind = if code == 2 { "usage" } else { "internal" };
            (error_report(Some(name), kind, &e.to_string()), code)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unexpected failure".into());
            (error_report(Some(name), "internal", &msg), 1)
        }
    };
    if let Err(e) = emit(&doc, cli.output.as_ref()) {
        eprintln!("riskcal: cannot write report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
