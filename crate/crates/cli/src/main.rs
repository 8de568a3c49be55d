//! `psworld` — validate, analyze, simulate, and interactively frame
//! problem-space world models written in the `.psw` language.
//!
//! Exit codes are a stable contract: 0 success, 1 semantic findings
//! (validation errors, an insufficient audit, a refused reduction), 2
//! usage or I/O problems (unreadable file, unknown name on the command
//! line). Reports go to stdout; diagnostics go to stderr.

mod render;
mod repl;

use clap::{Parser, Subcommand, ValueEnum};
use psworld_core::*;
use render::*;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "psworld", version, about = "Problem-space world model analyzer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model against the declaration laws
    Check {
        path: PathBuf,
        /// Treat warnings as findings
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Audit sufficiency: the four constructs per desired outcome and context
    Audit {
        path: PathBuf,
        /// Treat these outcomes as desired too (comma-separated)
        #[arg(long, value_delimiter = ',')]
        desired: Vec<String>,
        /// Restrict the audit to these contexts (comma-separated)
        #[arg(long, value_delimiter = ',')]
        contexts: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Print the outcome × context truth matrix
    Outcomes {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Preview how declaring one more desired outcome would change the audit
    Impact {
        path: PathBuf,
        /// Id of the probe outcome
        outcome: String,
        /// Description of the probe outcome
        #[arg(long, default_value = "")]
        desc: String,
        /// One grounding alternative (comma-separated members); repeatable
        #[arg(long)]
        grounding: Vec<String>,
        /// Goals the probe outcome is desired for (comma-separated)
        #[arg(long, value_delimiter = ',')]
        goals: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Evaluate one outcome in one context
    Eval {
        path: PathBuf,
        outcome: String,
        context: String,
        /// Print the activation derivation behind the verdict
        #[arg(long)]
        explain: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run declared state machines over a schedule of contexts
    Simulate {
        path: PathBuf,
        /// Contexts to run, in order (comma-separated; default: all declared)
        #[arg(long, value_delimiter = ',')]
        contexts: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Enumerate the minimal determining interaction sets of an outcome
    MinimalSets {
        path: PathBuf,
        outcome: String,
        /// Context family (comma-separated; default: all declared)
        #[arg(long, value_delimiter = ',')]
        contexts: Vec<String>,
        /// Greedy single-set search; results are not certified complete
        #[arg(long)]
        heuristic: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Remove interactions, refusing unless provably non-essential
    Reduce {
        path: PathBuf,
        /// Interactions to remove (comma-separated; default: every
        /// certified non-essential interaction)
        #[arg(long, value_delimiter = ',')]
        remove: Vec<String>,
        /// Write the reduced model here
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Redraw the boundary so exactly the named entities are internal
    Rescope {
        path: PathBuf,
        /// The new internal entity set (comma-separated)
        #[arg(long, value_delimiter = ',', required = true)]
        internal: Vec<String>,
        /// Write the rescoped model here
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Check two models are the same world under different boundaries
    VerifyRescope {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Interactive session: declare, activate, evaluate, audit, undo
    Repl {
        /// Starting model
        path: Option<PathBuf>,
        /// Read commands from a file instead of stdin
        #[arg(long)]
        script: Option<PathBuf>,
        /// Serialize the final model here on exit
        #[arg(long)]
        dump_final: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // Die quietly when a downstream pager or `head` closes the pipe instead
    // of panicking on the next write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    ExitCode::from(run(Cli::parse()))
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Check { path, strict, format } => cmd_check(&path, strict, format),
        Command::Audit { path, desired, contexts, format } => {
            cmd_audit(&path, &desired, &contexts, format)
        }
        Command::Outcomes { path, format } => cmd_outcomes(&path, format),
        Command::Impact { path, outcome, desc, grounding, goals, format } => {
            cmd_impact(&path, &outcome, &desc, &grounding, &goals, format)
        }
        Command::Eval { path, outcome, context, explain, format } => {
            cmd_eval(&path, &outcome, &context, explain, format)
        }
        Command::Simulate { path, contexts, format } => cmd_simulate(&path, &contexts, format),
        Command::MinimalSets { path, outcome, contexts, heuristic, format } => {
            cmd_minimal_sets(&path, &outcome, &contexts, heuristic, format)
        }
        Command::Reduce { path, remove, output, format } => {
            cmd_reduce(&path, &remove, output.as_deref(), format)
        }
        Command::Rescope { path, internal, output, format } => {
            cmd_rescope(&path, &internal, output.as_deref(), format)
        }
        Command::VerifyRescope { first, second, format } => {
            cmd_verify_rescope(&first, &second, format)
        }
        Command::Repl { path, script, dump_final } => {
            repl::run(path.as_deref(), script.as_deref(), dump_final.as_deref())
        }
    }
}

/// Exit code for an engine error: naming something that does not exist is a
/// usage problem; everything else is a semantic finding.
fn exit_for(err: &EngineError) -> u8 {
    match err {
        EngineError::UnknownContext(_)
        | EngineError::UnknownOutcome(_)
        | EngineError::UnknownInteraction(_) => 2,
        _ => 1,
    }
}

fn fail(err: &EngineError) -> u8 {
    eprintln!("error: {}: {err}", err.code());
    exit_for(err)
}

fn read_source(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        2
    })
}

/// Load a model for an analysis command. A file that does not parse is
/// invalid input (exit 2); parse warnings pass through.
fn load_model(path: &Path) -> Result<WorldModel, u8> {
    let source = read_source(path)?;
    match parse_model(&source, &path.display().to_string()) {
        Ok((model, warnings)) => {
            print_diagnostics(&warnings);
            Ok(model)
        }
        Err(diags) => {
            print_diagnostics(&diags);
            Err(2)
        }
    }
}

fn write_output(path: &Path, text: &str) -> Result<(), u8> {
    std::fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        2
    })
}

fn resolve_contexts(model: &WorldModel, names: &[String]) -> Result<Vec<ContextId>, u8> {
    let mut out = Vec::new();
    for name in names {
        let id = ContextId::from(name.as_str());
        if !model.contexts.contains_key(&id) {
            eprintln!("error: unknown-context: `{name}` is not a declared context");
            return Err(2);
        }
        out.push(id);
    }
    Ok(out)
}

fn cmd_check(path: &Path, strict: bool, format: Format) -> u8 {
    let source = match read_source(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (model, mut diagnostics) = match parse_model(&source, &path.display().to_string()) {
        Ok((model, warnings)) => (Some(model), warnings),
        Err(diags) => (None, diags),
    };
    if let Some(model) = &model {
        diagnostics.extend(validate_model(model).diagnostics);
    }
    let report = Report { diagnostics };
    print_diagnostics(&report.diagnostics);
    if format == Format::Json {
        print_json(&report);
    }
    let errors = report.diagnostics.iter().filter(|d| d.is_error()).count();
    let warnings = report.diagnostics.len() - errors;
    if errors > 0 || (strict && warnings > 0) {
        1
    } else {
        if format == Format::Text {
            println!("ok: {} ({} warning{})", path.display(), warnings, if warnings == 1 { "" } else { "s" });
        }
        0
    }
}

fn cmd_audit(path: &Path, desired: &[String], contexts: &[String], format: Format) -> u8 {
    let mut model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    for name in desired {
        let id = OutcomeId::from(name.as_str());
        if !model.outcomes.contains_key(&id) {
            eprintln!("error: unknown-outcome: `{name}` is not a declared outcome");
            return 2;
        }
        model.desired.entry(id).or_default();
    }
    if !contexts.is_empty() {
        let keep: BTreeSet<ContextId> = match resolve_contexts(&model, contexts) {
            Ok(ids) => ids.into_iter().collect(),
            Err(code) => return code,
        };
        model.contexts.retain(|id, _| keep.contains(id));
    }
    let report = match audit_sufficiency(&model) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", sufficiency_text(&report)),
        Format::Json => print_json(&report),
    }
    if report.is_sufficient() {
        0
    } else {
        1
    }
}

fn cmd_outcomes(path: &Path, format: Format) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let contexts: Vec<ContextId> = model.contexts.keys().cloned().collect();
    let mut rows = Vec::new();
    for outcome in model.outcomes.keys() {
        let mut truths = Vec::new();
        let mut class = None;
        for ctx in &contexts {
            match evaluate_outcome(&model, outcome, ctx) {
                Ok(eval) => {
                    class = Some(eval.class);
                    truths.push(eval.truth);
                }
                Err(e) => return fail(&e),
            }
        }
        let class = match class {
            Some(c) => c,
            // no contexts declared: classification still applies
            None => match classify_outcome(&model, &model.outcomes[outcome]) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            },
        };
        rows.push(MatrixRow { outcome: outcome.clone(), class, truths });
    }
    let matrix = OutcomeMatrix { contexts, rows };
    match format {
        Format::Text => print!("{}", matrix_text(&matrix)),
        Format::Json => print_json(&matrix),
    }
    0
}

fn cmd_impact(
    path: &Path,
    outcome: &str,
    desc: &str,
    grounding: &[String],
    goals: &[String],
    format: Format,
) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let groundings: BTreeSet<BTreeSet<InteractionId>> = grounding
        .iter()
        .map(|alt| {
            alt.split(',')
                .filter(|s| !s.is_empty())
                .map(InteractionId::from)
                .collect::<BTreeSet<_>>()
        })
        .filter(|alt: &BTreeSet<InteractionId>| !alt.is_empty())
        .collect();
    let probe = OutcomeDecl {
        id: OutcomeId::from(outcome),
        description: desc.to_string(),
        groundings,
    };
    let goals: BTreeSet<GoalId> = goals.iter().map(|g| GoalId::from(g.as_str())).collect();
    let report = match impact_of_new_outcome(&model, probe, goals) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", impact_text(&report)),
        Format::Json => print_json(&report),
    }
    if report.verdict == "sufficient" {
        0
    } else {
        1
    }
}

fn cmd_eval(path: &Path, outcome: &str, context: &str, explain: bool, format: Format) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let outcome = OutcomeId::from(outcome);
    let context = ContextId::from(context);
    let eval = match evaluate_outcome(&model, &outcome, &context) {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    let derivations: Vec<Derivation> = if explain {
        let active = match compute_active_set(&model, &context) {
            Ok(a) => a,
            Err(e) => return fail(&e),
        };
        let witness = eval.witness.clone().unwrap_or_default();
        let mut trees = Vec::new();
        for ir in &witness {
            match explain_activation(&model, &active, ir) {
                Ok(tree) => trees.push(tree),
                Err(e) => return fail(&e),
            }
        }
        trees
    } else {
        Vec::new()
    };
    match format {
        Format::Text => {
            println!("{}", eval_text(&eval));
            for tree in &derivations {
                print!("{}", derivation_text(tree, 0));
            }
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct EvalOut<'a> {
                #[serde(flatten)]
                eval: &'a OutcomeEval,
                #[serde(skip_serializing_if = "Vec::is_empty")]
                derivations: &'a Vec<Derivation>,
            }
            print_json(&EvalOut { eval: &eval, derivations: &derivations });
        }
    }
    0
}

fn cmd_simulate(path: &Path, contexts: &[String], format: Format) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let schedule: Vec<ContextId> = if contexts.is_empty() {
        model.contexts.keys().cloned().collect()
    } else {
        match resolve_contexts(&model, contexts) {
            Ok(ids) => ids,
            Err(code) => return code,
        }
    };
    let trace = match simulate(&model, &schedule) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", trace_text(&trace)),
        Format::Json => print_json(&trace),
    }
    0
}

/// Subset-search options, honoring `PSWORLD_MAX_SUBSETS`.
fn search_options(heuristic: bool) -> Result<MinimalSetsOptions, u8> {
    let mut opts = MinimalSetsOptions { heuristic, ..MinimalSetsOptions::default() };
    if let Ok(value) = std::env::var("PSWORLD_MAX_SUBSETS") {
        match value.parse::<usize>() {
            Ok(cap) => opts.cap = cap,
            Err(_) => {
                eprintln!("error: PSWORLD_MAX_SUBSETS must be a number, got `{value}`");
                return Err(2);
            }
        }
    }
    Ok(opts)
}

fn cmd_minimal_sets(
    path: &Path,
    outcome: &str,
    contexts: &[String],
    heuristic: bool,
    format: Format,
) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let family = match resolve_contexts(&model, contexts) {
        Ok(ids) => ids,
        Err(code) => return code,
    };
    let opts = match search_options(heuristic) {
        Ok(o) => o,
        Err(code) => return code,
    };
    let outcome = OutcomeId::from(outcome);
    let report = match find_minimal_sets(&model, &outcome, &family, opts) {
        Ok(r) => r,
        Err(e @ EngineError::SearchTooLarge { .. }) => {
            eprintln!("error: {}: {e}; rerun with --heuristic or raise PSWORLD_MAX_SUBSETS", e.code());
            return 1;
        }
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", minimal_text(&report)),
        Format::Json => print_json(&report),
    }
    0
}

fn cmd_reduce(path: &Path, remove: &[String], output: Option<&Path>, format: Format) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let removals: BTreeSet<InteractionId> = if remove.is_empty() {
        match find_nonessential(&model) {
            Ok(report) => report.certified,
            Err(e) => return fail(&e),
        }
    } else {
        remove.iter().map(|s| InteractionId::from(s.as_str())).collect()
    };
    let reduction = match reduce_model(&model, &removals) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", reduction_text(&reduction)),
        Format::Json => print_json(&reduction),
    }
    if let Some(out) = output {
        if let Err(code) = write_output(out, &serialize_model(&reduction.model)) {
            return code;
        }
    }
    0
}

fn cmd_rescope(path: &Path, internal: &[String], output: Option<&Path>, format: Format) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let target: BTreeSet<EntityId> = internal.iter().map(|s| EntityId::from(s.as_str())).collect();
    let (rescoped, plan) = match rescope(&model, &target) {
        Ok(pair) => pair,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", plan_text(&plan)),
        Format::Json => print_json(&plan),
    }
    if let Some(out) = output {
        if let Err(code) = write_output(out, &serialize_model(&rescoped)) {
            return code;
        }
    }
    0
}

fn cmd_verify_rescope(first: &Path, second: &Path, format: Format) -> u8 {
    let a = match load_model(first) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let b = match load_model(second) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let report = match verify_boundary_independence(&a, &b) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Text => print!("{}", independence_text(&report)),
        Format::Json => print_json(&report),
    }
    if report.invariant {
        0
    } else {
        1
    }
}
