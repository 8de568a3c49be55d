//! Text renderings of the engine's reports. JSON output serializes the
//! report structs directly; everything here is the human-facing shape.

use psworld_core::activation::warnings_report;
use psworld_core::minimal::Reduction;
use psworld_core::*;
use serde::Serialize;
use std::fmt::Write;

pub fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

pub fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

pub fn active_text(model: &WorldModel, active: &ActiveSet) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "context {}: {} active interaction{}",
        active.context,
        active.active.len(),
        if active.active.len() == 1 { "" } else { "s" }
    );
    for id in &active.active {
        let ir = &model.interactions[id];
        let _ = writeln!(
            out,
            "  layer {}  {}  {}  {} -> {}",
            active.layers[id], id, ir.flow, ir.source, ir.dest
        );
    }
    let outside: Vec<String> =
        active.carried.difference(&active.active).map(|id| id.to_string()).collect();
    if !outside.is_empty() {
        let _ = writeln!(out, "  carried but outside the boundary: {}", outside.join(", "));
    }
    for w in &warnings_report(active).diagnostics {
        let _ = writeln!(out, "  {w}");
    }
    out
}

pub fn derivation_text(d: &Derivation, depth: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}{} carries {}: {}", "  ".repeat(depth), d.interaction, d.flow, d.justification);
    for child in &d.children {
        out.push_str(&derivation_text(child, depth + 1));
    }
    out
}

pub fn eval_text(eval: &OutcomeEval) -> String {
    match &eval.witness {
        Some(witness) => {
            let ids: Vec<String> = witness.iter().map(|i| i.to_string()).collect();
            format!(
                "{} in {}: TRUE ({}) — witness {{ {} }}",
                eval.outcome,
                eval.context,
                eval.class,
                ids.join(", ")
            )
        }
        None => format!(
            "{} in {}: FALSE ({}) — no grounding alternative is fully carried",
            eval.outcome, eval.context, eval.class
        ),
    }
}

/// The outcome × context truth grid.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeMatrix {
    pub contexts: Vec<ContextId>,
    pub rows: Vec<MatrixRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixRow {
    pub outcome: OutcomeId,
    pub class: OutcomeClass,
    pub truths: Vec<bool>,
}

pub fn matrix_text(matrix: &OutcomeMatrix) -> String {
    let name_width = matrix
        .rows
        .iter()
        .map(|r| r.outcome.as_str().len())
        .max()
        .unwrap_or(7)
        .max("outcome".len());
    let mut out = String::new();
    let _ = write!(out, "{:name_width$}  {:8}", "outcome", "class");
    for c in &matrix.contexts {
        let _ = write!(out, "  {c}");
    }
    out.push('\n');
    for row in &matrix.rows {
        let _ = write!(out, "{:name_width$}  {:8}", row.outcome.as_str(), row.class.to_string());
        for (truth, c) in row.truths.iter().zip(&matrix.contexts) {
            let _ = write!(out, "  {:width$}", if *truth { "T" } else { "F" }, width = c.as_str().len());
        }
        out.push('\n');
    }
    out
}

pub fn sufficiency_text(report: &SufficiencyReport) -> String {
    let mut out = String::new();
    for row in &report.checklist {
        let _ = write!(out, "{} in {}:", row.outcome, row.context);
        for (construct, ok) in &row.constructs {
            let _ = write!(out, "  {construct}={}", if *ok { "yes" } else { "NO" });
        }
        out.push('\n');
    }
    for (goal, outcomes) in &report.goal_support {
        let ids: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
        let _ = writeln!(
            out,
            "goal {goal}: {}",
            if ids.is_empty() { "unsupported".to_string() } else { format!("supported by {}", ids.join(", ")) }
        );
    }
    if let Some(truths) = &report.truths {
        for cell in truths {
            let _ = writeln!(
                out,
                "{} in {}: {}",
                cell.outcome,
                cell.context,
                if cell.truth { "TRUE" } else { "FALSE" }
            );
        }
    }
    for flag in &report.flags {
        let _ = writeln!(out, "flag: {flag}");
    }
    let _ = writeln!(out, "verdict: {}", report.verdict);
    out
}

pub fn impact_text(report: &ImpactReport) -> String {
    let mut out = String::new();
    if report.deltas.is_empty() {
        let _ = writeln!(out, "no checklist cell changes");
    }
    for d in &report.deltas {
        let _ = writeln!(
            out,
            "{} in {}: {} now {}",
            d.outcome,
            d.context,
            d.construct,
            if d.satisfied { "holds" } else { "FAILS" }
        );
    }
    let _ = writeln!(out, "verdict: {}", report.verdict);
    out
}

pub fn goal_text(report: &GoalReport) -> String {
    let mut out = String::new();
    for row in &report.goals {
        let status = if !row.supported {
            "UNSUPPORTED (no desired outcome links to it)"
        } else if row.satisfied {
            "satisfied"
        } else {
            "NOT satisfied"
        };
        let _ = write!(out, "{} / {}: {}", row.stakeholder, row.goal, status);
        if !row.outcomes.is_empty() {
            let ids: Vec<String> = row.outcomes.iter().map(|o| o.to_string()).collect();
            let _ = write!(out, "  via {{ {} }}", ids.join(", "));
        }
        let _ = writeln!(out);
        for flag in &row.flags {
            let _ = writeln!(out, "  note: {flag}");
        }
    }
    let _ = writeln!(out, "verdict: {}", report.verdict);
    out
}

pub fn minimal_text(report: &MinimalSetsReport) -> String {
    let mut out = String::new();
    let family: Vec<String> = report.contexts.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(
        out,
        "outcome {} over {{ {} }}: {} minimal set{}",
        report.outcome,
        family.join(", "),
        report.minimal_sets.len(),
        if report.minimal_sets.len() == 1 { "" } else { "s" }
    );
    for set in &report.minimal_sets {
        let ids: Vec<String> = set.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "  {{ {} }}", ids.join(", "));
    }
    let join = |s: &std::collections::BTreeSet<InteractionId>| {
        s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
    };
    let _ = writeln!(out, "essential: {}", join(&report.essential));
    let _ = writeln!(out, "non-essential: {}", join(&report.nonessential));
    if !report.certified {
        let _ = writeln!(out, "NOT certified complete (heuristic search)");
    }
    for flag in &report.flags {
        let _ = writeln!(out, "flag: {flag}");
    }
    out
}

pub fn reduction_text(reduction: &Reduction) -> String {
    let mut out = String::new();
    let ids: Vec<String> = reduction.removed.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(
        out,
        "removed {} interaction{}: {}",
        reduction.removed.len(),
        if reduction.removed.len() == 1 { "" } else { "s" },
        if ids.is_empty() { "(none)".to_string() } else { ids.join(", ") }
    );
    let protected: Vec<String> = reduction.protected.iter().map(|o| o.to_string()).collect();
    let _ = writeln!(out, "protected outcomes: {}", protected.join(", "));
    let _ = writeln!(out, "verified {} (outcome, context) verdicts unchanged", reduction.checks);
    for flag in &reduction.flags {
        let _ = writeln!(out, "flag: {flag}");
    }
    out
}

pub fn plan_text(plan: &RescopePlan) -> String {
    let mut out = String::new();
    let join = |s: &std::collections::BTreeSet<EntityId>| {
        s.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
    };
    let _ = writeln!(out, "moved in: {}", if plan.moved_in.is_empty() { "(none)".into() } else { join(&plan.moved_in) });
    let _ = writeln!(out, "moved out: {}", if plan.moved_out.is_empty() { "(none)".into() } else { join(&plan.moved_out) });
    if plan.reclassified.is_empty() {
        let _ = writeln!(out, "no interaction changes class");
    }
    for (id, (from, to)) in &plan.reclassified {
        let _ = writeln!(out, "{id}: {from} -> {to}");
    }
    out
}

pub fn independence_text(report: &IndependenceReport) -> String {
    let mut out = String::new();
    for row in &report.truth_rows {
        let mark = |t: bool| if t { "TRUE" } else { "FALSE" };
        let _ = writeln!(
            out,
            "{} in {}: {} / {}{}",
            row.outcome,
            row.context,
            mark(row.first),
            mark(row.second),
            if row.first == row.second { "" } else { "  <- DIFFERS" }
        );
    }
    for (id, (from, to)) in &report.interaction_changes {
        let _ = writeln!(out, "interaction {id}: {from} -> {to}");
    }
    for (id, (from, to)) in &report.outcome_changes {
        let _ = writeln!(out, "outcome {id}: {from} -> {to}");
    }
    let _ = writeln!(out, "truth invariant: {}", if report.invariant { "yes" } else { "NO" });
    out
}

pub fn trace_text(trace: &SimulationTrace) -> String {
    let mut out = String::new();
    for step in &trace.steps {
        let _ = writeln!(
            out,
            "[{}] {}.{}: {} --{} via {}--> {}",
            step.context, step.entity, step.function, step.before, step.input, step.via, step.after
        );
    }
    for (entity, machines) in &trace.final_states {
        for (function, state) in machines {
            let _ = writeln!(out, "final {entity}.{function} = {state}");
        }
    }
    for w in &trace.warnings {
        let _ = writeln!(out, "{w}");
    }
    out
}
