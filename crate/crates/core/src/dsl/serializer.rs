//! Canonical text form for models.
//!
//! Output is deterministic: declarations sorted by id, set contents sorted,
//! one fixed layout. Serializing a parsed model and parsing the result
//! yields a semantically equal model, and serializing again yields the same
//! bytes — so a canonical file is a fixed point of parse-then-serialize.
//!
//! The provenance line in [`crate::model::ModelMeta`], when present, is
//! emitted as a leading comment so derived files carry their history
//! without affecting semantic equality.

use crate::ids::EntityId;
use crate::model::{Entity, FunctionSpec, WorldModel};
use std::collections::BTreeSet;
use std::fmt::Write;

fn quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn idset<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    let items: Vec<String> = items.into_iter().map(|s| s.as_ref().to_string()).collect();
    if items.is_empty() {
        "{ }".to_string()
    } else {
        format!("{{ {} }}", items.join(", "))
    }
}

fn write_function(out: &mut String, func: &FunctionSpec) {
    write!(
        out,
        "  function {} domain {} codomain {}",
        func.name,
        idset(func.domain.iter().map(|f| f.as_str())),
        idset(func.codomain.iter().map(|f| f.as_str())),
    )
    .unwrap();
    for (input, outputs) in &func.output_map {
        write!(out, "\n    map {} -> {}", input, idset(outputs.iter().map(|f| f.as_str()))).unwrap();
    }
    if func.firing == crate::model::FiringRule::Any {
        out.push_str("\n    firing any");
    }
    if let Some(machine) = &func.states {
        write!(
            out,
            "\n    states {} initial {}",
            idset(machine.states.iter().map(String::as_str)),
            machine.initial,
        )
        .unwrap();
        for ((from, flow), to) in &machine.transitions {
            write!(out, "\n      on {from}, {flow} -> {to}").unwrap();
        }
    }
    out.push('\n');
}

fn write_entity(out: &mut String, entity: &Entity) {
    write!(out, "entity {} kind {}", entity.id, entity.kind.keyword()).unwrap();
    if entity.functions.is_empty() && entity.relay.is_empty() && entity.emits.is_empty() {
        out.push('\n');
        return;
    }
    out.push_str(" {\n");
    for func in &entity.functions {
        write_function(out, func);
    }
    for rule in &entity.relay {
        writeln!(out, "  relay {} -> {} via {}", rule.received, rule.emitted, rule.via).unwrap();
    }
    for (flow, via) in &entity.emits {
        writeln!(out, "  emits {flow} on {via}").unwrap();
    }
    out.push_str("}\n");
}

/// Render the model in canonical form.
pub fn serialize_model(model: &WorldModel) -> String {
    let mut out = String::new();
    if let Some(provenance) = &model.meta.provenance {
        for line in provenance.lines() {
            writeln!(out, "# {line}").unwrap();
        }
        out.push('\n');
    }

    let mut first = true;
    let mut gap = |out: &mut String| {
        if !first {
            out.push('\n');
        }
        first = false;
    };

    for entity in model.entities.values() {
        gap(&mut out);
        write_entity(&mut out, entity);
    }

    if !model.interactions.is_empty() {
        gap(&mut out);
        for ir in model.interactions.values() {
            write!(out, "interaction {} : {} -> {} flow {}", ir.id, ir.source, ir.dest, ir.flow)
                .unwrap();
            if let Some(iface) = &ir.interface {
                write!(out, " via {iface}").unwrap();
            }
            if let Some(recv) = &ir.recv_function {
                write!(out, " recv {recv}").unwrap();
            }
            out.push('\n');
        }
    }

    if !model.boundary.internal.is_empty() || !model.boundary.external.is_empty() {
        gap(&mut out);
        writeln!(
            out,
            "boundary internal {}",
            idset(model.boundary.internal.iter().map(|e| e.as_str()))
        )
        .unwrap();
    }

    for context in model.contexts.values() {
        gap(&mut out);
        writeln!(out, "context {} {{", context.id).unwrap();
        for em in &context.emissions {
            writeln!(out, "  emit {} flow {} on {}", em.entity, em.flow, em.via).unwrap();
        }
        out.push_str("}\n");
    }

    for outcome in model.outcomes.values() {
        gap(&mut out);
        write!(out, "outcome {}", outcome.id).unwrap();
        if !outcome.description.is_empty() {
            write!(out, " {}", quoted(&outcome.description)).unwrap();
        }
        if let Some(goals) = model.desired.get(&outcome.id) {
            write!(out, "\n  desired for {}", idset(goals.iter().map(|g| g.as_str()))).unwrap();
        }
        for alternative in &outcome.groundings {
            write!(out, "\n  grounding {}", idset(alternative.iter().map(|i| i.as_str()))).unwrap();
        }
        out.push('\n');
    }

    for stakeholder in model.stakeholders.values() {
        gap(&mut out);
        write!(out, "stakeholder {}", stakeholder.id).unwrap();
        for (goal, text) in &stakeholder.goals {
            write!(out, "\n  goal {goal} {}", quoted(text)).unwrap();
        }
        out.push('\n');
    }

    for req in model.requirements.values() {
        gap(&mut out);
        write!(
            out,
            "requirement {} subject {} in {} out {}",
            req.id, req.subject, req.input, req.output
        )
        .unwrap();
        if let Some(ctx) = &req.condition {
            write!(out, " when {ctx}").unwrap();
        }
        out.push('\n');
    }

    out
}

/// Entity ids mentioned by the boundary but never declared — these survive
/// serialization inside the boundary set, which is what keeps broken
/// fixtures broken across a round trip.
pub fn ghost_boundary_members(model: &WorldModel) -> BTreeSet<EntityId> {
    model
        .boundary
        .internal
        .iter()
        .chain(model.boundary.external.iter())
        .filter(|id| !model.entities.contains_key(*id))
        .cloned()
        .collect()
}
