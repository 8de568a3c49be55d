//! Well-formedness validation: every declared construct is checked against
//! the closed-world, partition, admissibility, and grounding rules, and each
//! violation becomes one diagnostic. An empty report means the model is
//! well-formed.

use crate::classify::{classify_interaction, classify_outcome, InteractionClass, OutcomeClass};
use crate::diag::{rules, Diagnostic, Report};
use crate::ids::*;
use crate::model::*;
use std::collections::BTreeSet;

/// Validate a model and return every violated rule as a diagnostic, in
/// deterministic (declaration-id) order within each section.
pub fn validate_model(model: &WorldModel) -> Report {
    let mut report = Report::default();
    check_universe(model, &mut report);
    check_boundary(model, &mut report);
    check_functions(model, &mut report);
    check_interactions(model, &mut report);
    check_flows(model, &mut report);
    check_relay_and_emits(model, &mut report);
    check_contexts(model, &mut report);
    check_outcomes(model, &mut report);
    check_desired(model, &mut report);
    check_requirements(model, &mut report);
    check_openness(model, &mut report);
    report
}

fn check_universe(model: &WorldModel, report: &mut Report) {
    if model.entities.is_empty() {
        report.push(Diagnostic::error(
            rules::NO_ENTITIES,
            "model declares no entities",
            model.meta.span(&SpanKey::Boundary),
        ));
    }
    for entity in model.entities.values() {
        let span = model.span(&SpanKey::Entity(entity.id.clone()));
        if entity.kind == EntityKind::InternalFunction && entity.functions.is_empty() {
            report.push(Diagnostic::error(
                rules::FUNCTION_REQUIRED,
                format!("internal entity `{}` declares no function", entity.id),
                span.clone(),
            ));
        }
        let mut seen = BTreeSet::new();
        for f in &entity.functions {
            if !seen.insert(f.name.as_str()) {
                report.push(Diagnostic::error(
                    rules::DUPLICATE_ID,
                    format!("function `{}` declared twice on `{}`", f.name, entity.id),
                    model.span(&SpanKey::Function(entity.id.clone(), f.name.clone())),
                ));
            }
        }
    }
}

fn check_boundary(model: &WorldModel, report: &mut Report) {
    let span = model.span(&SpanKey::Boundary);
    let b = &model.boundary;
    let universe: BTreeSet<&EntityId> = model.entities.keys().collect();

    for id in b.internal.intersection(&b.external) {
        report.push(Diagnostic::error(
            rules::BOUNDARY_NOT_PARTITION,
            format!("`{id}` is committed to both sides of the boundary"),
            span.clone(),
        ));
    }
    let committed: BTreeSet<&EntityId> = b.internal.union(&b.external).collect();
    for id in committed.difference(&universe) {
        report.push(Diagnostic::error(
            rules::UNRESOLVED_REFERENCE,
            format!("boundary refers to undeclared entity `{id}`"),
            span.clone(),
        ));
        report.push(Diagnostic::error(
            rules::BOUNDARY_NOT_PARTITION,
            format!("boundary side membership of `{id}` does not partition the universe"),
            span.clone(),
        ));
    }
    for id in universe.difference(&committed) {
        report.push(Diagnostic::error(
            rules::BOUNDARY_NOT_PARTITION,
            format!("`{id}` is committed to neither side of the boundary"),
            span.clone(),
        ));
    }

    for entity in model.entities.values() {
        let internal = b.internal.contains(&entity.id);
        match entity.kind {
            EntityKind::Environment if internal => {
                report.push(Diagnostic::error(
                    rules::ENV_CANNOT_BE_INTERNAL,
                    format!("environment entity `{}` is inside the boundary", entity.id),
                    model.span(&SpanKey::Entity(entity.id.clone())),
                ));
            }
            EntityKind::InternalFunction if !internal && b.external.contains(&entity.id) => {
                report.push(Diagnostic::error(
                    rules::KIND_BOUNDARY_MISMATCH,
                    format!("`{}` is declared internal but committed outside the boundary", entity.id),
                    model.span(&SpanKey::Entity(entity.id.clone())),
                ));
            }
            EntityKind::ExternalSystem if internal => {
                report.push(Diagnostic::error(
                    rules::KIND_BOUNDARY_MISMATCH,
                    format!("`{}` is declared external but committed inside the boundary", entity.id),
                    model.span(&SpanKey::Entity(entity.id.clone())),
                ));
            }
            _ => {}
        }
    }
}

fn check_functions(model: &WorldModel, report: &mut Report) {
    for entity in model.entities.values() {
        for f in &entity.functions {
            let span = model.span(&SpanKey::Function(entity.id.clone(), f.name.clone()));
            if f.domain.is_empty() {
                report.push(Diagnostic::error(
                    rules::EMPTY_DOMAIN,
                    format!("function `{}` on `{}` has an empty domain", f.name, entity.id),
                    span.clone(),
                ));
            }
            if f.codomain.is_empty() {
                report.push(Diagnostic::error(
                    rules::EMPTY_CODOMAIN,
                    format!("function `{}` on `{}` has an empty codomain", f.name, entity.id),
                    span.clone(),
                ));
            }
            for (input, outputs) in &f.output_map {
                if !f.domain.contains(input) {
                    report.push(Diagnostic::error(
                        rules::MAP_KEY_OUTSIDE_DOMAIN,
                        format!(
                            "`{}` maps input `{input}` it does not admit",
                            f.name
                        ),
                        span.clone(),
                    ));
                }
                for out in outputs {
                    if !f.codomain.contains(out) {
                        report.push(Diagnostic::error(
                            rules::OUTPUT_OUTSIDE_CODOMAIN,
                            format!("`{}` maps `{input}` to `{out}` outside its codomain", f.name),
                            span.clone(),
                        ));
                    }
                }
            }
            if let Some(sm) = &f.states {
                if !sm.states.contains(&sm.initial) {
                    report.push(Diagnostic::error(
                        rules::UNKNOWN_STATE,
                        format!("initial state `{}` is not in the state set of `{}`", sm.initial, f.name),
                        span.clone(),
                    ));
                }
                for ((from, flow), to) in &sm.transitions {
                    for state in [from, to] {
                        if !sm.states.contains(state) {
                            report.push(Diagnostic::error(
                                rules::UNKNOWN_STATE,
                                format!("transition of `{}` uses undeclared state `{state}`", f.name),
                                span.clone(),
                            ));
                        }
                    }
                    if !f.domain.contains(flow) {
                        report.push(Diagnostic::error(
                            rules::TRANSITION_FLOW_INADMISSIBLE,
                            format!(
                                "transition of `{}` is keyed by `{flow}`, which the function does not admit",
                                f.name
                            ),
                            span.clone(),
                        ));
                    }
                }
            }
        }
    }
}

fn check_interactions(model: &WorldModel, report: &mut Report) {
    for ir in model.interactions.values() {
        let span = model.span(&SpanKey::Interaction(ir.id.clone()));
        let mut endpoints_ok = true;
        for (role, id) in [("source", &ir.source), ("destination", &ir.dest)] {
            if !model.entities.contains_key(id) {
                endpoints_ok = false;
                report.push(Diagnostic::error(
                    rules::UNRESOLVED_REFERENCE,
                    format!("interaction `{}` names undeclared {role} `{id}`", ir.id),
                    span.clone(),
                ));
            }
        }
        if !endpoints_ok {
            continue;
        }
        if ir.source == ir.dest && !model.allow_self_loops {
            report.push(Diagnostic::error(
                rules::SELF_LOOP,
                format!("interaction `{}` loops `{}` back to itself", ir.id, ir.source),
                span.clone(),
            ));
        }
        match model.resolve_receiver(ir) {
            Receiver::Function(_) | Receiver::Absorbing => {}
            Receiver::NoneAdmits => {
                report.push(Diagnostic::error(
                    rules::INADMISSIBLE_FLOW,
                    format!(
                        "flow `{}` is not admissible at `{}`: no receiving function admits it",
                        ir.flow, ir.dest
                    ),
                    span.clone(),
                ));
            }
            Receiver::Ambiguous(names) => {
                report.push(Diagnostic::error(
                    rules::AMBIGUOUS_RECEIVER,
                    format!(
                        "flow `{}` into `{}` is admitted by {} — name one with `recv`",
                        ir.flow,
                        ir.dest,
                        names.join(", ")
                    ),
                    span.clone(),
                ));
            }
            Receiver::UnknownNamed(name) => {
                report.push(Diagnostic::error(
                    rules::UNKNOWN_RECEIVER,
                    format!("`{}` names receiving function `{name}` not declared on `{}`", ir.id, ir.dest),
                    span.clone(),
                ));
            }
            Receiver::UnknownDest => {}
        }
    }
}

fn check_flows(model: &WorldModel, report: &mut Report) {
    let mut accepted = BTreeSet::new();
    for entity in model.entities.values() {
        for f in &entity.functions {
            accepted.extend(f.domain.iter().cloned());
        }
    }
    for flow in model.flow_types() {
        if !accepted.contains(&flow) {
            report.push(Diagnostic::error(
                rules::FLOW_NEVER_ACCEPTED,
                format!("flow type `{flow}` is accepted by no function's domain"),
                model.meta.span(&SpanKey::Boundary),
            ));
        }
    }
}

fn check_relay_and_emits(model: &WorldModel, report: &mut Report) {
    for entity in model.entities.values() {
        for rule in &entity.relay {
            let span = model.span(&SpanKey::Relay(entity.id.clone(), rule.clone()));
            if entity.kind != EntityKind::ExternalSystem {
                report.push(Diagnostic::error(
                    rules::RELAY_ON_NON_EXTERNAL,
                    format!("relay declared on `{}`, which is not an external system", entity.id),
                    span.clone(),
                ));
            }
            let Some(via) = model.interactions.get(&rule.via) else {
                report.push(Diagnostic::error(
                    rules::UNRESOLVED_REFERENCE,
                    format!("relay on `{}` names undeclared interaction `{}`", entity.id, rule.via),
                    span,
                ));
                continue;
            };
            if via.source != entity.id {
                report.push(Diagnostic::error(
                    rules::RELAY_SOURCE_MISMATCH,
                    format!("relay on `{}` emits via `{}`, whose source is `{}`", entity.id, via.id, via.source),
                    span.clone(),
                ));
            }
            if via.flow != rule.emitted {
                report.push(Diagnostic::error(
                    rules::RELAY_FLOW_MISMATCH,
                    format!(
                        "relay on `{}` emits `{}` via `{}`, which carries `{}`",
                        entity.id, rule.emitted, via.id, via.flow
                    ),
                    span,
                ));
            }
        }
        for (flow, via_id) in &entity.emits {
            let span = model.span(&SpanKey::Emits(entity.id.clone(), flow.clone(), via_id.clone()));
            if entity.kind != EntityKind::Environment {
                report.push(Diagnostic::error(
                    rules::EMITS_ON_NON_ENV,
                    format!("`{}` declares emissions but is not an environment entity", entity.id),
                    span.clone(),
                ));
            }
            let Some(via) = model.interactions.get(via_id) else {
                report.push(Diagnostic::error(
                    rules::UNRESOLVED_REFERENCE,
                    format!("emission capability of `{}` names undeclared interaction `{via_id}`", entity.id),
                    span,
                ));
                continue;
            };
            if via.source != entity.id {
                report.push(Diagnostic::error(
                    rules::EMISSION_SOURCE_MISMATCH,
                    format!("`{}` declares an emission via `{}`, whose source is `{}`", entity.id, via.id, via.source),
                    span.clone(),
                ));
            }
            if via.flow != *flow {
                report.push(Diagnostic::error(
                    rules::EMISSION_FLOW_MISMATCH,
                    format!("`{}` emits `{flow}` via `{}`, which carries `{}`", entity.id, via.id, via.flow),
                    span,
                ));
            }
        }
    }
}

fn check_contexts(model: &WorldModel, report: &mut Report) {
    for ctx in model.contexts.values() {
        for em in &ctx.emissions {
            let span = model.span(&SpanKey::Emission(ctx.id.clone(), em.clone()));
            let emitter_is_env = match model.entities.get(&em.entity) {
                Some(e) => e.kind == EntityKind::Environment,
                None => {
                    report.push(Diagnostic::error(
                        rules::UNRESOLVED_REFERENCE,
                        format!("context `{}` emits from undeclared entity `{}`", ctx.id, em.entity),
                        span.clone(),
                    ));
                    continue;
                }
            };
            if !emitter_is_env {
                report.push(Diagnostic::error(
                    rules::EMISSION_NOT_INBOUND,
                    format!("context `{}` emits from `{}`, which is not an environment entity", ctx.id, em.entity),
                    span.clone(),
                ));
            }
            let Some(via) = model.interactions.get(&em.via) else {
                report.push(Diagnostic::error(
                    rules::UNRESOLVED_REFERENCE,
                    format!("context `{}` emits via undeclared interaction `{}`", ctx.id, em.via),
                    span,
                ));
                continue;
            };
            if via.source != em.entity {
                report.push(Diagnostic::error(
                    rules::EMISSION_SOURCE_MISMATCH,
                    format!(
                        "context `{}` emits from `{}` via `{}`, whose source is `{}`",
                        ctx.id, em.entity, via.id, via.source
                    ),
                    span.clone(),
                ));
            }
            if via.flow != em.flow {
                report.push(Diagnostic::error(
                    rules::EMISSION_FLOW_MISMATCH,
                    format!(
                        "context `{}` emits `{}` via `{}`, which carries `{}`",
                        ctx.id, em.flow, via.id, via.flow
                    ),
                    span.clone(),
                ));
            }
            if emitter_is_env
                && classify_interaction(via, &model.boundary)
                    .map(|c| c != InteractionClass::Inbound)
                    .unwrap_or(false)
            {
                report.push(Diagnostic::error(
                    rules::EMISSION_NOT_INBOUND,
                    format!("context `{}` emits via `{}`, which is not inbound", ctx.id, via.id),
                    span,
                ));
            }
        }
    }
}

fn check_outcomes(model: &WorldModel, report: &mut Report) {
    for outcome in model.outcomes.values() {
        let span = model.span(&SpanKey::Outcome(outcome.id.clone()));
        if outcome.groundings.is_empty() {
            report.push(Diagnostic::warning(
                rules::OUTCOME_WITHOUT_GROUNDING,
                format!("outcome `{}` declares no grounding alternative and can never hold", outcome.id),
                span.clone(),
            ));
            continue;
        }
        for alternative in &outcome.groundings {
            let mut resolved = true;
            let mut has_internal_endpoint = false;
            for id in alternative {
                let Some(ir) = model.interactions.get(id) else {
                    resolved = false;
                    report.push(Diagnostic::error(
                        rules::UNRESOLVED_REFERENCE,
                        format!("outcome `{}` is grounded on undeclared interaction `{id}`", outcome.id),
                        span.clone(),
                    ));
                    continue;
                };
                match classify_interaction(ir, &model.boundary) {
                    Ok(InteractionClass::External) => {
                        report.push(Diagnostic::error(
                            rules::GROUNDING_EXTERNAL_INTERACTION,
                            format!(
                                "outcome `{}` is grounded on `{id}`, which lies wholly outside the boundary",
                                outcome.id
                            ),
                            span.clone(),
                        ));
                    }
                    Ok(_) => has_internal_endpoint = true,
                    Err(_) => resolved = false,
                }
            }
            if resolved && !has_internal_endpoint {
                let listed =
                    alternative.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ");
                report.push(Diagnostic::error(
                    rules::UNGROUNDED_OUTCOME,
                    format!(
                        "outcome `{}` alternative {{{listed}}} involves the system in no way",
                        outcome.id
                    ),
                    span.clone(),
                ));
            }
        }
    }
}

fn check_desired(model: &WorldModel, report: &mut Report) {
    let goals = model.goals();
    for (outcome_id, linked_goals) in &model.desired {
        let span = model.span(&SpanKey::Outcome(outcome_id.clone()));
        let Some(outcome) = model.outcomes.get(outcome_id) else {
            report.push(Diagnostic::error(
                rules::UNRESOLVED_REFERENCE,
                format!("desired link names undeclared outcome `{outcome_id}`"),
                span,
            ));
            continue;
        };
        for goal in linked_goals {
            if !goals.contains_key(goal) {
                report.push(Diagnostic::error(
                    rules::UNRESOLVED_REFERENCE,
                    format!("outcome `{outcome_id}` supports undeclared goal `{goal}`"),
                    span.clone(),
                ));
            }
        }
        if let Ok(OutcomeClass::Internal) = classify_outcome(model, outcome) {
            report.push(Diagnostic::warning(
                rules::DESIRED_OUTCOME_NOT_EXTERNAL,
                format!("desired outcome `{outcome_id}` is classified internal; desire is meaningful only for externally visible outcomes"),
                span.clone(),
            ));
        }
    }
}

fn check_requirements(model: &WorldModel, report: &mut Report) {
    for req in model.requirements.values() {
        let span = model.span(&SpanKey::Requirement(req.id.clone()));
        if !model.entities.contains_key(&req.subject) {
            report.push(Diagnostic::error(
                rules::UNRESOLVED_REFERENCE,
                format!("requirement `{}` names undeclared subject `{}`", req.id, req.subject),
                span.clone(),
            ));
        } else if !model.is_internal(&req.subject) {
            report.push(Diagnostic::error(
                rules::SUBJECT_NOT_INTERNAL,
                format!("requirement `{}` obligates `{}`, which is not part of the system", req.id, req.subject),
                span.clone(),
            ));
        }
        if let Some(ctx) = &req.condition {
            if !model.contexts.contains_key(ctx) {
                report.push(Diagnostic::error(
                    rules::UNRESOLVED_REFERENCE,
                    format!("requirement `{}` is conditioned on undeclared context `{ctx}`", req.id),
                    span.clone(),
                ));
            }
        }
    }
}

/// Openness: at least one admissible interaction must cross the boundary,
/// else the declared system cannot serve anyone.
fn check_openness(model: &WorldModel, report: &mut Report) {
    if model.entities.is_empty() {
        return;
    }
    let crossing = model.interactions.values().any(|ir| {
        matches!(
            classify_interaction(ir, &model.boundary),
            Ok(InteractionClass::Inbound | InteractionClass::Outbound)
        ) && model.resolve_receiver(ir).is_admissible()
    });
    if !crossing {
        report.push(Diagnostic::warning(
            rules::CLOSED_SYSSOL,
            "no admissible interaction crosses the boundary; the system is closed",
            model.meta.span(&SpanKey::Boundary),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// env --ping--> core --pong--> sink, with coherent kinds and boundary.
    fn small_valid() -> WorldModel {
        let mut m = WorldModel::default();

        let mut core = Entity::new("core", EntityKind::InternalFunction);
        core.functions.push(FunctionSpec {
            name: "main".into(),
            domain: [FlowTypeId::from("ping")].into(),
            codomain: [FlowTypeId::from("pong")].into(),
            output_map: BTreeMap::from([(
                FlowTypeId::from("ping"),
                BTreeSet::from([FlowTypeId::from("pong")]),
            )]),
            firing: FiringRule::All,
            states: None,
        });
        m.entities.insert(core.id.clone(), core);

        let mut sink = Entity::new("sink", EntityKind::ExternalSystem);
        sink.functions.push(FunctionSpec {
            name: "take".into(),
            domain: [FlowTypeId::from("pong")].into(),
            codomain: [FlowTypeId::from("pong")].into(),
            output_map: BTreeMap::new(),
            firing: FiringRule::All,
            states: None,
        });
        m.entities.insert(sink.id.clone(), sink);

        let mut env = Entity::new("field", EntityKind::Environment);
        env.emits.insert((FlowTypeId::from("ping"), InteractionId::from("in")));
        m.entities.insert(env.id.clone(), env);

        for (id, src, dst, flow) in
            [("in", "field", "core", "ping"), ("out", "core", "sink", "pong")]
        {
            m.interactions.insert(
                InteractionId::from(id),
                Interaction {
                    id: InteractionId::from(id),
                    source: EntityId::from(src),
                    dest: EntityId::from(dst),
                    flow: FlowTypeId::from(flow),
                    interface: None,
                    recv_function: None,
                },
            );
        }

        m.boundary.internal.insert(EntityId::from("core"));
        m.boundary.external.extend([EntityId::from("sink"), EntityId::from("field")]);

        let mut ctx = ContextDecl { id: ContextId::from("run"), emissions: BTreeSet::new() };
        ctx.emissions.insert(Emission {
            entity: EntityId::from("field"),
            flow: FlowTypeId::from("ping"),
            via: InteractionId::from("in"),
        });
        m.contexts.insert(ctx.id.clone(), ctx);

        m.outcomes.insert(
            OutcomeId::from("served"),
            OutcomeDecl {
                id: OutcomeId::from("served"),
                description: "sink is served".into(),
                groundings: BTreeSet::from([BTreeSet::from([InteractionId::from("out")])]),
            },
        );
        m
    }

    #[test]
    fn valid_model_yields_empty_report() {
        let report = validate_model(&small_valid());
        assert!(report.is_clean(), "unexpected diagnostics: {:#?}", report.diagnostics);
    }

    #[test]
    fn empty_model_is_flagged() {
        let report = validate_model(&WorldModel::default());
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::NO_ENTITIES));
    }

    #[test]
    fn entity_on_both_sides_breaks_the_partition() {
        let mut m = small_valid();
        m.boundary.external.insert(EntityId::from("core"));
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::BOUNDARY_NOT_PARTITION));
    }

    #[test]
    fn uncommitted_entity_breaks_the_partition() {
        let mut m = small_valid();
        m.boundary.external.remove(&EntityId::from("sink"));
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::BOUNDARY_NOT_PARTITION));
    }

    #[test]
    fn env_inside_the_boundary_is_rejected() {
        let mut m = small_valid();
        m.boundary.external.remove(&EntityId::from("field"));
        m.boundary.internal.insert(EntityId::from("field"));
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::ENV_CANNOT_BE_INTERNAL));
    }

    #[test]
    fn inadmissible_interaction_flow_is_rejected() {
        let mut m = small_valid();
        m.interactions.get_mut(&InteractionId::from("out")).unwrap().flow =
            FlowTypeId::from("ping");
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::INADMISSIBLE_FLOW));
    }

    #[test]
    fn unaccepted_flow_type_is_rejected() {
        let mut m = small_valid();
        // `main` now also produces `telemetry`, which no domain accepts.
        let core = m.entities.get_mut(&EntityId::from("core")).unwrap();
        core.functions[0].codomain.insert(FlowTypeId::from("telemetry"));
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::FLOW_NEVER_ACCEPTED));
    }

    #[test]
    fn transition_outside_state_space_is_rejected() {
        let mut m = small_valid();
        let core = m.entities.get_mut(&EntityId::from("core")).unwrap();
        core.functions[0].states = Some(StateMachine {
            states: BTreeSet::from(["Idle".to_string()]),
            initial: "Idle".into(),
            transitions: BTreeMap::from([(
                ("Idle".to_string(), FlowTypeId::from("ping")),
                "Ghost".to_string(),
            )]),
        });
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::UNKNOWN_STATE));
    }

    #[test]
    fn wholly_external_grounding_alternative_is_rejected() {
        let mut m = small_valid();
        m.interactions.insert(
            InteractionId::from("side"),
            Interaction {
                id: InteractionId::from("side"),
                source: EntityId::from("field"),
                dest: EntityId::from("sink"),
                flow: FlowTypeId::from("pong"),
                interface: None,
                recv_function: None,
            },
        );
        m.outcomes.insert(
            OutcomeId::from("bystander"),
            OutcomeDecl {
                id: OutcomeId::from("bystander"),
                description: String::new(),
                groundings: BTreeSet::from([BTreeSet::from([InteractionId::from("side")])]),
            },
        );
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::UNGROUNDED_OUTCOME));
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::GROUNDING_EXTERNAL_INTERACTION));
    }

    #[test]
    fn closed_system_is_a_warning_not_an_error() {
        let mut m = small_valid();
        m.interactions.clear();
        m.contexts.clear();
        m.outcomes.clear();
        m.entities.get_mut(&EntityId::from("field")).unwrap().emits.clear();
        let report = validate_model(&m);
        assert!(report.diagnostics.iter().any(|d| d.rule == rules::CLOSED_SYSSOL));
        assert!(!report.has_errors());
    }

    #[test]
    fn self_loop_rejected_unless_allowed() {
        let mut m = small_valid();
        m.interactions.insert(
            InteractionId::from("loopback"),
            Interaction {
                id: InteractionId::from("loopback"),
                source: EntityId::from("core"),
                dest: EntityId::from("core"),
                flow: FlowTypeId::from("ping"),
                interface: None,
                recv_function: None,
            },
        );
        assert!(validate_model(&m).diagnostics.iter().any(|d| d.rule == rules::SELF_LOOP));
        m.allow_self_loops = true;
        assert!(!validate_model(&m).diagnostics.iter().any(|d| d.rule == rules::SELF_LOOP));
    }
}
