//! Scheduled simulation of stateful entities.
//!
//! A schedule is a sequence of context activations. For each context, every
//! reported-active interaction delivers its flow once, in derivation order
//! (seeds before what they cause; ties broken by interaction id), to the
//! function that admits it. A function with a state machine takes its
//! declared transition; a machine with no transition for the delivered flow
//! stutters in place, which is recorded as a warning rather than a trace
//! step. Machine state persists from one scheduled context to the next.

use crate::activation::compute_active_set;
use crate::diag::{rules, Diagnostic};
use crate::error::EngineError;
use crate::ids::{ContextId, EntityId, FlowTypeId, InteractionId};
use crate::model::{Receiver, SpanKey, WorldModel};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// One applied transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub context: ContextId,
    pub entity: EntityId,
    pub function: String,
    pub before: String,
    pub input: FlowTypeId,
    pub via: InteractionId,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub steps: Vec<TraceStep>,
    /// Machine states after the whole schedule, per entity and function.
    pub final_states: BTreeMap<EntityId, BTreeMap<String, String>>,
    pub warnings: Vec<Diagnostic>,
}

/// Run `schedule` against the model's declared machines.
pub fn simulate(model: &WorldModel, schedule: &[ContextId]) -> Result<SimulationTrace, EngineError> {
    // Machine state per (entity, function), seeded from declared initials.
    let mut states: BTreeMap<(EntityId, String), String> = BTreeMap::new();
    for entity in model.entities.values() {
        for func in &entity.functions {
            if let Some(machine) = &func.states {
                states.insert((entity.id.clone(), func.name.clone()), machine.initial.clone());
            }
        }
    }

    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    let mut stutters_seen: BTreeSet<(EntityId, String, String, FlowTypeId)> = BTreeSet::new();

    for context in schedule {
        let active = compute_active_set(model, context)?;
        warnings.extend(active.warnings.iter().cloned());

        let mut deliveries: Vec<&InteractionId> = active.active.iter().collect();
        deliveries.sort_by_key(|id| (active.layers[*id], (*id).clone()));

        for id in deliveries {
            let ir = &model.interactions[id];
            let Receiver::Function(fn_name) = model.resolve_receiver(ir) else { continue };
            let entity = &model.entities[&ir.dest];
            let Some(func) = entity.function(&fn_name) else { continue };
            let Some(machine) = &func.states else { continue };

            let key = (ir.dest.clone(), fn_name.clone());
            let before = states[&key].clone();
            match machine.transitions.get(&(before.clone(), ir.flow.clone())) {
                Some(after) => {
                    steps.push(TraceStep {
                        context: context.clone(),
                        entity: ir.dest.clone(),
                        function: fn_name.clone(),
                        before: before.clone(),
                        input: ir.flow.clone(),
                        via: id.clone(),
                        after: after.clone(),
                    });
                    states.insert(key, after.clone());
                }
                None => {
                    let fingerprint = (ir.dest.clone(), fn_name.clone(), before.clone(), ir.flow.clone());
                    if stutters_seen.insert(fingerprint) {
                        warnings.push(Diagnostic::warning(
                            rules::NO_TRANSITION,
                            format!(
                                "`{fn_name}` on `{}` has no transition from `{before}` on `{}`; state unchanged",
                                ir.dest, ir.flow
                            ),
                            model.span(&SpanKey::Interaction(id.clone())),
                        ));
                    }
                }
            }
        }
    }

    let mut final_states: BTreeMap<EntityId, BTreeMap<String, String>> = BTreeMap::new();
    for ((entity, function), state) in states {
        final_states.entry(entity).or_default().insert(function, state);
    }
    Ok(SimulationTrace { steps, final_states, warnings })
}
