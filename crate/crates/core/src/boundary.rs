//! Boundary placement and what may legitimately depend on it.
//!
//! Rescoping redraws the boundary over the same declared universe. Entities
//! crossing the line are re-kinded to keep kind and side coherent —
//! functions and relay entries travel with them — while environment
//! entities are pinned outside. Because activation derives from declared
//! structure alone, a rescope changes interaction *classification* and the
//! reported active view, but never which flows are carried, and therefore
//! never an outcome's truth. [`verify_boundary_independence`] checks that
//! claim on two concrete models instead of assuming it.

use crate::activation::compute_active_set;
use crate::classify::{classify_interaction, classify_outcome, InteractionClass, OutcomeClass};
use crate::error::EngineError;
use crate::ids::{ContextId, EntityId, InteractionId, OutcomeId};
use crate::model::{Boundary, EntityKind, WorldModel};
use crate::outcomes::grounding_truth;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// What a rescope changed: entity movements and the interactions whose
/// classification flipped. Interactions keeping their class are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescopePlan {
    pub moved_in: BTreeSet<EntityId>,
    pub moved_out: BTreeSet<EntityId>,
    pub reclassified: BTreeMap<InteractionId, (InteractionClass, InteractionClass)>,
}

/// Redraw the boundary so that exactly `internal` is inside.
///
/// Non-environment entities take the kind their new side requires; an
/// environment entity inside the new boundary is refused, as is an empty
/// one. Applying the same rescope twice is a no-op the second time.
pub fn rescope(
    model: &WorldModel,
    internal: &BTreeSet<EntityId>,
) -> Result<(WorldModel, RescopePlan), EngineError> {
    if internal.is_empty() {
        return Err(EngineError::EmptyRescope);
    }
    for id in internal {
        let entity = model
            .entities
            .get(id)
            .ok_or_else(|| EngineError::ModelIntegrity(format!("rescope names undeclared entity `{id}`")))?;
        if entity.kind == EntityKind::Environment {
            return Err(EngineError::EnvCannotBeInternal(id.clone()));
        }
    }

    let old_classes: BTreeMap<InteractionId, InteractionClass> = model
        .interactions
        .values()
        .filter_map(|ir| {
            classify_interaction(ir, &model.boundary).ok().map(|c| (ir.id.clone(), c))
        })
        .collect();

    let mut rescoped = model.clone();
    rescoped.boundary = Boundary {
        internal: internal.clone(),
        external: model.entities.keys().filter(|id| !internal.contains(*id)).cloned().collect(),
    };
    for entity in rescoped.entities.values_mut() {
        if entity.kind == EntityKind::Environment {
            continue;
        }
        entity.kind = if internal.contains(&entity.id) {
            EntityKind::InternalFunction
        } else {
            EntityKind::ExternalSystem
        };
    }

    let reclassified = rescoped
        .interactions
        .values()
        .filter_map(|ir| {
            let old = old_classes.get(&ir.id)?;
            let new = classify_interaction(ir, &rescoped.boundary).ok()?;
            (*old != new).then(|| (ir.id.clone(), (*old, new)))
        })
        .collect();

    let plan = RescopePlan {
        moved_in: internal.difference(&model.boundary.internal).cloned().collect(),
        moved_out: model.boundary.internal.difference(internal).cloned().collect(),
        reclassified,
    };
    Ok((rescoped, plan))
}

/// One outcome's truth in one context, in each of the two models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRow {
    pub outcome: OutcomeId,
    pub context: ContextId,
    pub first: bool,
    pub second: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// True when every truth row agrees across the two models.
    pub invariant: bool,
    pub truth_rows: Vec<TruthRow>,
    pub interaction_changes: BTreeMap<InteractionId, (InteractionClass, InteractionClass)>,
    pub outcome_changes: BTreeMap<OutcomeId, (OutcomeClass, OutcomeClass)>,
}

/// Strip everything a rescope is allowed to change, for comparison.
fn normalized(model: &WorldModel) -> WorldModel {
    let mut m = model.clone();
    m.boundary = Boundary::default();
    for entity in m.entities.values_mut() {
        if entity.kind != EntityKind::Environment {
            entity.kind = EntityKind::InternalFunction;
        }
    }
    m
}

/// Check that two models are the same world under different boundaries and
/// report how outcome truth and classification compare.
///
/// Models differing in anything other than boundary placement and the
/// kinds it forces are rejected: the comparison would not be measuring
/// boundary placement.
pub fn verify_boundary_independence(
    first: &WorldModel,
    second: &WorldModel,
) -> Result<IndependenceReport, EngineError> {
    for (id, e) in &first.entities {
        match second.entities.get(id) {
            None => return Err(EngineError::NotARescope(format!("entity `{id}` is missing from the second model"))),
            Some(other) => {
                let first_env = e.kind == EntityKind::Environment;
                let second_env = other.kind == EntityKind::Environment;
                if first_env != second_env {
                    return Err(EngineError::NotARescope(format!(
                        "environment entity `{id}` changed kind"
                    )));
                }
            }
        }
    }
    if normalized(first) != normalized(second) {
        return Err(EngineError::NotARescope(
            "the models differ in declared structure, not just boundary placement".to_string(),
        ));
    }

    let mut truth_rows = Vec::new();
    for ctx in first.contexts.keys() {
        let a = compute_active_set(first, ctx)?;
        let b = compute_active_set(second, ctx)?;
        for (oc_id, oc) in &first.outcomes {
            truth_rows.push(TruthRow {
                outcome: oc_id.clone(),
                context: ctx.clone(),
                first: grounding_truth(&oc.groundings, &a.carried).is_some(),
                second: grounding_truth(&oc.groundings, &b.carried).is_some(),
            });
        }
    }
    let invariant = truth_rows.iter().all(|r| r.first == r.second);

    let mut interaction_changes = BTreeMap::new();
    for ir in first.interactions.values() {
        let (Ok(before), Ok(after)) = (
            classify_interaction(ir, &first.boundary),
            classify_interaction(&second.interactions[&ir.id], &second.boundary),
        ) else {
            continue;
        };
        if before != after {
            interaction_changes.insert(ir.id.clone(), (before, after));
        }
    }

    let mut outcome_changes = BTreeMap::new();
    for (oc_id, decl) in &first.outcomes {
        let (Ok(before), Ok(after)) =
            (classify_outcome(first, decl), classify_outcome(second, &second.outcomes[oc_id]))
        else {
            continue;
        };
        if before != after {
            outcome_changes.insert(oc_id.clone(), (before, after));
        }
    }

    Ok(IndependenceReport { invariant, truth_rows, interaction_changes, outcome_changes })
}
