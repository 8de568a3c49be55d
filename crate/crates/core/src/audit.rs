//! Sufficiency audit: is the model complete enough to answer the questions
//! asked of it?
//!
//! For every desired outcome in every context the audit fills a four-cell
//! checklist: the boundary commits every entity to one side with a
//! non-empty inside; the grounding interactions are declared; the declared
//! ones resolve to an admissible receiver; and the outcome is grounded at
//! all, in alternatives that touch the system under design. Truth verdicts
//! are reported only when every cell holds — on an insufficient model they
//! would be answers to a question the model cannot yet ask.
//!
//! The audit never fails on missing declarations; absence is its subject
//! matter. Cells are scoped so a defect shows up in the construct that owns
//! it: an undeclared grounding interaction marks the declaration cell, and
//! is excluded from the admissibility cell rather than poisoning it.

use crate::error::EngineError;
use crate::ids::{ContextId, GoalId, InteractionId, OutcomeId, StakeholderId};
use crate::minimal::truth_table;
use crate::model::WorldModel;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Checklist construct names, in audit order.
pub const CONSTRUCT_BOUNDARY: &str = "boundary-committed";
pub const CONSTRUCT_DECLARED: &str = "grounding-interactions-declared";
pub const CONSTRUCT_ADMISSIBLE: &str = "admissibility-resolvable";
pub const CONSTRUCT_GROUNDED: &str = "grounded-in-system";

pub const CONSTRUCTS: [&str; 4] =
    [CONSTRUCT_BOUNDARY, CONSTRUCT_DECLARED, CONSTRUCT_ADMISSIBLE, CONSTRUCT_GROUNDED];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChecklistRow {
    pub outcome: OutcomeId,
    pub context: ContextId,
    pub constructs: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthCell {
    pub outcome: OutcomeId,
    pub context: ContextId,
    pub truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficiencyReport {
    /// "sufficient" when every checklist cell holds, else "insufficient".
    pub verdict: String,
    pub checklist: Vec<ChecklistRow>,
    /// Every declared goal, mapped to the desired outcomes linked to it.
    pub goal_support: BTreeMap<GoalId, BTreeSet<OutcomeId>>,
    /// Desired-outcome verdicts per context; present only on a sufficient,
    /// non-vacuous model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truths: Option<Vec<TruthCell>>,
    pub flags: Vec<String>,
}

impl SufficiencyReport {
    pub fn is_sufficient(&self) -> bool {
        self.verdict == "sufficient"
    }

    pub fn failing_cells(&self) -> usize {
        self.checklist.iter().map(|r| r.constructs.values().filter(|v| !**v).count()).sum()
    }
}

fn boundary_committed(model: &WorldModel) -> bool {
    !model.boundary.internal.is_empty()
        && model.entities.keys().all(|id| {
            model.boundary.internal.contains(id) != model.boundary.external.contains(id)
        })
        && model.boundary.internal.iter().all(|id| model.entities.contains_key(id))
        && model.boundary.external.iter().all(|id| model.entities.contains_key(id))
}

fn touches_internal(model: &WorldModel, ir: &InteractionId) -> bool {
    model
        .interactions
        .get(ir)
        .is_some_and(|ir| model.is_internal(&ir.source) || model.is_internal(&ir.dest))
}

/// Fill the checklist for every desired outcome across every context.
pub fn audit_sufficiency(model: &WorldModel) -> Result<SufficiencyReport, EngineError> {
    let mut flags = Vec::new();
    if model.desired.is_empty() {
        flags.push("vacuous".to_string());
    }

    let boundary_ok = boundary_committed(model);
    let mut checklist = Vec::new();
    for outcome_id in model.desired.keys() {
        let groundings = model
            .outcomes
            .get(outcome_id)
            .map(|o| o.groundings.clone())
            .unwrap_or_default();
        let members: BTreeSet<&InteractionId> = groundings.iter().flatten().collect();
        let declared = members.iter().all(|ir| model.interactions.contains_key(*ir));
        let admissible = members
            .iter()
            .filter_map(|ir| model.interactions.get(*ir))
            .all(|ir| model.resolve_receiver(ir).is_admissible());
        let grounded = !groundings.is_empty()
            && groundings.iter().all(|alt| alt.iter().any(|ir| touches_internal(model, ir)));

        for context in model.contexts.keys() {
            checklist.push(ChecklistRow {
                outcome: outcome_id.clone(),
                context: context.clone(),
                constructs: BTreeMap::from([
                    (CONSTRUCT_BOUNDARY.to_string(), boundary_ok),
                    (CONSTRUCT_DECLARED.to_string(), declared),
                    (CONSTRUCT_ADMISSIBLE.to_string(), admissible),
                    (CONSTRUCT_GROUNDED.to_string(), grounded),
                ]),
            });
        }
    }

    let sufficient = checklist.iter().all(|row| row.constructs.values().all(|v| *v));
    let verdict = if sufficient { "sufficient" } else { "insufficient" }.to_string();

    let mut goal_support: BTreeMap<GoalId, BTreeSet<OutcomeId>> = BTreeMap::new();
    for stakeholder in model.stakeholders.values() {
        for goal in stakeholder.goals.keys() {
            goal_support.entry(goal.clone()).or_default();
        }
    }
    for (outcome, goals) in &model.desired {
        for goal in goals {
            goal_support.entry(goal.clone()).or_default().insert(outcome.clone());
        }
    }

    let truths = if sufficient && !model.desired.is_empty() {
        let outcomes: Vec<OutcomeId> = model.desired.keys().cloned().collect();
        let contexts: Vec<ContextId> = model.contexts.keys().cloned().collect();
        let table = truth_table(model, &outcomes, &contexts)?;
        Some(
            table
                .into_iter()
                .map(|((outcome, context), truth)| TruthCell { outcome, context, truth })
                .collect(),
        )
    } else {
        None
    };

    Ok(SufficiencyReport { verdict, checklist, goal_support, truths, flags })
}

/// One checklist cell the probe changed or newly failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCell {
    pub outcome: OutcomeId,
    pub context: ContextId,
    pub construct: String,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactReport {
    pub verdict: String,
    pub checklist: Vec<ChecklistRow>,
    pub goal_support: BTreeMap<GoalId, BTreeSet<OutcomeId>>,
    /// Cells that flipped, plus new cells that fail. New cells that hold
    /// are not impact and are omitted.
    pub deltas: Vec<DeltaCell>,
}

/// Audit the model as if `outcome` were declared and desired (linked to
/// `goals`), reporting which checklist cells that would change.
pub fn impact_of_new_outcome(
    model: &WorldModel,
    outcome: crate::model::OutcomeDecl,
    goals: BTreeSet<GoalId>,
) -> Result<ImpactReport, EngineError> {
    if model.outcomes.contains_key(&outcome.id) {
        return Err(EngineError::OutcomeExists(outcome.id));
    }
    let before = audit_sufficiency(model)?;
    let mut probed = model.clone();
    probed.desired.insert(outcome.id.clone(), goals);
    probed.outcomes.insert(outcome.id.clone(), outcome);
    let after = audit_sufficiency(&probed)?;

    let prior: BTreeMap<(&OutcomeId, &ContextId), &BTreeMap<String, bool>> =
        before.checklist.iter().map(|r| ((&r.outcome, &r.context), &r.constructs)).collect();
    let mut deltas = Vec::new();
    for row in &after.checklist {
        let old = prior.get(&(&row.outcome, &row.context));
        for (construct, value) in &row.constructs {
            let changed = match old.and_then(|c| c.get(construct)) {
                Some(previous) => previous != value,
                None => !*value,
            };
            if changed {
                deltas.push(DeltaCell {
                    outcome: row.outcome.clone(),
                    context: row.context.clone(),
                    construct: construct.clone(),
                    satisfied: *value,
                });
            }
        }
    }

    Ok(ImpactReport {
        verdict: after.verdict,
        checklist: after.checklist,
        goal_support: after.goal_support,
        deltas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalRow {
    pub stakeholder: StakeholderId,
    pub goal: GoalId,
    /// Some desired outcome links to this goal.
    pub supported: bool,
    /// Supported, and every linked outcome holds in every context.
    pub satisfied: bool,
    pub outcomes: BTreeSet<OutcomeId>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalReport {
    pub verdict: String,
    pub goals: Vec<GoalRow>,
}

/// Decide each declared goal, refusing to answer on an insufficient model.
pub fn check_goal_satisfaction(model: &WorldModel) -> Result<GoalReport, EngineError> {
    let audit = audit_sufficiency(model)?;
    if !audit.is_sufficient() {
        return Err(EngineError::InsufficientModel(audit.failing_cells()));
    }

    let contexts: Vec<ContextId> = model.contexts.keys().cloned().collect();
    let desired: Vec<OutcomeId> = model.desired.keys().cloned().collect();
    let table = truth_table(model, &desired, &contexts)?;

    let mut goals = Vec::new();
    for stakeholder in model.stakeholders.values() {
        for goal in stakeholder.goals.keys() {
            let outcomes: BTreeSet<OutcomeId> = model
                .desired
                .iter()
                .filter(|(_, gs)| gs.contains(goal))
                .map(|(oc, _)| oc.clone())
                .collect();
            let supported = !outcomes.is_empty();
            let satisfied = supported
                && outcomes
                    .iter()
                    .all(|oc| contexts.iter().all(|c| table[&(oc.clone(), c.clone())]));
            let flags = if supported { Vec::new() } else { vec!["unsupported-goal".to_string()] };
            goals.push(GoalRow {
                stakeholder: stakeholder.id.clone(),
                goal: goal.clone(),
                supported,
                satisfied,
                outcomes,
                flags,
            });
        }
    }

    let verdict =
        if goals.iter().all(|g| g.satisfied) { "satisfied" } else { "unsatisfied" }.to_string();
    Ok(GoalReport { verdict, goals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{EntityId, FlowTypeId};
    use crate::model::{
        ContextDecl, Emission, Entity, EntityKind, FiringRule, FunctionSpec, Interaction,
        OutcomeDecl, Stakeholder,
    };

    /// env --feed--> head --tail--> sink; `delivered` desired for g_serve;
    /// a second goal g_idle has no support.
    fn serviced() -> WorldModel {
        let mut m = WorldModel::default();
        let mut env = Entity::new("env_in", EntityKind::Environment);
        env.emits.insert((FlowTypeId::from("seed"), InteractionId::from("a_feed")));
        m.entities.insert(env.id.clone(), env);
        m.boundary.external.insert(EntityId::from("env_in"));

        let mut head = Entity::new("head", EntityKind::InternalFunction);
        head.functions.push(FunctionSpec {
            name: "work".into(),
            domain: [FlowTypeId::from("seed")].into(),
            codomain: [FlowTypeId::from("result")].into(),
            output_map: BTreeMap::from([(
                FlowTypeId::from("seed"),
                BTreeSet::from([FlowTypeId::from("result")]),
            )]),
            firing: FiringRule::All,
            states: None,
        });
        m.entities.insert(head.id.clone(), head);
        m.boundary.internal.insert(EntityId::from("head"));

        let mut sink = Entity::new("sink", EntityKind::ExternalSystem);
        sink.functions.push(FunctionSpec {
            name: "take".into(),
            domain: [FlowTypeId::from("seed"), FlowTypeId::from("result")].into(),
            codomain: [FlowTypeId::from("result")].into(),
            output_map: BTreeMap::new(),
            firing: FiringRule::Any,
            states: None,
        });
        m.entities.insert(sink.id.clone(), sink);
        m.boundary.external.insert(EntityId::from("sink"));

        for (id, src, dst, flow) in
            [("a_feed", "env_in", "head", "seed"), ("b_tail", "head", "sink", "result")]
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

        let mut ctx = ContextDecl { id: ContextId::from("on"), emissions: BTreeSet::new() };
        ctx.emissions.insert(Emission {
            entity: EntityId::from("env_in"),
            flow: FlowTypeId::from("seed"),
            via: InteractionId::from("a_feed"),
        });
        m.contexts.insert(ctx.id.clone(), ctx);

        m.outcomes.insert(
            OutcomeId::from("delivered"),
            OutcomeDecl {
                id: OutcomeId::from("delivered"),
                description: "result reaches the sink".into(),
                groundings: [[InteractionId::from("b_tail")].into()].into(),
            },
        );
        m.desired.insert(OutcomeId::from("delivered"), BTreeSet::from([GoalId::from("g_serve")]));

        let mut ops = Stakeholder { id: StakeholderId::from("ops"), goals: BTreeMap::new() };
        ops.goals.insert(GoalId::from("g_serve"), "results keep coming".into());
        ops.goals.insert(GoalId::from("g_idle"), "nothing else to want".into());
        m.stakeholders.insert(ops.id.clone(), ops);
        m
    }

    #[test]
    fn complete_model_audits_sufficient_with_truths() {
        let r = audit_sufficiency(&serviced()).unwrap();
        assert!(r.is_sufficient());
        assert_eq!(r.checklist.len(), 1);
        assert!(r.checklist[0].constructs.values().all(|v| *v));
        assert_eq!(
            r.truths,
            Some(vec![TruthCell {
                outcome: OutcomeId::from("delivered"),
                context: ContextId::from("on"),
                truth: true,
            }])
        );
        assert_eq!(r.goal_support[&GoalId::from("g_serve")], BTreeSet::from([OutcomeId::from("delivered")]));
        assert!(r.goal_support[&GoalId::from("g_idle")].is_empty());
    }

    #[test]
    fn uncommitted_entity_fails_only_the_boundary_cell() {
        let mut m = serviced();
        m.boundary.external.remove(&EntityId::from("sink"));
        let r = audit_sufficiency(&m).unwrap();
        assert!(!r.is_sufficient());
        assert_eq!(r.truths, None);
        let cells = &r.checklist[0].constructs;
        assert!(!cells[CONSTRUCT_BOUNDARY]);
        assert!(cells[CONSTRUCT_DECLARED] && cells[CONSTRUCT_ADMISSIBLE] && cells[CONSTRUCT_GROUNDED]);
    }

    #[test]
    fn no_desired_outcomes_is_vacuously_sufficient() {
        let mut m = serviced();
        m.desired.clear();
        let r = audit_sufficiency(&m).unwrap();
        assert!(r.is_sufficient());
        assert!(r.checklist.is_empty());
        assert_eq!(r.truths, None);
        assert!(r.flags.contains(&"vacuous".to_string()));
    }

    #[test]
    fn ungrounded_probe_marks_only_the_grounding_cell() {
        let m = serviced();
        let probe = OutcomeDecl {
            id: OutcomeId::from("someday"),
            description: "unmodelled hope".into(),
            groundings: BTreeSet::new(),
        };
        let r = impact_of_new_outcome(&m, probe, BTreeSet::from([GoalId::from("g_idle")])).unwrap();
        assert_eq!(r.verdict, "insufficient");
        assert_eq!(r.deltas.len(), 1);
        assert_eq!(r.deltas[0].construct, CONSTRUCT_GROUNDED);
        assert!(!r.deltas[0].satisfied);
        assert_eq!(r.deltas[0].outcome, OutcomeId::from("someday"));
        // The probe's support registers, but existing cells are untouched.
        assert_eq!(r.goal_support[&GoalId::from("g_idle")], BTreeSet::from([OutcomeId::from("someday")]));
    }

    #[test]
    fn probe_with_existing_id_is_refused() {
        let m = serviced();
        let dup = OutcomeDecl {
            id: OutcomeId::from("delivered"),
            description: String::new(),
            groundings: BTreeSet::new(),
        };
        assert_eq!(
            impact_of_new_outcome(&m, dup, BTreeSet::new()),
            Err(EngineError::OutcomeExists(OutcomeId::from("delivered")))
        );
    }

    #[test]
    fn goals_settle_per_their_linked_outcomes() {
        let r = check_goal_satisfaction(&serviced()).unwrap();
        assert_eq!(r.verdict, "unsatisfied");
        let by_goal: BTreeMap<&GoalId, &GoalRow> = r.goals.iter().map(|g| (&g.goal, g)).collect();
        assert!(by_goal[&GoalId::from("g_serve")].satisfied);
        let idle = by_goal[&GoalId::from("g_idle")];
        assert!(!idle.supported && !idle.satisfied);
        assert!(idle.flags.contains(&"unsupported-goal".to_string()));
    }

    #[test]
    fn satisfaction_quantifies_over_every_context() {
        let mut m = serviced();
        m.contexts.insert(
            ContextId::from("off"),
            ContextDecl { id: ContextId::from("off"), emissions: BTreeSet::new() },
        );
        let r = check_goal_satisfaction(&m).unwrap();
        let serve = r.goals.iter().find(|g| g.goal == GoalId::from("g_serve")).unwrap();
        // `delivered` fails in the silent context, so the goal does too.
        assert!(!serve.satisfied);
    }

    #[test]
    fn insufficient_models_refuse_goal_questions() {
        let mut m = serviced();
        m.boundary.external.remove(&EntityId::from("sink"));
        assert_eq!(check_goal_satisfaction(&m), Err(EngineError::InsufficientModel(1)));
    }
}
