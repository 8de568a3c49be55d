//! Outcome truth and its behaviour across contexts.
//!
//! An outcome's grounding is a disjunction of alternatives, each a set of
//! interactions that must all carry flows for that alternative to hold. An
//! outcome is true in a context exactly when some alternative is wholly
//! contained in the context's carried set. Because truth reads the carried
//! set rather than the boundary-filtered view, verdicts do not move when
//! the boundary does.

use crate::activation::{compute_active_set, ActiveSet};
use crate::classify::{classify_outcome, OutcomeClass};
use crate::error::EngineError;
use crate::ids::{ContextId, InteractionId, OutcomeId};
use crate::model::WorldModel;
use serde::Serialize;
use std::collections::BTreeSet;

/// The verdict for one outcome in one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeEval {
    pub outcome: OutcomeId,
    pub context: ContextId,
    pub truth: bool,
    pub class: OutcomeClass,
    /// The first grounding alternative wholly carried, when the outcome is
    /// true; evidence for the verdict.
    pub witness: Option<BTreeSet<InteractionId>>,
}

/// Truth of one grounding against a carried set, with the first satisfied
/// alternative as witness.
pub fn grounding_truth(
    groundings: &BTreeSet<BTreeSet<InteractionId>>,
    carried: &BTreeSet<InteractionId>,
) -> Option<BTreeSet<InteractionId>> {
    groundings.iter().find(|alt| alt.iter().all(|ir| carried.contains(ir))).cloned()
}

/// Evaluate one outcome in one context.
///
/// Fails on a grounding alternative with no endpoint on an internal entity:
/// such a declaration asserts nothing about the system under design, and
/// evaluating it would silently answer a different question.
pub fn evaluate_outcome(
    model: &WorldModel,
    outcome: &OutcomeId,
    context: &ContextId,
) -> Result<OutcomeEval, EngineError> {
    let active = compute_active_set(model, context)?;
    evaluate_against(model, outcome, &active, true)
}

/// Evaluate against an already-computed activation. `guard_grounding`
/// controls the internal-endpoint check; boundary-independence audits turn
/// it off because the guard itself reads the boundary.
pub fn evaluate_against(
    model: &WorldModel,
    outcome: &OutcomeId,
    active: &ActiveSet,
    guard_grounding: bool,
) -> Result<OutcomeEval, EngineError> {
    let decl = model.outcomes.get(outcome).ok_or_else(|| EngineError::UnknownOutcome(outcome.clone()))?;

    if guard_grounding {
        for alt in &decl.groundings {
            let touches_internal = alt.iter().any(|ir_id| {
                model.interactions.get(ir_id).is_some_and(|ir| {
                    model.is_internal(&ir.source) || model.is_internal(&ir.dest)
                })
            });
            if !touches_internal {
                return Err(EngineError::UngroundedOutcome {
                    outcome: outcome.clone(),
                    alternative: alt.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "),
                });
            }
        }
    }

    let witness = grounding_truth(&decl.groundings, &active.carried);
    Ok(OutcomeEval {
        outcome: outcome.clone(),
        context: active.context.clone(),
        truth: witness.is_some(),
        class: classify_outcome(model, decl)?,
        witness,
    })
}

/// Why two evaluations of the same outcome agree or disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Invariance {
    /// Same truth in both contexts, established by a shared witness (or by
    /// shared falsity); the witness is carried in both.
    Invariant { truth: bool, witness: BTreeSet<InteractionId> },
    /// Different truth values; the listed interactions are carried in
    /// exactly one of the two contexts and ground the outcome.
    Differs {
        first: bool,
        second: bool,
        only_first: BTreeSet<InteractionId>,
        only_second: BTreeSet<InteractionId>,
    },
    /// Same truth value, but no single alternative witnesses it in both
    /// contexts — the agreement is coincidental, not structural.
    NotComparable { truth: bool },
}

/// Compare one outcome across two contexts.
pub fn check_invariance(
    model: &WorldModel,
    outcome: &OutcomeId,
    first: &ContextId,
    second: &ContextId,
) -> Result<Invariance, EngineError> {
    let decl = model.outcomes.get(outcome).ok_or_else(|| EngineError::UnknownOutcome(outcome.clone()))?;
    let a = compute_active_set(model, first)?;
    let b = compute_active_set(model, second)?;

    let truth_a = grounding_truth(&decl.groundings, &a.carried).is_some();
    let truth_b = grounding_truth(&decl.groundings, &b.carried).is_some();

    if truth_a != truth_b {
        let relevant: BTreeSet<InteractionId> =
            decl.groundings.iter().flatten().cloned().collect();
        let only_first =
            relevant.iter().filter(|i| a.carried.contains(*i) && !b.carried.contains(*i)).cloned().collect();
        let only_second =
            relevant.iter().filter(|i| b.carried.contains(*i) && !a.carried.contains(*i)).cloned().collect();
        return Ok(Invariance::Differs { first: truth_a, second: truth_b, only_first, only_second });
    }

    if truth_a {
        // Same truth; structural only if one alternative is carried in both.
        let shared = decl
            .groundings
            .iter()
            .find(|alt| alt.iter().all(|ir| a.carried.contains(ir) && b.carried.contains(ir)));
        match shared {
            Some(alt) => Ok(Invariance::Invariant { truth: true, witness: alt.clone() }),
            None => Ok(Invariance::NotComparable { truth: true }),
        }
    } else {
        // Both false: falsity needs no witness.
        Ok(Invariance::Invariant { truth: false, witness: BTreeSet::new() })
    }
}
