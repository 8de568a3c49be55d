//! Determination analysis: which interactions an outcome's truth actually
//! depends on, across a family of contexts.
//!
//! A set of interactions J *determines* an outcome over a context family
//! when the outcome's truth is a function of J's intersection with each
//! context's carried set: two contexts that agree on J agree on the
//! verdict. Determination is upward closed, so a determining set is minimal
//! exactly when no single element can be dropped — which is what the search
//! certifies.
//!
//! Built on top of that: certification of interactions as non-essential
//! (absent from every minimal set *and* verified removable without moving
//! any protected verdict), and model reduction, which refuses removals that
//! are either unverified or uncertified.

use crate::activation::compute_active_set;
use crate::error::EngineError;
use crate::ids::{ContextId, InteractionId, OutcomeId};
use crate::model::WorldModel;
use crate::outcomes::grounding_truth;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Hard ceiling on exact search width: subsets are enumerated as 64-bit
/// masks.
const MASK_LIMIT: usize = 62;

/// Default candidate cap for the exact subset search.
pub const DEFAULT_SUBSET_CAP: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct MinimalSetsOptions {
    /// Maximum candidate count the exact search will attempt.
    pub cap: usize,
    /// Greedy single-set search instead of exhaustive enumeration; the
    /// result is one genuine minimal set but the listing is not complete,
    /// so the report is marked uncertified.
    pub heuristic: bool,
}

impl Default for MinimalSetsOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_SUBSET_CAP, heuristic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalSetsReport {
    pub outcome: OutcomeId,
    pub contexts: Vec<ContextId>,
    pub candidates: BTreeSet<InteractionId>,
    /// Every inclusion-minimal determining set (or a single one, when
    /// heuristic), sorted by size then contents.
    pub minimal_sets: Vec<BTreeSet<InteractionId>>,
    /// Interactions present in every minimal set.
    pub essential: BTreeSet<InteractionId>,
    /// Candidates present in no minimal set.
    pub nonessential: BTreeSet<InteractionId>,
    /// False when the listing may be incomplete (heuristic search).
    pub certified: bool,
    pub flags: Vec<String>,
}

/// Find the minimal determining sets for `outcome` over `contexts` (all
/// declared contexts when empty).
pub fn find_minimal_sets(
    model: &WorldModel,
    outcome: &OutcomeId,
    contexts: &[ContextId],
    opts: MinimalSetsOptions,
) -> Result<MinimalSetsReport, EngineError> {
    let decl = model.outcomes.get(outcome).ok_or_else(|| EngineError::UnknownOutcome(outcome.clone()))?;
    let family: Vec<ContextId> = if contexts.is_empty() {
        model.contexts.keys().cloned().collect()
    } else {
        contexts.to_vec()
    };

    let candidates: Vec<InteractionId> = {
        let set: BTreeSet<InteractionId> = decl.groundings.iter().flatten().cloned().collect();
        set.into_iter().collect()
    };
    let n = candidates.len();
    let index: BTreeMap<&InteractionId, usize> =
        candidates.iter().enumerate().map(|(i, id)| (id, i)).collect();

    // One row per context: the candidate-membership mask of its carried set,
    // and the outcome's truth there.
    let mut rows: Vec<(u64, bool)> = Vec::with_capacity(family.len());
    for ctx in &family {
        let active = compute_active_set(model, ctx)?;
        let mut mask = 0u64;
        for (id, i) in &index {
            if active.carried.contains(*id) {
                mask |= 1 << i;
            }
        }
        rows.push((mask, grounding_truth(&decl.groundings, &active.carried).is_some()));
    }

    let determines = |j: u64| -> bool {
        let mut seen: Vec<(u64, bool)> = Vec::with_capacity(rows.len());
        for (mask, truth) in &rows {
            let pattern = j & mask;
            match seen.iter().find(|(p, _)| *p == pattern) {
                Some((_, t)) if t != truth => return false,
                Some(_) => {}
                None => seen.push((pattern, *truth)),
            }
        }
        true
    };

    let effective_cap = opts.cap.min(MASK_LIMIT);
    let mut flags = Vec::new();
    let mut certified = true;

    let minimal_masks: Vec<u64> = if n > effective_cap {
        if !opts.heuristic {
            return Err(EngineError::SearchTooLarge { candidates: n, cap: effective_cap });
        }
        if n > MASK_LIMIT {
            return Err(EngineError::SearchTooLarge { candidates: n, cap: MASK_LIMIT });
        }
        certified = false;
        flags.push("heuristic".to_string());
        vec![greedy_shrink(n, &determines)]
    } else {
        exhaustive_minimal(n, &determines)
    };

    let minimal_sets: Vec<BTreeSet<InteractionId>> = {
        let mut sets: Vec<BTreeSet<InteractionId>> = minimal_masks
            .iter()
            .map(|m| {
                candidates
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m & (1 << i) != 0)
                    .map(|(_, id)| id.clone())
                    .collect()
            })
            .collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        sets
    };

    if minimal_sets.len() == 1 && minimal_sets[0].is_empty() {
        flags.push("constant-outcome".to_string());
    }

    let essential: BTreeSet<InteractionId> = minimal_sets
        .iter()
        .skip(1)
        .fold(minimal_sets.first().cloned().unwrap_or_default(), |acc, s| {
            acc.intersection(s).cloned().collect()
        });
    let used: BTreeSet<InteractionId> = minimal_sets.iter().flatten().cloned().collect();
    let nonessential: BTreeSet<InteractionId> =
        candidates.iter().filter(|c| !used.contains(*c)).cloned().collect();

    Ok(MinimalSetsReport {
        outcome: outcome.clone(),
        contexts: family,
        candidates: candidates.into_iter().collect(),
        minimal_sets,
        essential,
        nonessential,
        certified,
        flags,
    })
}

/// All inclusion-minimal determining masks, by exhaustive size-ordered
/// enumeration. Because determination is upward closed, a determining
/// subset containing no previously found minimal set is itself minimal.
fn exhaustive_minimal(n: usize, determines: &dyn Fn(u64) -> bool) -> Vec<u64> {
    let mut minimal: Vec<u64> = Vec::new();
    for size in 0..=n {
        for_each_subset_of_size(n, size, &mut |s| {
            if minimal.iter().any(|m| m & s == *m) {
                return;
            }
            if determines(s) {
                minimal.push(s);
            }
        });
    }
    minimal
}

/// Enumerate all `size`-element subsets of `0..n` as bitmasks, in
/// ascending numeric order.
fn for_each_subset_of_size(n: usize, size: usize, f: &mut dyn FnMut(u64)) {
    if size == 0 {
        f(0);
        return;
    }
    if size > n {
        return;
    }
    let limit: u64 = 1 << n;
    let mut s: u64 = (1 << size) - 1;
    while s < limit {
        f(s);
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
}

/// Greedy descent from the full candidate set (which always determines,
/// since truth is a function of it) to one minimal set.
fn greedy_shrink(n: usize, determines: &dyn Fn(u64) -> bool) -> u64 {
    let mut j: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    loop {
        let mut shrunk = false;
        for i in 0..n {
            let bit = 1u64 << i;
            if j & bit != 0 && determines(j & !bit) {
                j &= !bit;
                shrunk = true;
            }
        }
        if !shrunk {
            return j;
        }
    }
}

/// The outcomes whose verdicts removal must preserve: those linked to
/// goals, or every declared outcome when no links exist (flagged vacuous).
fn protected_outcomes(model: &WorldModel) -> (Vec<OutcomeId>, bool) {
    if model.desired.is_empty() {
        (model.outcomes.keys().cloned().collect(), true)
    } else {
        (model.desired.keys().cloned().collect(), false)
    }
}

/// Truth of each (outcome, context) pair, computing each context once.
pub fn truth_table(
    model: &WorldModel,
    outcomes: &[OutcomeId],
    contexts: &[ContextId],
) -> Result<BTreeMap<(OutcomeId, ContextId), bool>, EngineError> {
    let mut table = BTreeMap::new();
    for ctx in contexts {
        let active = compute_active_set(model, ctx)?;
        for oc in outcomes {
            let decl = model.outcomes.get(oc).ok_or_else(|| EngineError::UnknownOutcome(oc.clone()))?;
            table.insert(
                (oc.clone(), ctx.clone()),
                grounding_truth(&decl.groundings, &active.carried).is_some(),
            );
        }
    }
    Ok(table)
}

/// A copy of the model with `removals` gone, along with every declaration
/// that referenced them: context emissions, environment emission entries,
/// relay entries, and grounding alternatives.
pub fn remove_interactions(model: &WorldModel, removals: &BTreeSet<InteractionId>) -> WorldModel {
    let mut reduced = model.clone();
    reduced.interactions.retain(|id, _| !removals.contains(id));
    for entity in reduced.entities.values_mut() {
        entity.emits.retain(|(_, via)| !removals.contains(via));
        entity.relay.retain(|r| !removals.contains(&r.via));
    }
    for ctx in reduced.contexts.values_mut() {
        ctx.emissions.retain(|em| !removals.contains(&em.via));
    }
    for outcome in reduced.outcomes.values_mut() {
        outcome.groundings.retain(|alt| alt.is_disjoint(removals));
    }
    reduced
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonessentialReport {
    /// Interactions safe to remove: absent from every minimal set and
    /// verified (cumulatively) to leave every protected verdict unchanged.
    pub certified: BTreeSet<InteractionId>,
    /// Interactions absent from every minimal set, before verification.
    pub theory_candidates: BTreeSet<InteractionId>,
    /// Theory candidates whose removal was found to move a verdict.
    pub rejected: BTreeSet<InteractionId>,
    pub protected: Vec<OutcomeId>,
    pub flags: Vec<String>,
}

/// Certify interactions as non-essential for the protected outcomes.
///
/// Candidates are interactions appearing in no minimal determining set of
/// any protected outcome. Because activation is derived, an interaction can
/// feed a producing chain without appearing in any grounding, so absence
/// from the minimal sets alone is not proof of safety: each candidate is
/// admitted only after verifying that the cumulative removal set leaves
/// every protected (outcome, context) verdict unchanged.
pub fn find_nonessential(model: &WorldModel) -> Result<NonessentialReport, EngineError> {
    let (protected, vacuous) = protected_outcomes(model);
    let mut flags = Vec::new();
    if vacuous {
        flags.push("vacuous".to_string());
    }
    let contexts: Vec<ContextId> = model.contexts.keys().cloned().collect();

    let mut used: BTreeSet<InteractionId> = BTreeSet::new();
    for oc in &protected {
        let report = find_minimal_sets(model, oc, &contexts, MinimalSetsOptions::default())?;
        used.extend(report.minimal_sets.into_iter().flatten());
    }
    let theory_candidates: BTreeSet<InteractionId> =
        model.interactions.keys().filter(|id| !used.contains(*id)).cloned().collect();

    let before = truth_table(model, &protected, &contexts)?;
    let mut certified: BTreeSet<InteractionId> = BTreeSet::new();
    let mut rejected: BTreeSet<InteractionId> = BTreeSet::new();
    for candidate in &theory_candidates {
        let mut attempt = certified.clone();
        attempt.insert(candidate.clone());
        let reduced = remove_interactions(model, &attempt);
        let after = truth_table(&reduced, &protected, &contexts)?;
        if after == before {
            certified = attempt;
        } else {
            rejected.insert(candidate.clone());
        }
    }

    Ok(NonessentialReport { certified, theory_candidates, rejected, protected, flags })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    #[serde(skip)]
    pub model: WorldModel,
    pub removed: BTreeSet<InteractionId>,
    pub protected: Vec<OutcomeId>,
    /// Number of (outcome, context) verdicts verified unchanged.
    pub checks: usize,
    pub flags: Vec<String>,
}

/// Remove `removals` from the model, refusing unless the removal is both
/// verified (no protected verdict moves) and certified non-essential.
pub fn reduce_model(model: &WorldModel, removals: &BTreeSet<InteractionId>) -> Result<Reduction, EngineError> {
    for id in removals {
        if !model.interactions.contains_key(id) {
            return Err(EngineError::UnknownInteraction(id.clone()));
        }
    }

    let (protected, vacuous) = protected_outcomes(model);
    let contexts: Vec<ContextId> = model.contexts.keys().cloned().collect();
    let before = truth_table(model, &protected, &contexts)?;
    let mut reduced = remove_interactions(model, removals);
    let after = truth_table(&reduced, &protected, &contexts)?;
    for ((oc, ctx), truth_before) in &before {
        let truth_after = after[&(oc.clone(), ctx.clone())];
        if truth_after != *truth_before {
            return Err(EngineError::NotRemovable {
                outcome: oc.clone(),
                context: ctx.clone(),
                before: *truth_before,
                after: truth_after,
            });
        }
    }

    let certificate = find_nonessential(model)?;
    let uncertified: Vec<InteractionId> =
        removals.iter().filter(|id| !certificate.certified.contains(*id)).cloned().collect();
    if !uncertified.is_empty() {
        return Err(EngineError::NotCertified(uncertified));
    }

    let mut flags = Vec::new();
    if vacuous {
        flags.push("vacuous".to_string());
    }
    if !removals.is_empty() {
        let ids = removals.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ");
        reduced.meta.provenance = Some(format!("reduced: removed {ids}"));
    }

    Ok(Reduction { model: reduced, removed: removals.clone(), protected, checks: before.len(), flags })
}
