//! Shared fixtures for the integration suites: corpus loading, a seeded
//! random model generator, and small brute-force oracles that restate the
//! engine's definitions directly so the optimized implementations can be
//! checked against them.

#![allow(dead_code)]

use psworld_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

// --- corpus ---

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn corpus_source(name: &str) -> String {
    let path = corpus_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

/// Parse a corpus file, requiring it to be syntactically clean.
pub fn load_corpus(name: &str) -> WorldModel {
    let (model, _warnings) = parse_model(&corpus_source(name), name)
        .unwrap_or_else(|diags| panic!("{name} does not parse: {diags:?}"));
    model
}

// --- seeded random models ---

/// Generate a small world model from a seed. The same seed always yields
/// the same model. Structure is deliberately coherent where the engine
/// demands it (emissions come from declared environment interactions, the
/// boundary matches entity kinds); everything else is free to be odd, so
/// generated models exercise dead interactions, never-firing functions,
/// unsatisfiable outcomes and empty contexts.
pub fn gen_model(seed: u64) -> WorldModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = WorldModel::default();

    let flows: Vec<FlowTypeId> =
        (0..rng.random_range(3..=6)).map(|i| FlowTypeId::from(format!("f{i}").as_str())).collect();

    let n_env = rng.random_range(1..=2);
    let n_sys = rng.random_range(1..=3);
    let n_ext = rng.random_range(0..=2usize);

    let mut env_ids = Vec::new();
    for i in 0..n_env {
        let e = Entity::new(format!("env{i}").as_str(), EntityKind::Environment);
        env_ids.push(e.id.clone());
        m.entities.insert(e.id.clone(), e);
    }
    let mut sys_ids = Vec::new();
    for i in 0..n_sys {
        let mut e = Entity::new(format!("sys{i}").as_str(), EntityKind::InternalFunction);
        for f in 0..rng.random_range(1..=2) {
            e.functions.push(gen_function(&mut rng, &format!("run{f}"), &flows));
        }
        sys_ids.push(e.id.clone());
        m.entities.insert(e.id.clone(), e);
    }
    let mut ext_ids = Vec::new();
    for i in 0..n_ext {
        let mut e = Entity::new(format!("ext{i}").as_str(), EntityKind::ExternalSystem);
        for f in 0..rng.random_range(0..=1usize) {
            e.functions.push(gen_function(&mut rng, &format!("serve{f}"), &flows));
        }
        ext_ids.push(e.id.clone());
        m.entities.insert(e.id.clone(), e);
    }

    m.boundary.internal.extend(sys_ids.iter().cloned());
    m.boundary.external.extend(env_ids.iter().cloned());
    m.boundary.external.extend(ext_ids.iter().cloned());

    let everyone: Vec<EntityId> = m.entities.keys().cloned().collect();
    let n_ir = rng.random_range(2..=8);
    for i in 0..n_ir {
        let source = everyone[rng.random_range(0..everyone.len())].clone();
        let mut dest = everyone[rng.random_range(0..everyone.len())].clone();
        if dest == source {
            dest = everyone[(everyone.iter().position(|e| *e == source).unwrap() + 1) % everyone.len()].clone();
        }
        if dest == source {
            continue; // single-entity universe; no interaction possible
        }
        let dest_domains: Vec<FlowTypeId> = m.entities[&dest]
            .functions
            .iter()
            .flat_map(|f| f.domain.iter().cloned())
            .collect();
        let flow = if !dest_domains.is_empty() && rng.random_bool(0.7) {
            dest_domains[rng.random_range(0..dest_domains.len())].clone()
        } else {
            flows[rng.random_range(0..flows.len())].clone()
        };
        let admitting: Vec<String> = m.entities[&dest]
            .functions
            .iter()
            .filter(|f| f.domain.contains(&flow))
            .map(|f| f.name.clone())
            .collect();
        let recv_function = if admitting.len() > 1 && rng.random_bool(0.5) {
            Some(admitting[rng.random_range(0..admitting.len())].clone())
        } else {
            None
        };
        let interface =
            if rng.random_bool(0.2) { Some(format!("port{i}")) } else { None };
        let id = InteractionId::from(format!("ir{i}").as_str());
        m.interactions.insert(
            id.clone(),
            Interaction { id, source, dest, flow, interface, recv_function },
        );
    }

    // Every environment-sourced interaction becomes an emission capability,
    // so contexts below can seed any of them coherently.
    let env_sourced: Vec<(EntityId, FlowTypeId, InteractionId)> = m
        .interactions
        .values()
        .filter(|ir| env_ids.contains(&ir.source))
        .map(|ir| (ir.source.clone(), ir.flow.clone(), ir.id.clone()))
        .collect();
    for (entity, flow, via) in &env_sourced {
        m.entities.get_mut(entity).unwrap().emits.insert((flow.clone(), via.clone()));
    }

    // External systems occasionally relay a received flow onward.
    for ext in &ext_ids {
        let incoming: Vec<FlowTypeId> = m
            .interactions
            .values()
            .filter(|ir| ir.dest == *ext)
            .map(|ir| ir.flow.clone())
            .collect();
        let outgoing: Vec<(InteractionId, FlowTypeId)> = m
            .interactions
            .values()
            .filter(|ir| ir.source == *ext)
            .map(|ir| (ir.id.clone(), ir.flow.clone()))
            .collect();
        if incoming.is_empty() {
            continue;
        }
        for (via, emitted) in outgoing.iter().take(2) {
            if rng.random_bool(0.5) {
                let received = incoming[rng.random_range(0..incoming.len())].clone();
                m.entities.get_mut(ext).unwrap().relay.insert(RelayRule {
                    received,
                    emitted: emitted.clone(),
                    via: via.clone(),
                });
            }
        }
    }

    for c in 0..rng.random_range(1..=3) {
        let id = ContextId::from(format!("ctx{c}").as_str());
        let mut ctx = ContextDecl { id: id.clone(), emissions: BTreeSet::new() };
        for (entity, flow, via) in &env_sourced {
            if rng.random_bool(0.6) {
                ctx.emissions.insert(Emission {
                    entity: entity.clone(),
                    flow: flow.clone(),
                    via: via.clone(),
                });
            }
        }
        m.contexts.insert(id.clone(), ctx);
    }

    let descriptions = [
        "",
        "the request is answered",
        "a reading reaches the operator",
        "the \"fast\" path stays live",
        "line one\nline two",
    ];
    let ir_ids: Vec<InteractionId> = m.interactions.keys().cloned().collect();
    for o in 0..rng.random_range(1..=4) {
        let id = OutcomeId::from(format!("oc{o}").as_str());
        let mut groundings = BTreeSet::new();
        if !ir_ids.is_empty() {
            for _ in 0..rng.random_range(1..=3) {
                let mut alt = BTreeSet::new();
                for _ in 0..rng.random_range(1..=3) {
                    alt.insert(ir_ids[rng.random_range(0..ir_ids.len())].clone());
                }
                groundings.insert(alt);
            }
        }
        m.outcomes.insert(
            id.clone(),
            OutcomeDecl {
                id,
                description: descriptions[rng.random_range(0..descriptions.len())].to_string(),
                groundings,
            },
        );
    }

    let mut goal_ids = Vec::new();
    for s in 0..rng.random_range(0..=2usize) {
        let id = StakeholderId::from(format!("party{s}").as_str());
        let mut goals = BTreeMap::new();
        for g in 0..rng.random_range(1..=2) {
            let gid = GoalId::from(format!("goal{s}_{g}").as_str());
            goals.insert(gid.clone(), format!("purpose {s}.{g}"));
            goal_ids.push(gid);
        }
        m.stakeholders.insert(id.clone(), Stakeholder { id, goals });
    }
    if !goal_ids.is_empty() {
        let outcome_ids: Vec<OutcomeId> = m.outcomes.keys().cloned().collect();
        for oc in outcome_ids {
            if rng.random_bool(0.5) {
                let mut linked = BTreeSet::new();
                linked.insert(goal_ids[rng.random_range(0..goal_ids.len())].clone());
                m.desired.insert(oc, linked);
            }
        }
    }

    for r in 0..rng.random_range(0..=2usize) {
        let subject = sys_ids[rng.random_range(0..sys_ids.len())].clone();
        let func = &m.entities[&subject].functions[0];
        let input = func.domain.iter().next().unwrap().clone();
        let output = func.codomain.iter().next().unwrap().clone();
        let condition = if rng.random_bool(0.5) {
            let ctxs: Vec<ContextId> = m.contexts.keys().cloned().collect();
            Some(ctxs[rng.random_range(0..ctxs.len())].clone())
        } else {
            None
        };
        let id = RequirementId::from(format!("req{r}").as_str());
        m.requirements.insert(id.clone(), RequirementDecl { id, subject, input, output, condition });
    }

    m
}

fn gen_function(rng: &mut ChaCha8Rng, name: &str, flows: &[FlowTypeId]) -> FunctionSpec {
    let mut domain = BTreeSet::new();
    for _ in 0..rng.random_range(1..=3) {
        domain.insert(flows[rng.random_range(0..flows.len())].clone());
    }
    let mut codomain = BTreeSet::new();
    for _ in 0..rng.random_range(1..=2) {
        codomain.insert(flows[rng.random_range(0..flows.len())].clone());
    }
    let co: Vec<FlowTypeId> = codomain.iter().cloned().collect();
    let mut output_map = BTreeMap::new();
    for input in &domain {
        if rng.random_bool(0.7) {
            let mut outs = BTreeSet::new();
            for _ in 0..rng.random_range(1..=co.len()) {
                outs.insert(co[rng.random_range(0..co.len())].clone());
            }
            output_map.insert(input.clone(), outs);
        }
    }
    let firing = if rng.random_bool(0.3) { FiringRule::Any } else { FiringRule::All };
    let states = if rng.random_bool(0.35) {
        let names: Vec<String> =
            (0..rng.random_range(2..=3)).map(|i| format!("S{i}")).collect();
        let mut transitions = BTreeMap::new();
        for state in &names {
            for flow in &domain {
                if rng.random_bool(0.5) {
                    let to = names[rng.random_range(0..names.len())].clone();
                    transitions.insert((state.clone(), flow.clone()), to);
                }
            }
        }
        Some(StateMachine {
            states: names.iter().cloned().collect(),
            initial: names[0].clone(),
            transitions,
        })
    } else {
        None
    };
    FunctionSpec { name: name.to_string(), domain, codomain, output_map, firing, states }
}

// --- oracles ---

/// Carried-set oracle: iterate the derivation rules naively until nothing
/// changes. No worklist, no layers, no bookkeeping — just the rules.
pub fn naive_carried(model: &WorldModel, context: &ContextId) -> BTreeSet<InteractionId> {
    let ctx = &model.contexts[context];
    let mut carried: BTreeSet<InteractionId> = BTreeSet::new();
    for em in &ctx.emissions {
        let via = &model.interactions[&em.via];
        if model.resolve_receiver(via).is_admissible() {
            carried.insert(em.via.clone());
        }
    }
    loop {
        let before = carried.len();

        for entity in model.entities.values() {
            for func in &entity.functions {
                let delivered: BTreeSet<FlowTypeId> = carried
                    .iter()
                    .map(|id| &model.interactions[id])
                    .filter(|ir| {
                        ir.dest == entity.id
                            && model.resolve_receiver(ir) == Receiver::Function(func.name.clone())
                    })
                    .map(|ir| ir.flow.clone())
                    .collect();
                let fires = match func.firing {
                    FiringRule::All => func.domain.iter().all(|t| delivered.contains(t)),
                    FiringRule::Any => func.domain.iter().any(|t| delivered.contains(t)),
                };
                if !fires {
                    continue;
                }
                let mut produced: BTreeSet<FlowTypeId> = BTreeSet::new();
                for input in &delivered {
                    produced.extend(func.produces(input));
                }
                for ir in model.interactions.values() {
                    if ir.source == entity.id
                        && produced.contains(&ir.flow)
                        && model.resolve_receiver(ir).is_admissible()
                    {
                        carried.insert(ir.id.clone());
                    }
                }
            }

            for rule in &entity.relay {
                let received = carried.iter().map(|id| &model.interactions[id]).any(|ir| {
                    ir.dest == entity.id && ir.flow == rule.received
                });
                if !received {
                    continue;
                }
                let Some(via) = model.interactions.get(&rule.via) else { continue };
                if via.source == entity.id
                    && via.flow == rule.emitted
                    && model.resolve_receiver(via).is_admissible()
                {
                    carried.insert(rule.via.clone());
                }
            }
        }

        if carried.len() == before {
            return carried;
        }
    }
}

/// Truth of an outcome against a carried set, by the definition.
pub fn naive_truth(decl: &OutcomeDecl, carried: &BTreeSet<InteractionId>) -> bool {
    decl.groundings.iter().any(|alt| alt.iter().all(|ir| carried.contains(ir)))
}

/// Does `j` determine the outcome over the given (carried, truth) rows?
/// Directly: no two rows with the same projection onto `j` may disagree.
pub fn determines_oracle(
    rows: &[(BTreeSet<InteractionId>, bool)],
    j: &BTreeSet<InteractionId>,
) -> bool {
    let mut seen: BTreeMap<BTreeSet<InteractionId>, bool> = BTreeMap::new();
    for (carried, truth) in rows {
        let projection: BTreeSet<InteractionId> = j.intersection(carried).cloned().collect();
        match seen.get(&projection) {
            Some(prev) if *prev != *truth => return false,
            Some(_) => {}
            None => {
                seen.insert(projection, *truth);
            }
        }
    }
    true
}

/// All inclusion-minimal determining subsets of `candidates`, by exhaustive
/// enumeration over the full powerset. Exponential; keep candidates small.
pub fn minimal_sets_oracle(
    candidates: &BTreeSet<InteractionId>,
    rows: &[(BTreeSet<InteractionId>, bool)],
) -> Vec<BTreeSet<InteractionId>> {
    let ids: Vec<InteractionId> = candidates.iter().cloned().collect();
    assert!(ids.len() <= 16, "oracle is exponential; got {} candidates", ids.len());
    let mut determining: Vec<BTreeSet<InteractionId>> = Vec::new();
    for mask in 0u32..(1 << ids.len()) {
        let subset: BTreeSet<InteractionId> = ids
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, id)| id.clone())
            .collect();
        if determines_oracle(rows, &subset) {
            determining.push(subset);
        }
    }
    let mut minimal: Vec<BTreeSet<InteractionId>> = determining
        .iter()
        .filter(|s| !determining.iter().any(|t| *t != **s && t.is_subset(s)))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    minimal
}

/// The truth rows find_minimal_sets reasons over: one (carried, truth) pair
/// per context in the family.
pub fn truth_rows(
    model: &WorldModel,
    outcome: &OutcomeId,
    contexts: &[ContextId],
) -> Vec<(BTreeSet<InteractionId>, bool)> {
    let decl = &model.outcomes[outcome];
    contexts
        .iter()
        .map(|c| {
            let carried = naive_carried(model, c);
            let truth = naive_truth(decl, &carried);
            (carried, truth)
        })
        .collect()
}
