//! Context activation: the least fixed point of flow propagation.
//!
//! Given an operational context, the engine derives which interactions
//! actually carry flows: environment emissions seed the cascade, functions
//! fire over delivered admissible inputs per their declared production maps,
//! produced flows activate admitting outgoing interactions, and declared
//! relay entries re-emit received flows. Every activation is recorded with
//! the step that justified it, so any activation can be explained as a
//! derivation tree and re-checked independently of the fixpoint engine.
//!
//! The derivation consults only declared structure — emissions, domains,
//! production maps, relay entries — never the boundary. Moving the boundary
//! therefore never changes what is carried; it only changes which carried
//! interactions are *reported* in [`ActiveSet::active`], the boundary-
//! filtered view that excludes interactions lying wholly outside.

use crate::classify::{classify_interaction, InteractionClass};
use crate::diag::{rules, Diagnostic, Report};
use crate::error::EngineError;
use crate::ids::{ContextId, EntityId, FlowTypeId, InteractionId};
use crate::model::{Emission, EntityKind, FiringRule, Receiver, SpanKey, WorldModel};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// How one interaction came to carry its flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Step {
    /// Seeded directly by an environment emission of the context.
    Seed { emission_entity: EntityId, flow: FlowTypeId },
    /// Activated by a function firing: `inputs` maps each delivered domain
    /// flow to the interaction that first carried it, and `producing` lists
    /// the delivered inputs whose production map yields the carried flow.
    Produced {
        entity: EntityId,
        function: String,
        inputs: BTreeMap<FlowTypeId, InteractionId>,
        producing: BTreeSet<FlowTypeId>,
    },
    /// Activated by a declared relay entry on `entity` after it received
    /// `received` over `carrier`.
    Relayed { entity: EntityId, received: FlowTypeId, carrier: InteractionId },
}

/// The activation result for one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveSet {
    pub context: ContextId,
    /// The reported active set: carried interactions that are not classified
    /// wholly external under the model's current boundary.
    pub active: BTreeSet<InteractionId>,
    /// Every interaction the derivation activated, before boundary
    /// filtering. Truth evaluation reads this set, which is what makes
    /// outcome verdicts independent of boundary placement.
    pub carried: BTreeSet<InteractionId>,
    /// Functions that fired, as (entity, function name).
    pub fired: BTreeSet<(EntityId, String)>,
    /// Flow carried by each carried interaction.
    pub delivery: BTreeMap<InteractionId, FlowTypeId>,
    /// Derivation depth per carried interaction: seeds are 0, an activation
    /// justified by carriers at depth d is at depth d + 1.
    pub layers: BTreeMap<InteractionId, u32>,
    /// The recorded justification for each carried interaction.
    pub steps: BTreeMap<InteractionId, Step>,
    /// Non-fatal findings (inadmissible emissions and the like).
    pub warnings: Vec<Diagnostic>,
}

impl ActiveSet {
    pub fn is_active(&self, ir: &InteractionId) -> bool {
        self.active.contains(ir)
    }
}

struct Closure<'m> {
    model: &'m WorldModel,
    carried: BTreeSet<InteractionId>,
    delivery: BTreeMap<InteractionId, FlowTypeId>,
    layers: BTreeMap<InteractionId, u32>,
    steps: BTreeMap<InteractionId, Step>,
    fired: BTreeSet<(EntityId, String)>,
    /// Per receiving function: delivered flow -> first carrier.
    delivered: BTreeMap<(EntityId, String), BTreeMap<FlowTypeId, InteractionId>>,
    /// Per entity: every received flow -> first carrier (drives relay).
    received: BTreeMap<EntityId, BTreeMap<FlowTypeId, InteractionId>>,
    /// Productions already propagated, per (entity, function).
    propagated: BTreeMap<(EntityId, String), BTreeSet<FlowTypeId>>,
    warnings: Vec<Diagnostic>,
}

impl<'m> Closure<'m> {
    fn new(model: &'m WorldModel) -> Self {
        Self {
            model,
            carried: BTreeSet::new(),
            delivery: BTreeMap::new(),
            layers: BTreeMap::new(),
            steps: BTreeMap::new(),
            fired: BTreeSet::new(),
            delivered: BTreeMap::new(),
            received: BTreeMap::new(),
            propagated: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn activate(&mut self, id: &InteractionId, step: Step, layer: u32) -> bool {
        if self.carried.contains(id) {
            return false;
        }
        let ir = &self.model.interactions[id];
        self.carried.insert(id.clone());
        self.delivery.insert(id.clone(), ir.flow.clone());
        self.layers.insert(id.clone(), layer);
        self.steps.insert(id.clone(), step);

        self.received
            .entry(ir.dest.clone())
            .or_default()
            .entry(ir.flow.clone())
            .or_insert_with(|| id.clone());
        if let Receiver::Function(name) = self.model.resolve_receiver(ir) {
            self.delivered
                .entry((ir.dest.clone(), name))
                .or_default()
                .entry(ir.flow.clone())
                .or_insert_with(|| id.clone());
        }
        true
    }

    fn seed(&mut self, em: &Emission, ctx: &ContextId) -> Result<bool, EngineError> {
        let entity = self
            .model
            .entities
            .get(&em.entity)
            .ok_or_else(|| integrity(ctx, format!("emission from undeclared entity `{}`", em.entity)))?;
        if entity.kind != EntityKind::Environment {
            return Err(integrity(
                ctx,
                format!("emission from `{}`, which is not an environment entity", em.entity),
            ));
        }
        let via = self
            .model
            .interactions
            .get(&em.via)
            .ok_or_else(|| EngineError::UnknownInteraction(em.via.clone()))?;
        if via.source != em.entity {
            return Err(integrity(
                ctx,
                format!("emission via `{}`, whose source is `{}`, not `{}`", via.id, via.source, em.entity),
            ));
        }
        if via.flow != em.flow {
            return Err(integrity(
                ctx,
                format!("emission of `{}` via `{}`, which carries `{}`", em.flow, via.id, via.flow),
            ));
        }
        if !self.model.resolve_receiver(via).is_admissible() {
            self.warnings.push(Diagnostic::warning(
                rules::INADMISSIBLE_EMISSION,
                format!(
                    "emission of `{}` via `{}` is not admissible at `{}` and activates nothing",
                    em.flow, via.id, via.dest
                ),
                self.model.span(&SpanKey::Emission(ctx.clone(), em.clone())),
            ));
            return Ok(false);
        }
        Ok(self.activate(
            &em.via.clone(),
            Step::Seed { emission_entity: em.entity.clone(), flow: em.flow.clone() },
            0,
        ))
    }

    /// One monotone pass over every function and relay entry; true when
    /// anything new was activated.
    fn pass(&mut self) -> bool {
        let mut changed = false;

        // Functions fire over what has been delivered to them.
        let ready: Vec<(EntityId, String)> = self.delivered.keys().cloned().collect();
        for (entity_id, fn_name) in ready {
            let entity = &self.model.entities[&entity_id];
            let Some(func) = entity.function(&fn_name) else { continue };
            let inputs = self.delivered[&(entity_id.clone(), fn_name.clone())].clone();
            let rule_met = match func.firing {
                FiringRule::All => func.domain.iter().all(|t| inputs.contains_key(t)),
                FiringRule::Any => func.domain.iter().any(|t| inputs.contains_key(t)),
            };
            if !rule_met {
                continue;
            }
            self.fired.insert((entity_id.clone(), fn_name.clone()));

            let mut produced: BTreeSet<FlowTypeId> = BTreeSet::new();
            for input in inputs.keys() {
                produced.extend(func.produces(input));
            }
            let already = self.propagated.entry((entity_id.clone(), fn_name.clone())).or_default();
            let fresh: Vec<FlowTypeId> = produced.difference(already).cloned().collect();
            already.extend(fresh.iter().cloned());

            let input_layer = inputs.values().map(|c| self.layers[c]).max().unwrap_or(0);
            for out in fresh {
                let producing: BTreeSet<FlowTypeId> = inputs
                    .keys()
                    .filter(|i| func.produces(i).contains(&out))
                    .cloned()
                    .collect();
                let targets: Vec<InteractionId> = self
                    .model
                    .interactions
                    .values()
                    .filter(|ir| ir.source == entity_id && ir.flow == out)
                    .filter(|ir| self.model.resolve_receiver(ir).is_admissible())
                    .map(|ir| ir.id.clone())
                    .collect();
                for target in targets {
                    changed |= self.activate(
                        &target,
                        Step::Produced {
                            entity: entity_id.clone(),
                            function: fn_name.clone(),
                            inputs: inputs.clone(),
                            producing: producing.clone(),
                        },
                        input_layer + 1,
                    );
                }
            }
        }

        // Declared relay entries re-emit received flows.
        let relaying: Vec<EntityId> = self
            .model
            .entities
            .values()
            .filter(|e| !e.relay.is_empty())
            .map(|e| e.id.clone())
            .collect();
        for entity_id in relaying {
            let rules: Vec<_> = self.model.entities[&entity_id].relay.iter().cloned().collect();
            for rule in rules {
                let Some(carrier) =
                    self.received.get(&entity_id).and_then(|m| m.get(&rule.received)).cloned()
                else {
                    continue;
                };
                let Some(via) = self.model.interactions.get(&rule.via) else { continue };
                if via.source != entity_id
                    || via.flow != rule.emitted
                    || !self.model.resolve_receiver(via).is_admissible()
                {
                    continue;
                }
                let layer = self.layers[&carrier] + 1;
                changed |= self.activate(
                    &rule.via.clone(),
                    Step::Relayed {
                        entity: entity_id.clone(),
                        received: rule.received.clone(),
                        carrier,
                    },
                    layer,
                );
            }
        }

        changed
    }
}

fn integrity(ctx: &ContextId, msg: String) -> EngineError {
    EngineError::ModelIntegrity(format!("context `{ctx}` is ill-formed: {msg}"))
}

/// Compute the activation fixpoint for one declared context.
pub fn compute_active_set(model: &WorldModel, context: &ContextId) -> Result<ActiveSet, EngineError> {
    let ctx = model.contexts.get(context).ok_or_else(|| EngineError::UnknownContext(context.clone()))?;

    let mut closure = Closure::new(model);
    for em in &ctx.emissions {
        closure.seed(em, context)?;
    }
    while closure.pass() {}

    let active = closure
        .carried
        .iter()
        .filter(|id| {
            // Interactions wholly outside the boundary are carried but not
            // reported active. When a boundary is too broken to classify,
            // keep the interaction rather than guess.
            classify_interaction(&model.interactions[*id], &model.boundary)
                .map(|c| c != InteractionClass::External)
                .unwrap_or(true)
        })
        .cloned()
        .collect();

    Ok(ActiveSet {
        context: context.clone(),
        active,
        carried: closure.carried,
        fired: closure.fired,
        delivery: closure.delivery,
        layers: closure.layers,
        steps: closure.steps,
        warnings: closure.warnings,
    })
}

/// A derivation tree: one activation and, below it, the activations that
/// justified it, down to seed leaves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivation {
    pub interaction: InteractionId,
    pub flow: FlowTypeId,
    pub justification: String,
    pub children: Vec<Derivation>,
}

/// Explain why `interaction` is active: its derivation tree from the seeds.
pub fn explain_activation(
    model: &WorldModel,
    active: &ActiveSet,
    interaction: &InteractionId,
) -> Result<Derivation, EngineError> {
    if !model.interactions.contains_key(interaction) {
        return Err(EngineError::UnknownInteraction(interaction.clone()));
    }
    if !active.is_active(interaction) {
        return Err(EngineError::NotActive(interaction.clone()));
    }
    Ok(build_tree(active, interaction))
}

fn build_tree(active: &ActiveSet, id: &InteractionId) -> Derivation {
    let flow = active.delivery[id].clone();
    let step = &active.steps[id];
    let (justification, carriers): (String, Vec<InteractionId>) = match step {
        Step::Seed { emission_entity, flow } => {
            (format!("environment `{emission_entity}` emits `{flow}`"), Vec::new())
        }
        Step::Produced { entity, function, inputs, producing } => {
            let from = producing.iter().map(|f| format!("`{f}`")).collect::<Vec<_>>().join(", ");
            (
                format!("`{function}` on `{entity}` fired and produced `{flow}` from {from}"),
                inputs.values().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            )
        }
        Step::Relayed { entity, received, carrier } => (
            format!("`{entity}` relays `{received}` as `{flow}`"),
            vec![carrier.clone()],
        ),
    };
    Derivation {
        interaction: id.clone(),
        flow,
        justification,
        children: carriers.iter().map(|c| build_tree(active, c)).collect(),
    }
}

/// Independently re-check every recorded activation against the model and
/// the context's declared emissions, without re-running the fixpoint. Errors
/// describe the first step that fails to justify itself.
pub fn replay(model: &WorldModel, active: &ActiveSet) -> Result<(), String> {
    let ctx = model
        .contexts
        .get(&active.context)
        .ok_or_else(|| format!("unknown context `{}`", active.context))?;

    for (id, step) in &active.steps {
        let ir = model
            .interactions
            .get(id)
            .ok_or_else(|| format!("carried interaction `{id}` is not declared"))?;
        match step {
            Step::Seed { emission_entity, flow } => {
                let declared = ctx.emissions.iter().any(|em| {
                    em.entity == *emission_entity && em.flow == *flow && em.via == *id
                });
                if !declared {
                    return Err(format!("seed of `{id}` matches no declared emission"));
                }
                if !model.resolve_receiver(ir).is_admissible() {
                    return Err(format!("seed of `{id}` is not admissible at `{}`", ir.dest));
                }
            }
            Step::Produced { entity, function, inputs, producing } => {
                if ir.source != *entity {
                    return Err(format!("`{id}` does not leave `{entity}`"));
                }
                let func = model
                    .entities
                    .get(entity)
                    .and_then(|e| e.function(function))
                    .ok_or_else(|| format!("`{entity}` has no function `{function}`"))?;
                for (flow, carrier_id) in inputs {
                    let carrier = model
                        .interactions
                        .get(carrier_id)
                        .ok_or_else(|| format!("carrier `{carrier_id}` is not declared"))?;
                    if !active.carried.contains(carrier_id) {
                        return Err(format!("carrier `{carrier_id}` of `{id}` is not itself active"));
                    }
                    if carrier.dest != *entity || carrier.flow != *flow {
                        return Err(format!("carrier `{carrier_id}` does not deliver `{flow}` to `{entity}`"));
                    }
                    if !func.domain.contains(flow) {
                        return Err(format!("`{function}` does not admit `{flow}`"));
                    }
                }
                let delivered: BTreeSet<&FlowTypeId> = inputs.keys().collect();
                let rule_met = match func.firing {
                    FiringRule::All => func.domain.iter().all(|t| delivered.contains(t)),
                    FiringRule::Any => func.domain.iter().any(|t| delivered.contains(t)),
                };
                if !rule_met {
                    return Err(format!("firing rule of `{function}` is not met for `{id}`"));
                }
                let produces_flow = producing
                    .iter()
                    .any(|i| delivered.contains(i) && func.produces(i).contains(&ir.flow));
                if !produces_flow {
                    return Err(format!("no delivered input of `{function}` produces `{}`", ir.flow));
                }
            }
            Step::Relayed { entity, received, carrier } => {
                let rule_declared = model
                    .entities
                    .get(entity)
                    .map(|e| {
                        e.relay.iter().any(|r| {
                            r.received == *received && r.via == *id && r.emitted == ir.flow
                        })
                    })
                    .unwrap_or(false);
                if !rule_declared {
                    return Err(format!("no relay entry on `{entity}` justifies `{id}`"));
                }
                let c = model
                    .interactions
                    .get(carrier)
                    .ok_or_else(|| format!("relay carrier `{carrier}` is not declared"))?;
                if !active.carried.contains(carrier) || c.dest != *entity || c.flow != *received {
                    return Err(format!("relay carrier `{carrier}` does not deliver `{received}` to `{entity}`"));
                }
                if ir.source != *entity {
                    return Err(format!("relay target `{id}` does not leave `{entity}`"));
                }
            }
        }
    }
    Ok(())
}

/// Convenience: collect closure warnings into a [`Report`].
pub fn warnings_report(active: &ActiveSet) -> Report {
    Report { diagnostics: active.warnings.clone() }
}
