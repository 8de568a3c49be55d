//! The world-model data types: entities, functions, interactions, boundary,
//! contexts, outcomes, stakeholders, and requirements.
//!
//! A [`WorldModel`] is a closed universe: every id mentioned anywhere must be
//! declared somewhere in the same model, and the validator treats dangling
//! references as errors rather than implicit declarations. All collections
//! are ordered (`BTreeMap`/`BTreeSet`) so that every analysis, serialization,
//! and report derived from a model is deterministic.
//!
//! Semantic equality (`PartialEq`) ignores [`ModelMeta`]: two models that
//! differ only in source spans, file name, or provenance compare equal.

use crate::diag::SourceSpan;
use crate::ids::*;
use std::collections::{BTreeMap, BTreeSet};

/// Which of the three disjoint roles an entity plays in the universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EntityKind {
    /// Part of the system solution: bears functions that fire and produce.
    InternalFunction,
    /// Outside the boundary, interacts with the system; black-box behavior.
    ExternalSystem,
    /// Surrounding context: can emit flows, never receives obligations, and
    /// can never be moved inside the boundary.
    Environment,
}

impl EntityKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EntityKind::InternalFunction => "internal",
            EntityKind::ExternalSystem => "external",
            EntityKind::Environment => "env",
        }
    }
}

/// When a function fires over the flows delivered to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FiringRule {
    /// Fires only once every domain flow has been delivered.
    #[default]
    All,
    /// Fires as soon as any domain flow has been delivered.
    Any,
}

/// Deterministic state machine attached to a function: a total order on
/// states is not required, but every transition must stay inside `states`
/// and be keyed by a flow the owning function admits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateMachine {
    pub states: BTreeSet<String>,
    pub initial: String,
    /// (current state, delivered flow) -> next state. A missing key means
    /// the machine stutters on that delivery.
    pub transitions: BTreeMap<(String, FlowTypeId), String>,
}

/// A declared function: its admissible inputs, producible outputs, the
/// explicit input→outputs production map, firing rule, and optional states.
///
/// Production is strictly declared: an input with no `output_map` entry
/// produces nothing. Receiving declarations on external systems therefore
/// have empty maps and never emit — external behavior enters the model only
/// through declared relay entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    pub name: String,
    pub domain: BTreeSet<FlowTypeId>,
    pub codomain: BTreeSet<FlowTypeId>,
    pub output_map: BTreeMap<FlowTypeId, BTreeSet<FlowTypeId>>,
    pub firing: FiringRule,
    pub states: Option<StateMachine>,
}

impl FunctionSpec {
    /// Flows this function produces when `input` is delivered.
    pub fn produces(&self, input: &FlowTypeId) -> BTreeSet<FlowTypeId> {
        self.output_map.get(input).cloned().unwrap_or_default()
    }
}

/// One declared relay entry on an external system: receiving `received`
/// re-emits `emitted` on the named outgoing interaction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RelayRule {
    pub received: FlowTypeId,
    pub emitted: FlowTypeId,
    pub via: InteractionId,
}

/// A declared entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub functions: Vec<FunctionSpec>,
    /// Declared relay behavior (external systems only, in declared models).
    pub relay: BTreeSet<RelayRule>,
    /// Emission capability of an environment entity: which flows it can put
    /// on which inbound interactions. Contexts pick from this capability.
    pub emits: BTreeSet<(FlowTypeId, InteractionId)>,
}

impl Entity {
    pub fn new(id: impl Into<EntityId>, kind: EntityKind) -> Self {
        Self { id: id.into(), kind, functions: Vec::new(), relay: BTreeSet::new(), emits: BTreeSet::new() }
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.name == name)
    }
}

/// A declared interaction: one directed edge from `source` to `dest`
/// carrying exactly one flow type, with an optional interface label and an
/// optional explicit receiving function on the destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub id: InteractionId,
    pub source: EntityId,
    pub dest: EntityId,
    pub flow: FlowTypeId,
    pub interface: Option<String>,
    pub recv_function: Option<String>,
}

/// The boundary commitment: a two-way split of the declared universe.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Boundary {
    pub internal: BTreeSet<EntityId>,
    pub external: BTreeSet<EntityId>,
}

/// One environment emission inside a context: `entity` puts `flow` on the
/// inbound interaction `via`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Emission {
    pub entity: EntityId,
    pub flow: FlowTypeId,
    pub via: InteractionId,
}

/// An operational context: the set of environment emissions in effect.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextDecl {
    pub id: ContextId,
    pub emissions: BTreeSet<Emission>,
}

/// A declared outcome proposition with its grounding alternatives.
///
/// Truth is disjunctive over the alternatives: the outcome holds in a
/// context when at least one alternative's interactions are all active.
/// An outcome with zero alternatives is constantly false; the parser
/// requires at least one on freshly declared models, but reductions may
/// leave an engine-produced model with none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDecl {
    pub id: OutcomeId,
    pub description: String,
    pub groundings: BTreeSet<BTreeSet<InteractionId>>,
}

/// A stakeholder and the goals they hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stakeholder {
    pub id: StakeholderId,
    pub goals: BTreeMap<GoalId, String>,
}

/// A scoped requirement: `subject` must turn `input` into `output`, in one
/// named context or (when `condition` is absent) in all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementDecl {
    pub id: RequirementId,
    pub subject: EntityId,
    pub input: FlowTypeId,
    pub output: FlowTypeId,
    pub condition: Option<ContextId>,
}

/// Key for looking up the source span of a declared construct.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpanKey {
    Entity(EntityId),
    Function(EntityId, String),
    Relay(EntityId, RelayRule),
    Emits(EntityId, FlowTypeId, InteractionId),
    Interaction(InteractionId),
    Boundary,
    Context(ContextId),
    Emission(ContextId, Emission),
    Outcome(OutcomeId),
    Stakeholder(StakeholderId),
    Requirement(RequirementId),
}

/// Non-semantic bookkeeping: where constructs came from and how the model
/// was produced. Compares equal to any other instance so that semantic
/// equality of models ignores layout and history.
#[derive(Debug, Clone, Default)]
pub struct ModelMeta {
    pub source: String,
    pub spans: BTreeMap<SpanKey, SourceSpan>,
    /// Free-text history line emitted as a comment header on serialization
    /// (set by model-producing operations such as reduction).
    pub provenance: Option<String>,
}

impl PartialEq for ModelMeta {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for ModelMeta {}

impl ModelMeta {
    pub fn span(&self, key: &SpanKey) -> SourceSpan {
        self.spans.get(key).cloned().unwrap_or_else(|| {
            let mut s = SourceSpan::synthetic();
            if !self.source.is_empty() {
                s.file = self.source.clone();
            }
            s
        })
    }
}

/// How an interaction's destination resolves to a receiving function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Receiver {
    /// Exactly one admitting function (named explicitly or unique by domain).
    Function(String),
    /// Destination declares no functions at all; the flow is accepted
    /// without an admissibility constraint and simply absorbed or relayed.
    Absorbing,
    /// Destination has functions but none admits the flow.
    NoneAdmits,
    /// More than one function admits the flow and none was named.
    Ambiguous(Vec<String>),
    /// The named receiving function does not exist on the destination.
    UnknownNamed(String),
    /// The destination entity itself is not declared.
    UnknownDest,
}

impl Receiver {
    /// True when delivery through this resolution is admissible.
    pub fn is_admissible(&self) -> bool {
        matches!(self, Receiver::Function(_) | Receiver::Absorbing)
    }
}

/// The whole declared universe plus its boundary commitment.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldModel {
    pub entities: BTreeMap<EntityId, Entity>,
    pub interactions: BTreeMap<InteractionId, Interaction>,
    pub boundary: Boundary,
    pub contexts: BTreeMap<ContextId, ContextDecl>,
    pub outcomes: BTreeMap<OutcomeId, OutcomeDecl>,
    pub stakeholders: BTreeMap<StakeholderId, Stakeholder>,
    /// Desired-outcome links: outcome -> the goals it supports.
    pub desired: BTreeMap<OutcomeId, BTreeSet<GoalId>>,
    pub requirements: BTreeMap<RequirementId, RequirementDecl>,
    /// Permit interactions whose source and destination coincide. Only
    /// settable programmatically; the surface syntax has no toggle for it.
    pub allow_self_loops: bool,
    pub meta: ModelMeta,
}

impl WorldModel {
    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    /// True when `id` is committed to the internal side of the boundary.
    pub fn is_internal(&self, id: &EntityId) -> bool {
        self.boundary.internal.contains(id)
    }

    /// Every flow type the model mentions anywhere. The surface syntax has
    /// no flow declaration block; the set of flow types is derived from use.
    pub fn flow_types(&self) -> BTreeSet<FlowTypeId> {
        let mut flows = BTreeSet::new();
        for e in self.entities.values() {
            for f in &e.functions {
                flows.extend(f.domain.iter().cloned());
                flows.extend(f.codomain.iter().cloned());
                for (k, vs) in &f.output_map {
                    flows.insert(k.clone());
                    flows.extend(vs.iter().cloned());
                }
                if let Some(sm) = &f.states {
                    flows.extend(sm.transitions.keys().map(|(_, t)| t.clone()));
                }
            }
            for r in &e.relay {
                flows.insert(r.received.clone());
                flows.insert(r.emitted.clone());
            }
            flows.extend(e.emits.iter().map(|(t, _)| t.clone()));
        }
        for ir in self.interactions.values() {
            flows.insert(ir.flow.clone());
        }
        for c in self.contexts.values() {
            flows.extend(c.emissions.iter().map(|e| e.flow.clone()));
        }
        for r in self.requirements.values() {
            flows.insert(r.input.clone());
            flows.insert(r.output.clone());
        }
        flows
    }

    /// All goal ids declared by any stakeholder.
    pub fn goals(&self) -> BTreeMap<GoalId, StakeholderId> {
        let mut out = BTreeMap::new();
        for s in self.stakeholders.values() {
            for g in s.goals.keys() {
                out.insert(g.clone(), s.id.clone());
            }
        }
        out
    }

    /// Resolve which function on the destination receives `ir`'s flow.
    ///
    /// An explicit `recv` name wins; otherwise the unique function whose
    /// domain admits the flow. Resolution never consults the boundary, so
    /// admissibility verdicts survive rescoping unchanged.
    pub fn resolve_receiver(&self, ir: &Interaction) -> Receiver {
        let Some(dest) = self.entities.get(&ir.dest) else {
            return Receiver::UnknownDest;
        };
        if let Some(name) = &ir.recv_function {
            return match dest.function(name) {
                Some(f) if f.domain.contains(&ir.flow) => Receiver::Function(name.clone()),
                Some(_) => Receiver::NoneAdmits,
                None => Receiver::UnknownNamed(name.clone()),
            };
        }
        if dest.functions.is_empty() {
            return Receiver::Absorbing;
        }
        let admitting: Vec<&str> = dest
            .functions
            .iter()
            .filter(|f| f.domain.contains(&ir.flow))
            .map(|f| f.name.as_str())
            .collect();
        match admitting.as_slice() {
            [] => Receiver::NoneAdmits,
            [one] => Receiver::Function((*one).to_string()),
            many => Receiver::Ambiguous(many.iter().map(|s| (*s).to_string()).collect()),
        }
    }

    /// Span of a construct, for diagnostics.
    pub fn span(&self, key: &SpanKey) -> SourceSpan {
        self.meta.span(key)
    }
}
