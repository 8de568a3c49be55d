//! Problem-space world models: a closed universe of entities exchanging
//! typed flows, a committed system boundary, and outcomes whose truth is
//! judged per operational context.
//!
//! The crate provides the model types and the analyses over them:
//! validation of the declaration laws, context activation ([`activation`]),
//! outcome truth and invariance ([`outcomes`]), determination analysis and
//! reduction ([`minimal`]), boundary rescoping ([`boundary`]), sufficiency
//! auditing ([`audit`]), scheduled simulation ([`simulate`]), and the
//! `.psw` text format ([`dsl`]).
//!
//! A design invariant runs through all of it: what flows is derived from
//! declared structure only, so moving the boundary re-labels interactions
//! but never changes an outcome's truth.

pub mod activation;
pub mod audit;
pub mod boundary;
pub mod classify;
pub mod diag;
pub mod dsl;
pub mod error;
pub mod ids;
pub mod minimal;
pub mod model;
pub mod outcomes;
pub mod simulate;
pub mod validate;

pub use activation::{compute_active_set, explain_activation, replay, ActiveSet, Derivation, Step};
pub use audit::{
    audit_sufficiency, check_goal_satisfaction, impact_of_new_outcome, ChecklistRow, DeltaCell,
    GoalReport, GoalRow, ImpactReport, SufficiencyReport, TruthCell,
};
pub use boundary::{rescope, verify_boundary_independence, IndependenceReport, RescopePlan};
pub use classify::{classify_all, classify_interaction, classify_outcome, InteractionClass, OutcomeClass};
pub use diag::{Diagnostic, Report, Severity, SourceSpan};
pub use dsl::{parse_fragment, parse_model, serialize_model};
pub use error::EngineError;
pub use ids::{
    ContextId, EntityId, FlowTypeId, GoalId, InteractionId, OutcomeId, RequirementId, StakeholderId,
};
pub use minimal::{
    find_minimal_sets, find_nonessential, reduce_model, remove_interactions, truth_table,
    MinimalSetsOptions, MinimalSetsReport, NonessentialReport, Reduction, DEFAULT_SUBSET_CAP,
};
pub use model::{
    Boundary, ContextDecl, Emission, Entity, EntityKind, FiringRule, FunctionSpec, Interaction,
    OutcomeDecl, Receiver, RelayRule, RequirementDecl, Stakeholder, StateMachine, WorldModel,
};
pub use outcomes::{check_invariance, evaluate_against, evaluate_outcome, Invariance, OutcomeEval};
pub use simulate::{simulate, SimulationTrace, TraceStep};
pub use validate::validate_model;
