//! Engine-level errors: failures of an operation's contract, as opposed to
//! model findings (which are [`crate::diag::Diagnostic`]s).

use crate::ids::{ContextId, EntityId, InteractionId, OutcomeId};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown context `{0}`")]
    UnknownContext(ContextId),

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(OutcomeId),

    #[error("unknown interaction `{0}`")]
    UnknownInteraction(InteractionId),

    #[error("interaction `{0}` is not active in this context")]
    NotActive(InteractionId),

    #[error(
        "grounding of `{outcome}` violates the participation condition: \
         alternative {{{alternative}}} has no internal endpoint"
    )]
    UngroundedOutcome { outcome: OutcomeId, alternative: String },

    #[error(
        "determination search space has {candidates} candidate interactions \
         (2^{candidates} subsets), above the cap of {cap}"
    )]
    SearchTooLarge { candidates: usize, cap: usize },

    #[error(
        "removal not truth-preserving: `{outcome}` changes verdict under `{context}` \
         ({before} before, {after} after)"
    )]
    NotRemovable { outcome: OutcomeId, context: ContextId, before: bool, after: bool },

    #[error("interactions not certified non-essential: {0:?}")]
    NotCertified(Vec<InteractionId>),

    #[error("environment entity `{0}` can never be internal")]
    EnvCannotBeInternal(EntityId),

    #[error("rescope needs a non-empty internal set")]
    EmptyRescope,

    #[error("models do not differ by a boundary move alone: {0}")]
    NotARescope(String),

    #[error("model is not sufficient; goal satisfaction is undefined ({0} checklist cells missing)")]
    InsufficientModel(usize),

    #[error("outcome `{0}` already exists")]
    OutcomeExists(OutcomeId),

    #[error("model integrity: {0}")]
    ModelIntegrity(String),
}

/// Stable machine-readable code for an engine error, mirroring the rule-id
/// convention used by diagnostics.
impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::UnknownContext(_) => "unknown-context",
            EngineError::UnknownOutcome(_) => "unknown-outcome",
            EngineError::UnknownInteraction(_) => "unknown-interaction",
            EngineError::NotActive(_) => "not-active",
            EngineError::UngroundedOutcome { .. } => "ungrounded-outcome",
            EngineError::SearchTooLarge { .. } => "search-too-large",
            EngineError::NotRemovable { .. } => "not-removable",
            EngineError::NotCertified(_) => "not-certified",
            EngineError::EnvCannotBeInternal(_) => "env-cannot-be-internal",
            EngineError::EmptyRescope => "empty-rescope",
            EngineError::NotARescope(_) => "not-a-rescope",
            EngineError::InsufficientModel(_) => "insufficient-model",
            EngineError::OutcomeExists(_) => "outcome-exists",
            EngineError::ModelIntegrity(_) => "model-integrity",
        }
    }
}
