//! Boundary-relative classification of interactions and outcomes.
//!
//! Given a boundary commitment, every interaction falls into exactly one of
//! four classes depending on which side each endpoint sits on. The classes
//! are mutually exclusive and collectively exhaustive by construction: each
//! endpoint is internal or external, and the four combinations are the four
//! classes. An outcome inherits a two-way classification from the classes
//! of its grounding evidence.

use crate::error::EngineError;
use crate::ids::{EntityId, InteractionId};
use crate::model::{Boundary, Interaction, OutcomeDecl, WorldModel};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InteractionClass {
    /// Both endpoints internal.
    Internal,
    /// External source, internal destination.
    Inbound,
    /// Internal source, external destination.
    Outbound,
    /// Both endpoints external.
    External,
}

impl InteractionClass {
    /// True for the classes that cross or stay inside the boundary — i.e.
    /// everything except [`InteractionClass::External`].
    pub fn touches_internal(self) -> bool {
        self != InteractionClass::External
    }
}

impl fmt::Display for InteractionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionClass::Internal => "internal",
            InteractionClass::Inbound => "inbound",
            InteractionClass::Outbound => "outbound",
            InteractionClass::External => "external",
        })
    }
}

/// Which side of `boundary` the entity sits on.
///
/// Errors when the entity is committed to neither side (or both — the
/// validator reports that as a partition violation, and classification
/// refuses to guess).
fn side(boundary: &Boundary, id: &EntityId) -> Result<bool, EngineError> {
    let internal = boundary.internal.contains(id);
    let external = boundary.external.contains(id);
    match (internal, external) {
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        _ => Err(EngineError::ModelIntegrity(format!(
            "entity `{id}` is not committed to exactly one side of the boundary"
        ))),
    }
}

/// Classify one interaction against a boundary.
pub fn classify_interaction(
    ir: &Interaction,
    boundary: &Boundary,
) -> Result<InteractionClass, EngineError> {
    let src_internal = side(boundary, &ir.source)?;
    let dst_internal = side(boundary, &ir.dest)?;
    Ok(match (src_internal, dst_internal) {
        (true, true) => InteractionClass::Internal,
        (false, true) => InteractionClass::Inbound,
        (true, false) => InteractionClass::Outbound,
        (false, false) => InteractionClass::External,
    })
}

/// Classify every interaction in the model against its own boundary.
pub fn classify_all(
    model: &WorldModel,
) -> Result<BTreeMap<InteractionId, InteractionClass>, EngineError> {
    model
        .interactions
        .values()
        .map(|ir| Ok((ir.id.clone(), classify_interaction(ir, &model.boundary)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeClass {
    /// Every grounding interaction is class-internal: the outcome is a fact
    /// about the system's inner workings only.
    Internal,
    /// Some grounding interaction touches or sits outside the boundary.
    External,
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeClass::Internal => "internal",
            OutcomeClass::External => "external",
        })
    }
}

/// Classify an outcome against the model's current boundary.
///
/// Internal iff every interaction in every grounding alternative is class
/// Internal; anything else — inbound, outbound, or (after a boundary move)
/// fully external evidence — makes the outcome External. An outcome with no
/// grounding alternatives is vacuously Internal.
pub fn classify_outcome(
    model: &WorldModel,
    outcome: &OutcomeDecl,
) -> Result<OutcomeClass, EngineError> {
    for alternative in &outcome.groundings {
        for id in alternative {
            let ir = model
                .interactions
                .get(id)
                .ok_or_else(|| EngineError::UnknownInteraction(id.clone()))?;
            if classify_interaction(ir, &model.boundary)? != InteractionClass::Internal {
                return Ok(OutcomeClass::External);
            }
        }
    }
    Ok(OutcomeClass::Internal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::FlowTypeId;

    fn boundary(internal: &[&str], external: &[&str]) -> Boundary {
        Boundary {
            internal: internal.iter().map(|s| EntityId::from(*s)).collect(),
            external: external.iter().map(|s| EntityId::from(*s)).collect(),
        }
    }

    fn edge(src: &str, dst: &str) -> Interaction {
        Interaction {
            id: InteractionId::from("e"),
            source: EntityId::from(src),
            dest: EntityId::from(dst),
            flow: FlowTypeId::from("t"),
            interface: None,
            recv_function: None,
        }
    }

    #[test]
    fn four_quadrants() {
        let b = boundary(&["a", "b"], &["x", "y"]);
        assert_eq!(classify_interaction(&edge("a", "b"), &b).unwrap(), InteractionClass::Internal);
        assert_eq!(classify_interaction(&edge("x", "a"), &b).unwrap(), InteractionClass::Inbound);
        assert_eq!(classify_interaction(&edge("a", "x"), &b).unwrap(), InteractionClass::Outbound);
        assert_eq!(classify_interaction(&edge("x", "y"), &b).unwrap(), InteractionClass::External);
    }

    #[test]
    fn unresolved_endpoint_is_an_integrity_error() {
        let b = boundary(&["a"], &["x"]);
        assert!(classify_interaction(&edge("a", "ghost"), &b).is_err());
    }

    #[test]
    fn double_committed_endpoint_is_an_integrity_error() {
        let b = boundary(&["a", "clock"], &["clock", "x"]);
        assert!(classify_interaction(&edge("a", "clock"), &b).is_err());
    }
}
