//! Newtype identifiers for the model's namespaces.
//!
//! Each namespace (entities, flow types, interactions, contexts, outcomes,
//! goals, stakeholders, requirements) has its own id type so references can
//! never cross namespaces by accident. Ids are plain strings matching
//! `[A-Za-z_][A-Za-z0-9_.-]*` and order lexicographically, which is what
//! makes every set iteration in the engine deterministic.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// Names an entity: an internal function bearer, external system, or environment entity.
    EntityId
);
id_type!(
    /// Names a flow type carried by interactions and accepted by function domains.
    FlowTypeId
);
id_type!(
    /// Names a declared interaction (one directed edge carrying one flow type).
    InteractionId
);
id_type!(
    /// Names an operational context (a set of environment emissions).
    ContextId
);
id_type!(
    /// Names a declared outcome proposition.
    OutcomeId
);
id_type!(
    /// Names a stakeholder goal.
    GoalId
);
id_type!(
    /// Names a stakeholder.
    StakeholderId
);
id_type!(
    /// Names a requirement declaration.
    RequirementId
);

/// True when `s` is a well-formed identifier: `[A-Za-z_][A-Za-z0-9_.-]*`.
pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}
