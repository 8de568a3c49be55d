//! Diagnostics: spans, severities, and the stable rule catalog.
//!
//! Every finding the parser, validator, or engines report is a [`Diagnostic`]
//! carrying a stable kebab-case rule id, a source span, and (for semantic
//! rules) a citation into the calculus law index documented in the README.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A location in source text. `line` and `column` are 1-based; `length` is in
/// characters and may be zero for positions synthesized for programmatic
/// models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32, length: u32) -> Self {
        Self { file: file.into(), line, column, length }
    }

    /// Placeholder span for models built in memory rather than parsed.
    pub fn synthetic() -> Self {
        Self { file: "<model>".into(), line: 1, column: 1, length: 0 }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => f.write_str("warning"),
            Severity::Error => f.write_str("error"),
        }
    }
}

/// One reported finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable rule id from [`rules`].
    pub rule: &'static str,
    pub message: String,
    pub span: SourceSpan,
    /// Citation token into the law index (e.g. `D3`), when the rule enforces
    /// a specific law of the calculus.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<&'static str>,
}

impl Diagnostic {
    pub fn error(rule: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Self { severity: Severity::Error, rule, message: message.into(), span, law: law_of(rule) }
    }

    pub fn warning(rule: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Self { severity: Severity::Warning, rule, message: message.into(), span, law: law_of(rule) }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {}: {}", self.severity, self.rule, self.span, self.message)?;
        if let Some(law) = self.law {
            write!(f, " [{law}]")?;
        }
        Ok(())
    }
}

/// Stable rule ids. These strings are API: tests and downstream tooling match
/// on them, so changing one is a breaking change.
pub mod rules {
    // Syntax / structure.
    pub const SYNTAX: &str = "syntax";
    pub const NO_ENTITIES: &str = "no-entities";
    pub const DUPLICATE_ID: &str = "duplicate-id";
    pub const DUPLICATE_BOUNDARY: &str = "duplicate-boundary";

    // Reference resolution and universe shape.
    pub const UNRESOLVED_REFERENCE: &str = "unresolved-reference";
    pub const BOUNDARY_NOT_PARTITION: &str = "boundary-not-partition";
    pub const ENV_CANNOT_BE_INTERNAL: &str = "env-cannot-be-internal";
    pub const KIND_BOUNDARY_MISMATCH: &str = "kind-boundary-mismatch";
    pub const FUNCTION_REQUIRED: &str = "function-required";
    pub const SELF_LOOP: &str = "self-loop";

    // Functions and flows.
    pub const EMPTY_DOMAIN: &str = "empty-domain";
    pub const EMPTY_CODOMAIN: &str = "empty-codomain";
    pub const FLOW_NEVER_ACCEPTED: &str = "flow-never-accepted";
    pub const MAP_KEY_OUTSIDE_DOMAIN: &str = "map-key-outside-domain";
    pub const OUTPUT_OUTSIDE_CODOMAIN: &str = "output-outside-codomain";

    // Interactions and admissibility.
    pub const INADMISSIBLE_FLOW: &str = "inadmissible-flow";
    pub const AMBIGUOUS_RECEIVER: &str = "ambiguous-receiver";
    pub const UNKNOWN_RECEIVER: &str = "unknown-receiver";

    // State machines.
    pub const UNKNOWN_STATE: &str = "unknown-state";
    pub const TRANSITION_FLOW_INADMISSIBLE: &str = "transition-flow-inadmissible";
    pub const NO_TRANSITION: &str = "no-transition";

    // Relay and emissions.
    pub const RELAY_ON_NON_EXTERNAL: &str = "relay-on-non-external";
    pub const RELAY_SOURCE_MISMATCH: &str = "relay-source-mismatch";
    pub const RELAY_FLOW_MISMATCH: &str = "relay-flow-mismatch";
    pub const EMITS_ON_NON_ENV: &str = "emits-on-non-env";
    pub const EMISSION_NOT_INBOUND: &str = "emission-not-inbound";
    pub const EMISSION_SOURCE_MISMATCH: &str = "emission-source-mismatch";
    pub const EMISSION_FLOW_MISMATCH: &str = "emission-flow-mismatch";
    pub const INADMISSIBLE_EMISSION: &str = "inadmissible-emission";

    // System-level properties.
    pub const CLOSED_SYSSOL: &str = "closed-syssol";

    // Outcomes, goals, requirements.
    pub const UNGROUNDED_OUTCOME: &str = "ungrounded-outcome";
    pub const OUTCOME_WITHOUT_GROUNDING: &str = "outcome-without-grounding";
    pub const DESIRED_OUTCOME_NOT_EXTERNAL: &str = "desired-outcome-not-external";
    pub const GROUNDING_EXTERNAL_INTERACTION: &str = "grounding-external-interaction";
    pub const SUBJECT_NOT_INTERNAL: &str = "subject-not-internal";
}

/// Law citation for the rules that enforce a specific law of the calculus.
/// Axioms are A1–A3, definitions D1–D16, consequences T1–T11 and C1; the
/// README's law index spells each out.
fn law_of(rule: &'static str) -> Option<&'static str> {
    use rules::*;
    Some(match rule {
        UNRESOLVED_REFERENCE => "A1",
        BOUNDARY_NOT_PARTITION | KIND_BOUNDARY_MISMATCH => "D9a",
        ENV_CANNOT_BE_INTERNAL => "D6",
        FUNCTION_REQUIRED => "D4",
        FLOW_NEVER_ACCEPTED => "D1",
        EMPTY_DOMAIN | EMPTY_CODOMAIN | MAP_KEY_OUTSIDE_DOMAIN | OUTPUT_OUTSIDE_CODOMAIN => "D16",
        INADMISSIBLE_FLOW | AMBIGUOUS_RECEIVER | UNKNOWN_RECEIVER => "D3",
        UNKNOWN_STATE | TRANSITION_FLOW_INADMISSIBLE => "D7",
        NO_TRANSITION => "D8",
        RELAY_ON_NON_EXTERNAL | RELAY_SOURCE_MISMATCH | RELAY_FLOW_MISMATCH => "D5",
        EMITS_ON_NON_ENV | EMISSION_NOT_INBOUND | EMISSION_SOURCE_MISMATCH
        | EMISSION_FLOW_MISMATCH => "D11",
        INADMISSIBLE_EMISSION => "T2",
        CLOSED_SYSSOL => "D4",
        UNGROUNDED_OUTCOME | GROUNDING_EXTERNAL_INTERACTION | OUTCOME_WITHOUT_GROUNDING => "D12",
        DESIRED_OUTCOME_NOT_EXTERNAL => "D14",
        SUBJECT_NOT_INTERNAL => "D15",
        _ => return None,
    })
}

/// A validation or parse report: the collected diagnostics in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostic_rendering_includes_rule_span_and_law() {
        let d = Diagnostic::error(
            rules::INADMISSIBLE_FLOW,
            "flow `telemetry` is not admissible at `vehicles`",
            SourceSpan::new("m.psw", 7, 3, 9),
        );
        let text = d.to_string();
        assert!(text.contains("error[inadmissible-flow]"));
        assert!(text.contains("m.psw:7:3"));
        assert!(text.contains("[D3]"));
    }

    #[test]
    fn warnings_do_not_count_as_errors() {
        let mut r = Report::default();
        r.push(Diagnostic::warning(
            rules::CLOSED_SYSSOL,
            "no interaction crosses the boundary",
            SourceSpan::synthetic(),
        ));
        assert!(!r.is_clean());
        assert!(!r.has_errors());
    }
}
