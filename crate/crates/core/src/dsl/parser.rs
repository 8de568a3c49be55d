//! Recursive-descent parser for `.psw` model files.
//!
//! Declarations are keyword-introduced blocks. Keywords are contextual:
//! every keyword is also a legal identifier, and the grammar is arranged so
//! position always disambiguates. On a syntax error the parser reports a
//! diagnostic and skips ahead to the next top-level declaration keyword at
//! brace depth zero, so one malformed block yields one diagnostic without
//! hiding errors in the blocks after it. If any error is found, no model is
//! returned: downstream analyses never see a half-read universe.

use super::lexer::{lex, Token, TokenKind};
use crate::diag::{rules, Diagnostic, Severity, SourceSpan};
use crate::ids::*;
use crate::model::*;
use std::collections::{BTreeMap, BTreeSet};

const BLOCK_KEYWORDS: [&str; 7] =
    ["entity", "interaction", "boundary", "context", "outcome", "stakeholder", "requirement"];

/// Parse a complete model. `Ok` carries the model plus any warnings; `Err`
/// carries every diagnostic found (warnings included).
pub fn parse_model(
    source: &str,
    file: &str,
) -> Result<(WorldModel, Vec<Diagnostic>), Vec<Diagnostic>> {
    parse(source, file, true)
}

/// Parse a partial model: any subset of declarations, an empty universe
/// included. This is the entry point for incremental construction, where
/// declarations arrive one block at a time and are merged into a growing
/// model; whole-model coherence stays the validator's job.
pub fn parse_fragment(
    source: &str,
    file: &str,
) -> Result<(WorldModel, Vec<Diagnostic>), Vec<Diagnostic>> {
    parse(source, file, false)
}

fn parse(
    source: &str,
    file: &str,
    require_entities: bool,
) -> Result<(WorldModel, Vec<Diagnostic>), Vec<Diagnostic>> {
    let (tokens, mut diagnostics) = lex(source, file);
    let mut parser = Parser {
        tokens,
        pos: 0,
        file: file.to_string(),
        diagnostics: Vec::new(),
        model: WorldModel::default(),
        boundary_internal: None,
    };
    parser.model.meta.source = file.to_string();
    parser.run();
    diagnostics.append(&mut parser.diagnostics);

    if require_entities && parser.model.entities.is_empty() {
        diagnostics.push(Diagnostic::error(
            rules::NO_ENTITIES,
            "the model declares no entities; the universe may not be empty".to_string(),
            SourceSpan { file: file.to_string(), line: 1, column: 1, length: 0 },
        ));
    }

    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(diagnostics);
    }

    let mut model = parser.model;
    if let Some(internal) = parser.boundary_internal {
        let external: BTreeSet<EntityId> =
            model.entities.keys().filter(|id| !internal.contains(*id)).cloned().collect();
        model.boundary = Boundary { internal, external };
    }
    Ok((model, diagnostics))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: String,
    diagnostics: Vec<Diagnostic>,
    model: WorldModel,
    boundary_internal: Option<BTreeSet<EntityId>>,
}

impl Parser {
    fn run(&mut self) {
        while let Some(token) = self.peek() {
            let result = match token.ident() {
                Some("entity") => self.parse_entity(),
                Some("interaction") => self.parse_interaction(),
                Some("boundary") => self.parse_boundary(),
                Some("context") => self.parse_context(),
                Some("outcome") => self.parse_outcome(),
                Some("stakeholder") => self.parse_stakeholder(),
                Some("requirement") => self.parse_requirement(),
                _ => {
                    let span = token.span.clone();
                    self.error(format!("expected a declaration, found {}", describe(token)), span);
                    Err(())
                }
            };
            if result.is_err() {
                self.recover_to_block();
            }
        }
    }

    // --- token plumbing ---

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_ident(&self) -> Option<&str> {
        self.peek().and_then(|t| t.ident())
    }

    fn eof_span(&self) -> SourceSpan {
        self.tokens
            .last()
            .map(|t| t.span.clone())
            .unwrap_or(SourceSpan { file: self.file.clone(), line: 1, column: 1, length: 0 })
    }

    fn error(&mut self, message: String, span: SourceSpan) {
        self.diagnostics.push(Diagnostic::error(rules::SYNTAX, message, span));
    }

    /// Skip to the next top-level declaration keyword at brace depth zero.
    fn recover_to_block(&mut self) {
        let mut depth: i32 = 0;
        while let Some(token) = self.peek() {
            match &token.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => depth -= 1,
                TokenKind::Ident(s) if depth <= 0 && BLOCK_KEYWORDS.contains(&s.as_str()) => {
                    return;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), ()> {
        match self.peek() {
            Some(Token { kind: TokenKind::Ident(s), span }) => {
                let out = (s.clone(), span.clone());
                self.pos += 1;
                Ok(out)
            }
            Some(t) => {
                let (d, span) = (describe(t), t.span.clone());
                self.error(format!("expected {what}, found {d}"), span);
                Err(())
            }
            None => {
                let span = self.eof_span();
                self.error(format!("expected {what}, found end of input"), span);
                Err(())
            }
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<SourceSpan, ()> {
        match self.peek() {
            Some(Token { kind: TokenKind::Ident(s), span }) if s == keyword => {
                let span = span.clone();
                self.pos += 1;
                Ok(span)
            }
            Some(t) => {
                let (d, span) = (describe(t), t.span.clone());
                self.error(format!("expected `{keyword}`, found {d}"), span);
                Err(())
            }
            None => {
                let span = self.eof_span();
                self.error(format!("expected `{keyword}`, found end of input"), span);
                Err(())
            }
        }
    }

    fn expect_punct(&mut self, kind: &TokenKind, what: &str) -> Result<SourceSpan, ()> {
        match self.peek() {
            Some(t) if t.kind == *kind => {
                let span = t.span.clone();
                self.pos += 1;
                Ok(span)
            }
            Some(t) => {
                let (d, span) = (describe(t), t.span.clone());
                self.error(format!("expected {what}, found {d}"), span);
                Err(())
            }
            None => {
                let span = self.eof_span();
                self.error(format!("expected {what}, found end of input"), span);
                Err(())
            }
        }
    }

    fn eat_keyword(&mut self, keyword: &str) -> bool {
        if self.peek_ident() == Some(keyword) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `{ a, b, c }`; an empty `{ }` is tolerated (semantic checks decide
    /// whether emptiness is legal where it appears).
    fn parse_idset(&mut self) -> Result<Vec<(String, SourceSpan)>, ()> {
        self.expect_punct(&TokenKind::LBrace, "`{`")?;
        let mut items = Vec::new();
        if self.peek().map(|t| t.kind == TokenKind::RBrace) == Some(true) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.expect_ident("an identifier")?);
            match self.peek() {
                Some(t) if t.kind == TokenKind::Comma => {
                    self.pos += 1;
                }
                Some(t) if t.kind == TokenKind::RBrace => {
                    self.pos += 1;
                    return Ok(items);
                }
                _ => {
                    self.expect_punct(&TokenKind::RBrace, "`,` or `}`")?;
                    return Ok(items);
                }
            }
        }
    }

    fn duplicate(&mut self, what: &str, id: &str, span: SourceSpan) {
        self.diagnostics.push(Diagnostic::error(
            rules::DUPLICATE_ID,
            format!("{what} `{id}` is declared more than once"),
            span,
        ));
    }

    // --- declarations ---

    fn parse_entity(&mut self) -> Result<(), ()> {
        self.expect_keyword("entity")?;
        let (id, id_span) = self.expect_ident("an entity id")?;
        self.expect_keyword("kind")?;
        let (kind_name, kind_span) = self.expect_ident("a kind (`internal`, `external` or `env`)")?;
        let kind = match kind_name.as_str() {
            "internal" => EntityKind::InternalFunction,
            "external" => EntityKind::ExternalSystem,
            "env" => EntityKind::Environment,
            other => {
                self.error(
                    format!("unknown kind `{other}`; expected `internal`, `external` or `env`"),
                    kind_span,
                );
                return Err(());
            }
        };

        let mut entity = Entity::new(id.as_str(), kind);
        let mut fn_spans: Vec<(String, SourceSpan)> = Vec::new();
        let mut item_spans: Vec<(SpanKey, SourceSpan)> = Vec::new();
        if self.peek().map(|t| t.kind == TokenKind::LBrace) == Some(true) {
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(t) if t.kind == TokenKind::RBrace => {
                        self.pos += 1;
                        break;
                    }
                    Some(t) => match t.ident() {
                        Some("function") => {
                            let (func, span) = self.parse_function()?;
                            fn_spans.push((func.name.clone(), span));
                            entity.functions.push(func);
                        }
                        Some("relay") => {
                            let span = self.expect_keyword("relay")?;
                            let (received, _) = self.expect_ident("a received flow type")?;
                            self.expect_punct(&TokenKind::Arrow, "`->`")?;
                            let (emitted, _) = self.expect_ident("an emitted flow type")?;
                            self.expect_keyword("via")?;
                            let (via, _) = self.expect_ident("an interaction id")?;
                            let rule = RelayRule {
                                received: FlowTypeId::new(received),
                                emitted: FlowTypeId::new(emitted),
                                via: InteractionId::new(via),
                            };
                            item_spans.push((
                                SpanKey::Relay(entity.id.clone(), rule.clone()),
                                span,
                            ));
                            entity.relay.insert(rule);
                        }
                        Some("emits") => {
                            let span = self.expect_keyword("emits")?;
                            let (flow, _) = self.expect_ident("a flow type")?;
                            self.expect_keyword("on")?;
                            let (via, _) = self.expect_ident("an interaction id")?;
                            let flow = FlowTypeId::new(flow);
                            let via = InteractionId::new(via);
                            item_spans.push((
                                SpanKey::Emits(entity.id.clone(), flow.clone(), via.clone()),
                                span,
                            ));
                            entity.emits.insert((flow, via));
                        }
                        _ => {
                            let (d, span) = (describe(t), t.span.clone());
                            self.error(
                                format!("expected `function`, `relay`, `emits` or `}}`, found {d}"),
                                span,
                            );
                            return Err(());
                        }
                    },
                    None => {
                        let span = self.eof_span();
                        self.error("unclosed entity block".to_string(), span);
                        return Err(());
                    }
                }
            }
        }

        if self.model.entities.contains_key(&entity.id) {
            self.duplicate("entity", &id, id_span);
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Entity(entity.id.clone()), id_span);
        for (name, span) in fn_spans {
            self.model.meta.spans.insert(SpanKey::Function(entity.id.clone(), name), span);
        }
        for (key, span) in item_spans {
            self.model.meta.spans.insert(key, span);
        }
        self.model.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    fn parse_function(&mut self) -> Result<(FunctionSpec, SourceSpan), ()> {
        self.expect_keyword("function")?;
        let (name, name_span) = self.expect_ident("a function name")?;
        self.expect_keyword("domain")?;
        let domain = self.parse_idset()?;
        self.expect_keyword("codomain")?;
        let codomain = self.parse_idset()?;

        let mut func = FunctionSpec {
            name,
            domain: domain.into_iter().map(|(s, _)| FlowTypeId::new(s)).collect(),
            codomain: codomain.into_iter().map(|(s, _)| FlowTypeId::new(s)).collect(),
            output_map: BTreeMap::new(),
            firing: FiringRule::All,
            states: None,
        };

        loop {
            match self.peek_ident() {
                Some("map") => {
                    self.pos += 1;
                    let (input, _) = self.expect_ident("an input flow type")?;
                    self.expect_punct(&TokenKind::Arrow, "`->`")?;
                    let outputs = self.parse_idset()?;
                    func.output_map
                        .entry(FlowTypeId::new(input))
                        .or_default()
                        .extend(outputs.into_iter().map(|(s, _)| FlowTypeId::new(s)));
                }
                Some("firing") => {
                    self.pos += 1;
                    let (mode, span) = self.expect_ident("`all` or `any`")?;
                    func.firing = match mode.as_str() {
                        "all" => FiringRule::All,
                        "any" => FiringRule::Any,
                        other => {
                            self.error(format!("unknown firing rule `{other}`"), span);
                            return Err(());
                        }
                    };
                }
                Some("states") => {
                    self.pos += 1;
                    let states = self.parse_idset()?;
                    self.expect_keyword("initial")?;
                    let (initial, _) = self.expect_ident("a state name")?;
                    let mut machine = StateMachine {
                        states: states.into_iter().map(|(s, _)| s).collect(),
                        initial,
                        transitions: BTreeMap::new(),
                    };
                    while self.eat_keyword("on") {
                        let (from, _) = self.expect_ident("a state name")?;
                        self.expect_punct(&TokenKind::Comma, "`,`")?;
                        let (flow, _) = self.expect_ident("a flow type")?;
                        self.expect_punct(&TokenKind::Arrow, "`->`")?;
                        let (to, _) = self.expect_ident("a state name")?;
                        machine.transitions.insert((from, FlowTypeId::new(flow)), to);
                    }
                    func.states = Some(machine);
                }
                _ => break,
            }
        }
        Ok((func, name_span))
    }

    fn parse_interaction(&mut self) -> Result<(), ()> {
        self.expect_keyword("interaction")?;
        let (id, id_span) = self.expect_ident("an interaction id")?;
        self.expect_punct(&TokenKind::Colon, "`:`")?;
        let (source, _) = self.expect_ident("a source entity")?;
        self.expect_punct(&TokenKind::Arrow, "`->`")?;
        let (dest, _) = self.expect_ident("a destination entity")?;
        self.expect_keyword("flow")?;
        let (flow, _) = self.expect_ident("a flow type")?;
        let interface = if self.eat_keyword("via") {
            Some(self.expect_ident("an interface name")?.0)
        } else {
            None
        };
        let recv_function = if self.eat_keyword("recv") {
            Some(self.expect_ident("a function name")?.0)
        } else {
            None
        };

        let id = InteractionId::new(id);
        if self.model.interactions.contains_key(&id) {
            self.duplicate("interaction", id.as_str(), id_span);
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Interaction(id.clone()), id_span);
        self.model.interactions.insert(
            id.clone(),
            Interaction {
                id,
                source: EntityId::new(source),
                dest: EntityId::new(dest),
                flow: FlowTypeId::new(flow),
                interface,
                recv_function,
            },
        );
        Ok(())
    }

    fn parse_boundary(&mut self) -> Result<(), ()> {
        let span = self.expect_keyword("boundary")?;
        self.expect_keyword("internal")?;
        let members = self.parse_idset()?;
        if self.boundary_internal.is_some() {
            self.diagnostics.push(Diagnostic::error(
                rules::DUPLICATE_BOUNDARY,
                "the boundary is already committed; only one boundary block is allowed".to_string(),
                span,
            ));
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Boundary, span);
        self.boundary_internal =
            Some(members.into_iter().map(|(s, _)| EntityId::new(s)).collect());
        Ok(())
    }

    fn parse_context(&mut self) -> Result<(), ()> {
        self.expect_keyword("context")?;
        let (id, id_span) = self.expect_ident("a context id")?;
        self.expect_punct(&TokenKind::LBrace, "`{`")?;
        let ctx_id = ContextId::new(id);
        let mut emissions: Vec<(Emission, SourceSpan)> = Vec::new();
        loop {
            match self.peek() {
                Some(t) if t.kind == TokenKind::RBrace => {
                    self.pos += 1;
                    break;
                }
                Some(t) if t.ident() == Some("emit") => {
                    let span = self.expect_keyword("emit")?;
                    let (entity, _) = self.expect_ident("an entity id")?;
                    self.expect_keyword("flow")?;
                    let (flow, _) = self.expect_ident("a flow type")?;
                    self.expect_keyword("on")?;
                    let (via, _) = self.expect_ident("an interaction id")?;
                    emissions.push((
                        Emission {
                            entity: EntityId::new(entity),
                            flow: FlowTypeId::new(flow),
                            via: InteractionId::new(via),
                        },
                        span,
                    ));
                }
                Some(t) => {
                    let (d, span) = (describe(t), t.span.clone());
                    self.error(format!("expected `emit` or `}}`, found {d}"), span);
                    return Err(());
                }
                None => {
                    let span = self.eof_span();
                    self.error("unclosed context block".to_string(), span);
                    return Err(());
                }
            }
        }

        if self.model.contexts.contains_key(&ctx_id) {
            self.duplicate("context", ctx_id.as_str(), id_span);
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Context(ctx_id.clone()), id_span);
        let mut decl = ContextDecl { id: ctx_id.clone(), emissions: BTreeSet::new() };
        for (emission, span) in emissions {
            self.model
                .meta
                .spans
                .insert(SpanKey::Emission(ctx_id.clone(), emission.clone()), span);
            decl.emissions.insert(emission);
        }
        self.model.contexts.insert(ctx_id, decl);
        Ok(())
    }

    fn parse_outcome(&mut self) -> Result<(), ()> {
        self.expect_keyword("outcome")?;
        let (id, id_span) = self.expect_ident("an outcome id")?;
        let description = match self.peek() {
            Some(Token { kind: TokenKind::Str(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                s
            }
            _ => String::new(),
        };

        let mut goals: BTreeSet<GoalId> = BTreeSet::new();
        let mut desired = false;
        let mut groundings: BTreeSet<BTreeSet<InteractionId>> = BTreeSet::new();
        loop {
            match self.peek_ident() {
                Some("desired") => {
                    self.pos += 1;
                    self.expect_keyword("for")?;
                    desired = true;
                    goals.extend(
                        self.parse_idset()?.into_iter().map(|(s, _)| GoalId::new(s)),
                    );
                }
                Some("grounding") => {
                    self.pos += 1;
                    groundings.insert(
                        self.parse_idset()?
                            .into_iter()
                            .map(|(s, _)| InteractionId::new(s))
                            .collect(),
                    );
                }
                _ => break,
            }
        }

        let id = OutcomeId::new(id);
        if self.model.outcomes.contains_key(&id) {
            self.duplicate("outcome", id.as_str(), id_span);
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Outcome(id.clone()), id_span);
        self.model
            .outcomes
            .insert(id.clone(), OutcomeDecl { id: id.clone(), description, groundings });
        if desired {
            self.model.desired.insert(id, goals);
        }
        Ok(())
    }

    fn parse_stakeholder(&mut self) -> Result<(), ()> {
        self.expect_keyword("stakeholder")?;
        let (id, id_span) = self.expect_ident("a stakeholder id")?;
        let mut goals: BTreeMap<GoalId, String> = BTreeMap::new();
        while self.eat_keyword("goal") {
            let (goal, _) = self.expect_ident("a goal id")?;
            let text = match self.peek() {
                Some(Token { kind: TokenKind::Str(s), .. }) => {
                    let s = s.clone();
                    self.pos += 1;
                    s
                }
                Some(t) => {
                    let (d, span) = (describe(t), t.span.clone());
                    self.error(format!("expected a goal description string, found {d}"), span);
                    return Err(());
                }
                None => {
                    let span = self.eof_span();
                    self.error("expected a goal description string".to_string(), span);
                    return Err(());
                }
            };
            goals.insert(GoalId::new(goal), text);
        }

        let id = StakeholderId::new(id);
        if self.model.stakeholders.contains_key(&id) {
            self.duplicate("stakeholder", id.as_str(), id_span);
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Stakeholder(id.clone()), id_span);
        self.model.stakeholders.insert(id.clone(), Stakeholder { id, goals });
        Ok(())
    }

    fn parse_requirement(&mut self) -> Result<(), ()> {
        self.expect_keyword("requirement")?;
        let (id, id_span) = self.expect_ident("a requirement id")?;
        self.expect_keyword("subject")?;
        let (subject, _) = self.expect_ident("an entity id")?;
        self.expect_keyword("in")?;
        let (input, _) = self.expect_ident("a flow type")?;
        self.expect_keyword("out")?;
        let (output, _) = self.expect_ident("a flow type")?;
        let condition = if self.eat_keyword("when") {
            Some(ContextId::new(self.expect_ident("a context id")?.0))
        } else {
            None
        };

        let id = RequirementId::new(id);
        if self.model.requirements.contains_key(&id) {
            self.duplicate("requirement", id.as_str(), id_span);
            return Ok(());
        }
        self.model.meta.spans.insert(SpanKey::Requirement(id.clone()), id_span);
        self.model.requirements.insert(
            id.clone(),
            RequirementDecl {
                id,
                subject: EntityId::new(subject),
                input: FlowTypeId::new(input),
                output: FlowTypeId::new(output),
                condition,
            },
        );
        Ok(())
    }
}

fn describe(token: &Token) -> String {
    match &token.kind {
        TokenKind::Ident(s) => format!("`{s}`"),
        TokenKind::Str(_) => "a string".to_string(),
        TokenKind::LBrace => "`{`".to_string(),
        TokenKind::RBrace => "`}`".to_string(),
        TokenKind::Comma => "`,`".to_string(),
        TokenKind::Colon => "`:`".to_string(),
        TokenKind::Arrow => "`->`".to_string(),
    }
}
