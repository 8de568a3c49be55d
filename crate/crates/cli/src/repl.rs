//! The interactive session: declare model elements incrementally, activate
//! contexts, evaluate outcomes, audit, rescope, and undo.
//!
//! Every mutating command re-validates the model and prints only the
//! diagnostics that are new since the last command, so the session reads as
//! a dialogue: declare something, hear what it breaks or repairs, keep
//! going. Undo rebuilds the model by replaying the surviving history from
//! the initial model, which keeps one invariant trivially true: the current
//! model always equals the initial model plus the recorded mutations.

use crate::render::*;
use crate::search_options;
use psworld_core::*;
use std::collections::BTreeSet;
use std::io::{BufRead, Write as _};
use std::path::Path;

pub fn run(path: Option<&Path>, script: Option<&Path>, dump_final: Option<&Path>) -> u8 {
    let initial = match path {
        Some(p) => {
            let source = match std::fs::read_to_string(p) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", p.display());
                    return 2;
                }
            };
            match parse_model(&source, &p.display().to_string()) {
                Ok((model, warnings)) => {
                    print_diagnostics(&warnings);
                    model
                }
                Err(diags) => {
                    print_diagnostics(&diags);
                    return 2;
                }
            }
        }
        None => WorldModel::default(),
    };

    let mut session = Session::new(initial);
    let code = match script {
        Some(p) => {
            let text = match std::fs::read_to_string(p) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", p.display());
                    return 2;
                }
            };
            session.run_script(&text);
            0
        }
        None => {
            session.run_interactive();
            0
        }
    };
    if let Some(out) = dump_final {
        if let Err(e) = std::fs::write(out, serialize_model(&session.model)) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return 2;
        }
    }
    code
}

/// Stable identity of a diagnostic across re-validation runs.
fn fingerprint(d: &Diagnostic) -> String {
    format!("{}|{}|{}|{}", d.severity, d.rule, d.span, d.message)
}

struct Session {
    initial: WorldModel,
    model: WorldModel,
    /// Successful mutating commands, in order. Replaying them against
    /// `initial` reproduces `model`.
    history: Vec<String>,
    last_activation: Option<ActiveSet>,
    /// Diagnostics already shown (or present at session start).
    known: BTreeSet<String>,
}

enum Outcome {
    Continue,
    Quit,
}

impl Session {
    fn new(initial: WorldModel) -> Self {
        let known = validate_model(&initial).diagnostics.iter().map(fingerprint).collect();
        let model = initial.clone();
        Session { initial, model, history: Vec::new(), last_activation: None, known }
    }

    fn run_script(&mut self, text: &str) {
        let mut lines = text.lines().map(str::to_owned);
        while let Some(line) = next_command(&mut lines, true) {
            if let Outcome::Quit = self.dispatch(&line) {
                break;
            }
        }
    }

    fn run_interactive(&mut self) {
        let stdin = std::io::stdin();
        let mut reader = stdin.lock().lines();
        loop {
            prompt("psw> ");
            let mut block = match reader.next() {
                Some(Ok(line)) => line,
                _ => break,
            };
            if block.trim().is_empty() || is_comment(&block) {
                continue;
            }
            let mut depth = brace_delta(&block);
            while depth > 0 {
                prompt("...> ");
                match reader.next() {
                    Some(Ok(line)) => {
                        depth += brace_delta(&line);
                        block.push('\n');
                        block.push_str(&line);
                    }
                    _ => break,
                }
            }
            if let Outcome::Quit = self.dispatch(&block) {
                break;
            }
        }
    }

    fn dispatch(&mut self, block: &str) -> Outcome {
        let mut words = block.split_whitespace();
        let command = match words.next() {
            Some(w) => w,
            None => return Outcome::Continue,
        };
        let args: Vec<&str> = words.collect();
        match command {
            "quit" | "exit" => return Outcome::Quit,
            "help" => print_help(),
            "entity" | "interaction" | "context" | "outcome" | "stakeholder" | "requirement" => {
                self.declare(block)
            }
            "interact" => {
                let rest = block.strip_prefix("interact").unwrap_or(block);
                self.declare(&format!("interaction{rest}"))
            }
            "boundary" => self.cmd_boundary(block, false),
            "rescope" => self.cmd_rescope(block, false),
            "undo" => self.cmd_undo(),
            "activate" => self.cmd_activate(&args),
            "eval" => self.cmd_eval(&args),
            "why" => self.cmd_why(&args),
            "minimal" => self.cmd_minimal(&args),
            "audit" => self.cmd_audit(),
            "goals" => self.cmd_goals(),
            "save" => self.cmd_save(block),
            other => {
                eprintln!("unknown command `{other}`; try `help`");
            }
        }
        Outcome::Continue
    }

    /// Apply a declaration block: parse it as a model fragment and merge it
    /// in, replacing any previous declaration with the same id.
    fn declare(&mut self, text: &str) {
        match parse_fragment(text, "<repl>") {
            Ok((fragment, warnings)) => {
                print_diagnostics(&warnings);
                self.merge(fragment);
                self.history.push(text.to_string());
                self.report_new_diagnostics();
            }
            Err(diags) => print_diagnostics(&diags),
        }
    }

    fn merge(&mut self, fragment: WorldModel) {
        for (id, e) in fragment.entities {
            self.model.entities.insert(id, e);
        }
        for (id, ir) in fragment.interactions {
            self.model.interactions.insert(id, ir);
        }
        for (id, c) in fragment.contexts {
            self.model.contexts.insert(id, c);
        }
        for (id, o) in fragment.outcomes {
            // A re-declaration replaces the whole outcome, desired status
            // included.
            self.model.desired.remove(&id);
            if let Some(goals) = fragment.desired.get(&id) {
                self.model.desired.insert(id.clone(), goals.clone());
            }
            self.model.outcomes.insert(id, o);
        }
        for (id, s) in fragment.stakeholders {
            self.model.stakeholders.insert(id, s);
        }
        for (id, r) in fragment.requirements {
            self.model.requirements.insert(id, r);
        }
        // Carry the fragment's span table over so diagnostics about merged
        // declarations still point at source lines.
        for (key, span) in fragment.meta.spans {
            self.model.meta.spans.insert(key, span);
        }
        self.recommit_boundary();
    }

    /// Keep the external side of a committed boundary equal to the
    /// complement of the internal side, exactly as parsing would, so a
    /// saved session reloads to the same model.
    fn recommit_boundary(&mut self) {
        if self.model.boundary.internal.is_empty() && self.model.boundary.external.is_empty() {
            return;
        }
        self.model.boundary.external = self
            .model
            .entities
            .keys()
            .filter(|id| !self.model.boundary.internal.contains(*id))
            .cloned()
            .collect();
    }

    fn cmd_boundary(&mut self, block: &str, quiet: bool) {
        let rest = block.strip_prefix("boundary").unwrap_or(block);
        let rest = rest.trim_start().strip_prefix("internal").unwrap_or(rest);
        let internal = match parse_idset(rest) {
            Some(ids) => ids,
            None => {
                eprintln!("usage: boundary [internal] {{ entity, ... }}");
                return;
            }
        };
        self.model.boundary.internal = internal.into_iter().map(EntityId::from).collect();
        // The command commits the boundary, so take the complement even for
        // an empty internal set.
        self.model.boundary.external = self
            .model
            .entities
            .keys()
            .filter(|id| !self.model.boundary.internal.contains(*id))
            .cloned()
            .collect();
        self.history.push(block.to_string());
        self.report_new_diagnostics_quietly(quiet);
    }

    fn cmd_rescope(&mut self, block: &str, quiet: bool) {
        let rest = block.strip_prefix("rescope").unwrap_or(block);
        let target: BTreeSet<EntityId> = match parse_idset(rest) {
            Some(ids) => ids.into_iter().map(EntityId::from).collect(),
            None => {
                eprintln!("usage: rescope {{ entity, ... }}");
                return;
            }
        };
        match rescope(&self.model, &target) {
            Ok((model, plan)) => {
                self.model = model;
                if !quiet {
                    print!("{}", plan_text(&plan));
                }
                self.history.push(block.to_string());
                self.report_new_diagnostics_quietly(quiet);
            }
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_undo(&mut self) {
        let undone = match self.history.pop() {
            Some(cmd) => cmd,
            None => {
                println!("nothing to undo");
                return;
            }
        };
        let history = std::mem::take(&mut self.history);
        self.model = self.initial.clone();
        self.last_activation = None;
        for line in &history {
            self.replay(line);
        }
        self.history = history;
        self.known = validate_model(&self.model).diagnostics.iter().map(fingerprint).collect();
        println!("undone: {}", first_line(&undone));
    }

    /// Re-apply one recorded mutation without printing anything. Recorded
    /// commands already succeeded once, so failures cannot happen here short
    /// of a bug; surfacing them loudly is the right failure mode.
    fn replay(&mut self, block: &str) {
        let command = block.split_whitespace().next().unwrap_or_default();
        match command {
            "interact" => {
                let rest = block.strip_prefix("interact").unwrap_or(block);
                self.replay_declaration(&format!("interaction{rest}"));
            }
            "boundary" => {
                let saved = std::mem::take(&mut self.history);
                self.cmd_boundary(block, true);
                self.history = saved;
            }
            "rescope" => {
                let saved = std::mem::take(&mut self.history);
                self.cmd_rescope(block, true);
                self.history = saved;
            }
            _ => self.replay_declaration(block),
        }
    }

    fn replay_declaration(&mut self, text: &str) {
        match parse_fragment(text, "<repl>") {
            Ok((fragment, _)) => self.merge(fragment),
            Err(_) => eprintln!("internal: recorded command no longer parses: {}", first_line(text)),
        }
    }

    fn report_new_diagnostics(&mut self) {
        self.report_new_diagnostics_quietly(false);
    }

    fn report_new_diagnostics_quietly(&mut self, quiet: bool) {
        let report = validate_model(&self.model);
        if !quiet {
            let fresh: Vec<Diagnostic> = report
                .diagnostics
                .iter()
                .filter(|d| !self.known.contains(&fingerprint(d)))
                .cloned()
                .collect();
            print_diagnostics(&fresh);
        }
        self.known = report.diagnostics.iter().map(fingerprint).collect();
    }

    fn cmd_activate(&mut self, args: &[&str]) {
        let context = match args {
            [ctx] => ContextId::from(*ctx),
            _ => {
                eprintln!("usage: activate <context>");
                return;
            }
        };
        match compute_active_set(&self.model, &context) {
            Ok(active) => {
                print!("{}", active_text(&self.model, &active));
                self.last_activation = Some(active);
            }
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_eval(&mut self, args: &[&str]) {
        let (outcome, context) = match args {
            [o, c] => (OutcomeId::from(*o), ContextId::from(*c)),
            _ => {
                eprintln!("usage: eval <outcome> <context>");
                return;
            }
        };
        match evaluate_outcome(&self.model, &outcome, &context) {
            Ok(eval) => println!("{}", eval_text(&eval)),
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_why(&mut self, args: &[&str]) {
        let (interaction, context) = match args {
            [ir] => match &self.last_activation {
                Some(active) => (InteractionId::from(*ir), active.context.clone()),
                None => {
                    eprintln!("no context activated yet; use `why <interaction> <context>`");
                    return;
                }
            },
            [ir, ctx] => (InteractionId::from(*ir), ContextId::from(*ctx)),
            _ => {
                eprintln!("usage: why <interaction> [<context>]");
                return;
            }
        };
        let reuse = self
            .last_activation
            .as_ref()
            .filter(|a| a.context == context)
            .cloned();
        let active = match reuse {
            Some(a) => a,
            None => match compute_active_set(&self.model, &context) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("error: {}: {e}", e.code());
                    return;
                }
            },
        };
        match explain_activation(&self.model, &active, &interaction) {
            Ok(tree) => print!("{}", derivation_text(&tree, 0)),
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_minimal(&mut self, args: &[&str]) {
        let (outcome, contexts) = match args {
            [] => {
                eprintln!("usage: minimal <outcome> [<context>...]");
                return;
            }
            [o, rest @ ..] => {
                (OutcomeId::from(*o), rest.iter().map(|c| ContextId::from(*c)).collect::<Vec<_>>())
            }
        };
        let opts = match search_options(false) {
            Ok(o) => o,
            Err(_) => return,
        };
        match find_minimal_sets(&self.model, &outcome, &contexts, opts) {
            Ok(report) => print!("{}", minimal_text(&report)),
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_audit(&mut self) {
        match audit_sufficiency(&self.model) {
            Ok(report) => print!("{}", sufficiency_text(&report)),
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_goals(&mut self) {
        match check_goal_satisfaction(&self.model) {
            Ok(report) => print!("{}", goal_text(&report)),
            Err(EngineError::InsufficientModel(cells)) => {
                eprintln!(
                    "error: insufficient-model: {cells} audit cell{} must pass before goal satisfaction is meaningful",
                    if cells == 1 { "" } else { "s" }
                );
            }
            Err(e) => eprintln!("error: {}: {e}", e.code()),
        }
    }

    fn cmd_save(&mut self, block: &str) {
        let path = block.strip_prefix("save").unwrap_or(block).trim();
        if path.is_empty() {
            eprintln!("usage: save <path>");
            return;
        }
        match std::fs::write(path, serialize_model(&self.model)) {
            Ok(()) => println!("saved: {path}"),
            Err(e) => eprintln!("error: cannot write {path}: {e}"),
        }
    }
}

/// Pull the next complete command out of a script: skip blank lines and
/// comment lines between commands, echo consumed lines, and keep consuming
/// until braces balance.
fn next_command(lines: &mut impl Iterator<Item = String>, echo: bool) -> Option<String> {
    let mut block = loop {
        let line = lines.next()?;
        if line.trim().is_empty() {
            continue;
        }
        if echo {
            println!("> {line}");
        }
        if is_comment(&line) {
            continue;
        }
        break line;
    };
    let mut depth = brace_delta(&block);
    while depth > 0 {
        let line = lines.next()?;
        if echo {
            println!("> {line}");
        }
        depth += brace_delta(&line);
        block.push('\n');
        block.push_str(&line);
    }
    Some(block)
}

fn is_comment(line: &str) -> bool {
    line.trim_start().starts_with('#')
}

/// Net brace depth of one line, ignoring braces inside string literals and
/// after a comment mark.
fn brace_delta(line: &str) -> i32 {
    let mut depth = 0;
    let mut in_string = false;
    let mut escaped = false;
    for c in line.chars() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
        } else {
            match c {
                '"' => in_string = true,
                '#' => break,
                '{' => depth += 1,
                '}' => depth -= 1,
                _ => {}
            }
        }
    }
    depth
}

/// Parse `{ a, b }` or a bare `a, b` / `a b` list of identifiers. `None`
/// means malformed; an empty list is legal and comes back empty.
fn parse_idset(text: &str) -> Option<Vec<String>> {
    let text = text.trim();
    let inner = if let Some(stripped) = text.strip_prefix('{') {
        stripped.strip_suffix('}')?
    } else if text.contains('{') || text.contains('}') {
        return None;
    } else {
        text
    };
    let mut out = Vec::new();
    for token in inner.split(|c: char| c == ',' || c.is_whitespace()) {
        if token.is_empty() {
            continue;
        }
        if !psworld_core::ids::is_valid_identifier(token) {
            return None;
        }
        out.push(token.to_string());
    }
    Some(out)
}

fn first_line(text: &str) -> &str {
    text.lines().next().unwrap_or_default()
}

fn prompt(text: &str) {
    print!("{text}");
    let _ = std::io::stdout().flush();
}

fn print_help() {
    println!(
        "declarations (merge into the model, re-declaring replaces):\n\
         \u{20} entity <id> kind internal|external|env {{ ... }}\n\
         \u{20} interact <id> : <src> -> <dst> flow <type> [...]\n\
         \u{20} context <id> {{ emit <entity> flow <type> on <interaction> ... }}\n\
         \u{20} outcome <id> \"<description>\" [desired for {{ goals }}] [grounding {{ interactions }}]\n\
         \u{20} stakeholder <id> goal <id> \"<description>\" ...\n\
         \u{20} requirement <id> subject <entity> in <type> out <type> [when <context>]\n\
         \u{20} boundary {{ entities }}          commit the internal side\n\
         analysis:\n\
         \u{20} activate <context>             compute and show the active set\n\
         \u{20} eval <outcome> <context>       truth of an outcome\n\
         \u{20} why <interaction> [<context>]  derivation of an activation\n\
         \u{20} minimal <outcome> [<ctx>...]   minimal determining sets\n\
         \u{20} audit                          sufficiency checklist\n\
         \u{20} goals                          goal satisfaction (gated on audit)\n\
         session:\n\
         \u{20} rescope {{ entities }}           move the boundary, same world\n\
         \u{20} undo                           revert the last mutation\n\
         \u{20} save <path>                    serialize the current model\n\
         \u{20} quit"
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brace_depth_ignores_strings_and_comments() {
        assert_eq!(brace_delta("entity a kind internal {"), 1);
        assert_eq!(brace_delta("}"), -1);
        assert_eq!(brace_delta("outcome x \"a { b\" grounding { i }"), 0);
        assert_eq!(brace_delta("# { not real"), 0);
        assert_eq!(brace_delta("context c { # trailing {"), 1);
        assert_eq!(brace_delta("outcome x \"esc \\\" {\""), 0);
    }

    #[test]
    fn idset_forms() {
        assert_eq!(parse_idset("{ a, b }"), Some(vec!["a".into(), "b".into()]));
        assert_eq!(parse_idset("a b"), Some(vec!["a".into(), "b".into()]));
        assert_eq!(parse_idset("a, b"), Some(vec!["a".into(), "b".into()]));
        assert_eq!(parse_idset("{ }"), Some(vec![]));
        assert_eq!(parse_idset("{ a"), None);
        assert_eq!(parse_idset("{ 1bad }"), None);
    }
}
