//! Tokenizer for the model language.
//!
//! Identifiers are `[A-Za-z_][A-Za-z0-9_.-]*`; because `-` is an identifier
//! character, the scanner stops an identifier short when the `-` would begin
//! a `->` arrow, so `a->b` lexes as three tokens while `a-b` stays one.
//! `#` starts a comment running to end of line. Strings are double-quoted
//! with `\"`, `\\` and `\n` escapes.

use crate::diag::{rules, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    Comma,
    Colon,
    Arrow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

impl Token {
    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

pub fn lex(source: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut column: u32 = 1;

    let span = |line: u32, column: u32, length: usize| SourceSpan {
        file: file.to_string(),
        line,
        column,
        length: length as u32,
    };

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
            }
            _ if c.is_whitespace() => {
                i += 1;
                column += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | ',' | ':' => {
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    ',' => TokenKind::Comma,
                    _ => TokenKind::Colon,
                };
                tokens.push(Token { kind, span: span(line, column, 1) });
                i += 1;
                column += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                tokens.push(Token { kind: TokenKind::Arrow, span: span(line, column, 2) });
                i += 2;
                column += 2;
            }
            '"' => {
                let (start_line, start_column) = (line, column);
                i += 1;
                column += 1;
                let mut value = String::new();
                let mut closed = false;
                while i < chars.len() {
                    match chars[i] {
                        '"' => {
                            i += 1;
                            column += 1;
                            closed = true;
                            break;
                        }
                        '\n' => break,
                        '\\' => {
                            let escaped = match chars.get(i + 1) {
                                Some('"') => Some('"'),
                                Some('\\') => Some('\\'),
                                Some('n') => Some('\n'),
                                _ => None,
                            };
                            match escaped {
                                Some(e) => {
                                    value.push(e);
                                    i += 2;
                                    column += 2;
                                }
                                None => {
                                    diagnostics.push(Diagnostic::error(
                                        rules::SYNTAX,
                                        "unknown escape sequence in string".to_string(),
                                        span(line, column, 2),
                                    ));
                                    i += 1;
                                    column += 1;
                                }
                            }
                        }
                        other => {
                            value.push(other);
                            i += 1;
                            column += 1;
                        }
                    }
                }
                if !closed {
                    diagnostics.push(Diagnostic::error(
                        rules::SYNTAX,
                        "unterminated string".to_string(),
                        span(start_line, start_column, 1),
                    ));
                }
                let length = (column - start_column) as usize;
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    span: span(start_line, start_column, length),
                });
            }
            _ if is_ident_start(c) => {
                let (start_line, start_column) = (line, column);
                let mut text = String::new();
                while i < chars.len() && is_ident_continue(chars[i]) {
                    if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                        break;
                    }
                    text.push(chars[i]);
                    i += 1;
                    column += 1;
                }
                let length = text.len();
                tokens.push(Token {
                    kind: TokenKind::Ident(text),
                    span: span(start_line, start_column, length),
                });
            }
            other => {
                diagnostics.push(Diagnostic::error(
                    rules::SYNTAX,
                    format!("unexpected character `{other}`"),
                    span(line, column, 1),
                ));
                i += 1;
                column += 1;
            }
        }
    }

    (tokens, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(source: &str) -> Vec<TokenKind> {
        let (tokens, diags) = lex(source, "t.psw");
        assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
        tokens.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn arrow_splits_identifiers() {
        assert_eq!(
            kinds("a->b"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Arrow,
                TokenKind::Ident("b".into()),
            ]
        );
        // Without the `>`, the dash belongs to the identifier.
        assert_eq!(kinds("a-b"), vec![TokenKind::Ident("a-b".into())]);
    }

    #[test]
    fn comments_and_positions() {
        let (tokens, diags) = lex("foo # rest is gone\n  bar", "t.psw");
        assert!(diags.is_empty());
        assert_eq!(tokens.len(), 2);
        assert_eq!((tokens[1].span.line, tokens[1].span.column), (2, 3));
        assert_eq!(tokens[1].span.length, 3);
    }

    #[test]
    fn strings_unescape() {
        assert_eq!(
            kinds(r#""say \"hi\"\nand \\ done""#),
            vec![TokenKind::Str("say \"hi\"\nand \\ done".into())]
        );
    }

    #[test]
    fn unterminated_string_is_reported() {
        let (_, diags) = lex("\"open\n", "t.psw");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, rules::SYNTAX);
    }

    #[test]
    fn stray_characters_are_reported_and_skipped() {
        let (tokens, diags) = lex("ok % ok", "t.psw");
        assert_eq!(diags.len(), 1);
        assert_eq!(tokens.len(), 2);
    }

    #[test]
    fn dotted_identifiers_hold_together() {
        assert_eq!(kinds("sys.a_1"), vec![TokenKind::Ident("sys.a_1".into())]);
    }
}
