//! The `.psw` model language: lexer, parser, and canonical serializer.

mod lexer;
mod parser;
mod serializer;

pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse_fragment, parse_model};
pub use serializer::{ghost_boundary_members, serialize_model};
