//! Lexing, parsing and checking of mini-OO source.

pub mod ast;
mod check;
mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

pub use ast::*;
pub use check::{resolve_overload, Resolved, Scope};
pub use pretty::{pretty, stmt_head};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{pos}: lexical error: {msg}")]
    Lex { pos: Pos, msg: String },
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate {what}")]
    Duplicate { pos: Pos, what: String },
    #[error("{pos}: {msg}")]
    Label { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Semantic { pos: Pos, msg: String },
    #[error("{pos}: {source}")]
    NoMatch { pos: Pos, source: ResolveError },
}

impl FrontendError {
    pub fn pos(&self) -> Pos {
        match self {
            FrontendError::Lex { pos, .. }
            | FrontendError::Syntax { pos, .. }
            | FrontendError::Duplicate { pos, .. }
            | FrontendError::Label { pos, .. }
            | FrontendError::Semantic { pos, .. }
            | FrontendError::NoMatch { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("no method matching `{call}` in class `{class}`")]
    NoMatch { class: String, call: Signature },
}

/// Parses and checks a compilation unit.
pub fn parse(src: &str) -> Result<Program, FrontendError> {
    let mut program = parser::parse_unchecked(src)?;
    check::check(&mut program)?;
    Ok(program)
}

#[cfg(test)]
mod tests;
