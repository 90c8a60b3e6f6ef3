//! The des-file language: tokens, syntax tree, parser and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

use thiserror::Error;

pub use ast::*;
pub use lexer::{tokenize, Tok, Token};
pub use parser::parse_document;
pub use printer::print_document;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{span}: illegal character {ch:?}")]
    IllegalCharacter { span: SourceSpan, ch: char },
    #[error("{span}: expected {expected}, found {found}")]
    Parse {
        span: SourceSpan,
        expected: String,
        found: String,
    },
    #[error("{span}: MAP without ENDMAP")]
    UnterminatedMap { span: SourceSpan },
    #[error("{span}: unknown command `{name}`")]
    UnknownCommand { span: SourceSpan, name: String },
}

impl DslError {
    pub fn span(&self) -> SourceSpan {
        match self {
            DslError::IllegalCharacter { span, .. }
            | DslError::Parse { span, .. }
            | DslError::UnterminatedMap { span }
            | DslError::UnknownCommand { span, .. } => *span,
        }
    }
}
