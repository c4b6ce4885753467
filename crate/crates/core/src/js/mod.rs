//! Just enough JavaScript lexing to screen mutants and extracted snippets.

pub mod check;
pub mod lexer;

pub use check::{check_syntax, SyntaxIssue};
pub use lexer::{tokenize, LexError, Token, TokenKind};
