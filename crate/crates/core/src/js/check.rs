//! Engine-free syntax screening.
//!
//! On top of the tokenizer this checks bracket balance and a handful of
//! token-adjacency rules that catch the usual damage done by random
//! mutation (`var a = ;`, `a b`, `x + )`, `obj..p`). It accepts a superset
//! of the language; a real engine in parse-only mode is the precise check.

use super::lexer::{tokenize, Token, TokenKind, CONTEXTUAL_KEYWORDS, VALUE_KEYWORDS};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SyntaxIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for SyntaxIssue {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Start,
    /// Identifier, literal, value keyword, property name.
    Operand,
    /// Contextual keyword: may be an identifier, never forces adjacency errors.
    Contextual,
    Keyword,
    Open,
    Close,
    /// Postfix `++`/`--`.
    Postfix,
    /// An operator after which an operand is required.
    NeedsOperand,
    /// `;`, `,`, `:`, prefix `++`/`--`, `@`.
    Separator,
}

/// Operators that cannot begin an expression.
const BINARY_ONLY: &[&str] = &[
    "*", "/", "%", "**", "==", "===", "!=", "!==", "<", ">", "<=", ">=", "&&", "||", "??", "&", "|", "^", "<<", ">>",
    ">>>", "=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "??=", "?",
    "=>", ".",
];

const ASSIGNMENT: &[&str] =
    &["=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "??="];

fn is_binary_only(p: &str) -> bool {
    BINARY_ONLY.contains(&p)
}

fn closes(open: &str, close: &str) -> bool {
    matches!((open, close), ("(", ")") | ("[", "]") | ("{", "}"))
}

fn issue(tok: &Token<'_>, message: String) -> SyntaxIssue {
    SyntaxIssue { line: tok.line, message }
}

/// Returns `Ok(())` when the source passes the lexical and structural screen.
pub fn check_syntax(src: &str) -> Result<(), SyntaxIssue> {
    let tokens = tokenize(src).map_err(|e| SyntaxIssue { line: e.line, message: e.message })?;
    let mut stack: Vec<&str> = Vec::new();
    let mut prev = Class::Start;
    let mut prev_text = "";
    let mut prev_kind = None;
    let mut after_dot = false;

    for tok in &tokens {
        let text = tok.text;
        let same_line = !tok.newline_before;

        if after_dot {
            let ok = matches!(tok.kind, TokenKind::Ident | TokenKind::Keyword)
                || (prev_text == "?." && matches!(text, "(" | "["))
                || (prev_text == "?." && tok.kind == TokenKind::Template);
            if !ok {
                return Err(issue(tok, format!("unexpected token {text:?} after {prev_text:?}")));
            }
        }

        let class = match tok.kind {
            TokenKind::Ident | TokenKind::Number | TokenKind::String | TokenKind::Regex => Class::Operand,
            TokenKind::Keyword if after_dot => Class::Operand,
            TokenKind::Keyword if VALUE_KEYWORDS.contains(&text) => Class::Operand,
            TokenKind::Keyword if CONTEXTUAL_KEYWORDS.contains(&text) => Class::Contextual,
            TokenKind::Keyword => Class::Keyword,
            TokenKind::Template => {
                // Tagged templates are fine after anything.
                prev = Class::Operand;
                prev_text = text;
                prev_kind = Some(tok.kind);
                after_dot = false;
                continue;
            }
            TokenKind::TemplateHead => Class::Open,
            TokenKind::TemplateMiddle => Class::Open,
            TokenKind::TemplateTail => Class::Close,
            TokenKind::Punct => match text {
                "(" | "[" | "{" => Class::Open,
                ")" | "]" | "}" => Class::Close,
                "++" | "--" => {
                    if matches!(prev, Class::Operand | Class::Close | Class::Contextual) && same_line {
                        Class::Postfix
                    } else {
                        Class::Separator
                    }
                }
                ";" | "," | ":" | "@" => Class::Separator,
                _ => Class::NeedsOperand,
            },
        };

        // Two operands in a row on one line.
        if class == Class::Operand && same_line && matches!(prev, Class::Operand | Class::Postfix) {
            return Err(issue(tok, format!("unexpected token {text:?}")));
        }

        // Binary operator with nothing on its left.
        if tok.kind == TokenKind::Punct && is_binary_only(text) {
            let generator_star = text == "*"
                && prev != Class::Start
                && matches!(prev_text, "{" | "}" | "," | ";" | "function" | "yield" | "async" | "static");
            let meta_property = text == "." && matches!(prev_text, "new" | "import");
            let left_ok = matches!(prev, Class::Operand | Class::Close | Class::Contextual | Class::Postfix);
            if !left_ok && !generator_star && !meta_property {
                return Err(issue(tok, format!("unexpected operator {text:?}")));
            }
        }

        // Elisions only exist in array literals.
        if text == ","
            && tok.kind == TokenKind::Punct
            && matches!(prev_text, "," | "(" | "{")
            && prev_kind == Some(TokenKind::Punct)
            && stack.last() != Some(&"[")
        {
            return Err(issue(tok, format!("unexpected token \",\" after {prev_text:?}")));
        }

        // A literal is never an assignment target.
        if tok.kind == TokenKind::Punct
            && ASSIGNMENT.contains(&text)
            && matches!(prev_kind, Some(TokenKind::Number | TokenKind::String | TokenKind::Regex))
        {
            return Err(issue(tok, format!("invalid assignment target before {text:?}")));
        }

        // Operator with nothing on its right.
        if prev == Class::NeedsOperand
            && (matches!(class, Class::Close | Class::Postfix)
                || matches!(text, ";" | "," | ":")
                || (tok.kind == TokenKind::Punct && is_binary_only(text) && !(prev_text == "=>" && text == "{")))
            && !(text == "*" && prev_text == "yield")
        {
            return Err(issue(tok, format!("unexpected token {text:?} after {prev_text:?}")));
        }

        match tok.kind {
            TokenKind::TemplateHead => stack.push("${"),
            TokenKind::TemplateMiddle | TokenKind::TemplateTail => {
                if stack.pop() != Some("${") {
                    return Err(issue(tok, "unbalanced template substitution".to_string()));
                }
                if tok.kind == TokenKind::TemplateMiddle {
                    stack.push("${");
                }
            }
            TokenKind::Punct if matches!(text, "(" | "[" | "{") => stack.push(text),
            TokenKind::Punct if matches!(text, ")" | "]" | "}") => match stack.pop() {
                Some(open) if closes(open, text) => {}
                Some(open) => {
                    return Err(issue(tok, format!("{text:?} does not close {open:?}")));
                }
                None => return Err(issue(tok, format!("unmatched {text:?}"))),
            },
            _ => {}
        }

        after_dot = tok.kind == TokenKind::Punct && matches!(text, "." | "?.");
        prev = class;
        prev_text = text;
        prev_kind = Some(tok.kind);
    }

    if let Some(open) = stack.last() {
        let line = tokens.last().map_or(1, |t| t.line);
        return Err(SyntaxIssue { line, message: format!("unclosed {open:?}") });
    }
    if prev == Class::NeedsOperand || after_dot {
        let line = tokens.last().map_or(1, |t| t.line);
        return Err(SyntaxIssue { line, message: format!("unexpected end of input after {prev_text:?}") });
    }
    Ok(())
}
