//! The bundled mutation operators. Each takes the seed text and returns a
//! candidate that may or may not parse; `None` means the operator had nothing
//! to work on.

use crate::js::{tokenize, Token, TokenKind};
use rand::seq::IndexedRandom;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    NumericBoundary,
    StringNoise,
    TokenDuplication,
    TokenDeletion,
    OperatorSwap,
    IdentifierToBuiltin,
    LineSplice,
    /// Produced by an external fuzzer.
    External,
}

impl Operator {
    /// The bundled operators, drawn uniformly.
    pub const BUNDLED: [Operator; 7] = [
        Operator::NumericBoundary,
        Operator::StringNoise,
        Operator::TokenDuplication,
        Operator::TokenDeletion,
        Operator::OperatorSwap,
        Operator::IdentifierToBuiltin,
        Operator::LineSplice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operator::NumericBoundary => "numeric-boundary",
            Operator::StringNoise => "string-noise",
            Operator::TokenDuplication => "token-duplication",
            Operator::TokenDeletion => "token-deletion",
            Operator::OperatorSwap => "operator-swap",
            Operator::IdentifierToBuiltin => "identifier-to-builtin",
            Operator::LineSplice => "line-splice",
            Operator::External => "external",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const BOUNDARY_NUMBERS: [&str; 4] = ["0", "-1", "2147483647", "9007199254740992"];

const STRING_NOISE: [&str; 8] = [r"\x00", r"\u0000", r"\uFFFF", r"\uD800", r"\x7f", r"\n", r"\\", r"\u{10FFFF}"];

const OPERATOR_SWAPS: [(&str, &str); 12] = [
    ("===", "=="),
    ("==", "==="),
    ("!==", "!="),
    ("!=", "!=="),
    ("+", "-"),
    ("-", "+"),
    ("<", "<="),
    ("<=", "<"),
    (">", ">="),
    (">=", ">"),
    ("&&", "||"),
    ("||", "&&"),
];

const BUILTINS: [&str; 12] = [
    "undefined",
    "NaN",
    "Infinity",
    "Math",
    "Object",
    "Array",
    "Symbol",
    "globalThis",
    "JSON",
    "Reflect",
    "Proxy",
    "Number",
];

fn replace(source: &str, start: usize, end: usize, with: &str) -> String {
    let mut out = String::with_capacity(source.len() + with.len());
    out.push_str(&source[..start]);
    out.push_str(with);
    out.push_str(&source[end..]);
    out
}

fn pick<'t, 'a>(
    tokens: &'t [Token<'a>],
    rng: &mut ChaCha8Rng,
    keep: impl Fn(&Token<'_>) -> bool,
) -> Option<&'t Token<'a>> {
    let candidates: Vec<&Token<'a>> = tokens.iter().filter(|t| keep(t)).collect();
    candidates.choose(rng).copied()
}

fn random_19_digit_negative(rng: &mut ChaCha8Rng) -> String {
    let lead: u8 = rng.random_range(1..=9);
    let mut s = format!("-{lead}");
    for _ in 0..18 {
        s.push(char::from(b'0' + rng.random_range(0..10u8)));
    }
    s
}

fn numeric_boundary(source: &str, tokens: &[Token<'_>], rng: &mut ChaCha8Rng) -> Option<String> {
    let t = pick(tokens, rng, |t| t.kind == TokenKind::Number)?;
    let idx = rng.random_range(0..BOUNDARY_NUMBERS.len() + 1);
    let value = match BOUNDARY_NUMBERS.get(idx) {
        Some(v) => v.to_string(),
        None => random_19_digit_negative(rng),
    };
    // `a-1` must not become `a--…`.
    let glued = value.starts_with('-') && source[..t.start].ends_with(['-', '+']);
    let value = if glued { format!(" {value}") } else { value };
    Some(replace(source, t.start, t.end, &value))
}

/// Positions inside a string literal body where an escape may be inserted
/// without splitting an existing escape sequence.
fn escape_safe_offsets(body: &str) -> Vec<usize> {
    let bytes = body.as_bytes();
    let mut offsets = vec![0];
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' {
            i += body[i..].chars().next().map_or(1, char::len_utf8);
        } else {
            let hex_run = |from: usize, max: usize| {
                bytes[from.min(bytes.len())..].iter().take(max).take_while(|b| b.is_ascii_hexdigit()).count()
            };
            i += match bytes.get(i + 1) {
                Some(b'x') => 2 + hex_run(i + 2, 2),
                Some(b'u') if bytes.get(i + 2) == Some(&b'{') => {
                    3 + bytes[i + 3..].iter().position(|&b| b == b'}').map_or(0, |p| p + 1)
                }
                Some(b'u') => 2 + hex_run(i + 2, 4),
                Some(_) => 1 + body[i + 1..].chars().next().map_or(0, char::len_utf8),
                None => 1,
            };
        }
        offsets.push(i.min(bytes.len()));
    }
    offsets
}

fn string_noise(source: &str, tokens: &[Token<'_>], rng: &mut ChaCha8Rng) -> Option<String> {
    let t = pick(tokens, rng, |t| matches!(t.kind, TokenKind::String | TokenKind::Template))?;
    let body = &t.text[1..t.text.len() - 1];
    let offsets = escape_safe_offsets(body);
    let at = *offsets.choose(rng)?;
    let noise = STRING_NOISE.choose(rng)?;
    let pos = t.start + 1 + at;
    Some(replace(source, pos, pos, noise))
}

fn token_duplication(source: &str, tokens: &[Token<'_>], rng: &mut ChaCha8Rng) -> Option<String> {
    let t = tokens.choose(rng)?;
    Some(replace(source, t.end, t.end, &format!(" {}", t.text)))
}

fn token_deletion(source: &str, tokens: &[Token<'_>], rng: &mut ChaCha8Rng) -> Option<String> {
    let t = tokens.choose(rng)?;
    Some(replace(source, t.start, t.end, ""))
}

fn operator_swap(source: &str, tokens: &[Token<'_>], rng: &mut ChaCha8Rng) -> Option<String> {
    let t =
        pick(tokens, rng, |t| t.kind == TokenKind::Punct && OPERATOR_SWAPS.iter().any(|(from, _)| *from == t.text))?;
    let (_, to) = OPERATOR_SWAPS.iter().find(|(from, _)| *from == t.text)?;
    Some(replace(source, t.start, t.end, to))
}

fn identifier_to_builtin(source: &str, tokens: &[Token<'_>], rng: &mut ChaCha8Rng) -> Option<String> {
    let t = pick(tokens, rng, |t| t.kind == TokenKind::Ident)?;
    let b = BUILTINS.choose(rng)?;
    Some(replace(source, t.start, t.end, b))
}

fn line_splice(source: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let lines: Vec<&str> = source.split_inclusive('\n').collect();
    let donors: Vec<usize> = (0..lines.len()).filter(|&i| !lines[i].trim().is_empty()).collect();
    if lines.len() < 2 || donors.is_empty() {
        return None;
    }
    let from = *donors.choose(rng)?;
    let at = rng.random_range(0..=lines.len());
    let mut donor = lines[from].to_string();
    if !donor.ends_with('\n') {
        donor.push('\n');
    }
    let mut out = String::with_capacity(source.len() + donor.len());
    for (i, l) in lines.iter().enumerate() {
        if i == at {
            out.push_str(&donor);
        }
        out.push_str(l);
    }
    if at == lines.len() {
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(donor.trim_end_matches('\n'));
    }
    Some(out)
}

/// Applies `op` once. Returns `None` when the operator does not apply.
pub fn apply(op: Operator, source: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    if op == Operator::LineSplice {
        return line_splice(source, rng);
    }
    let tokens = tokenize(source).ok()?;
    match op {
        Operator::NumericBoundary => numeric_boundary(source, &tokens, rng),
        Operator::StringNoise => string_noise(source, &tokens, rng),
        Operator::TokenDuplication => token_duplication(source, &tokens, rng),
        Operator::TokenDeletion => token_deletion(source, &tokens, rng),
        Operator::OperatorSwap => operator_swap(source, &tokens, rng),
        Operator::IdentifierToBuiltin => identifier_to_builtin(source, &tokens, rng),
        Operator::LineSplice | Operator::External => None,
    }
}

/// One uniformly chosen bundled operator applied once. An inapplicable
/// operator yields the source unchanged.
pub fn mutate_once(source: &str, rng: &mut ChaCha8Rng) -> (Operator, String) {
    let op = Operator::BUNDLED[rng.random_range(0..Operator::BUNDLED.len())];
    let out = apply(op, source, rng).unwrap_or_else(|| source.to_string());
    (op, out)
}
