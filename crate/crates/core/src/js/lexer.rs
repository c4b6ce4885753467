//! A small ECMAScript tokenizer.
//!
//! It knows enough of the lexical grammar to split real-world test files
//! into tokens (strings, templates with substitutions, regular expression
//! literals, numeric literals, comments) and to notice lexical errors such as
//! unterminated strings. It does not build a syntax tree.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Keyword,
    Number,
    String,
    /// A template literal without substitutions.
    Template,
    /// `` `...${ ``
    TemplateHead,
    /// `` }...${ ``
    TemplateMiddle,
    /// `` }...` ``
    TemplateTail,
    Regex,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
    /// 1-based line of the first character.
    pub line: usize,
    /// A line terminator occurs between the previous token and this one.
    pub newline_before: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for LexError {}

pub const KEYWORDS: &[&str] = &[
    "break",
    "case",
    "catch",
    "class",
    "const",
    "continue",
    "debugger",
    "default",
    "delete",
    "do",
    "else",
    "enum",
    "export",
    "extends",
    "finally",
    "for",
    "function",
    "if",
    "import",
    "in",
    "instanceof",
    "new",
    "return",
    "switch",
    "throw",
    "try",
    "typeof",
    "var",
    "void",
    "while",
    "with",
    "this",
    "super",
    "null",
    "true",
    "false",
    "let",
    "static",
    "yield",
    "await",
    "async",
    "of",
    "get",
    "set",
    "from",
    "as",
];

/// Keywords that denote a value and behave like an operand.
pub const VALUE_KEYWORDS: &[&str] = &["this", "super", "null", "true", "false"];

/// Words that are only reserved in some positions and routinely used as
/// plain identifiers.
pub const CONTEXTUAL_KEYWORDS: &[&str] =
    &["let", "static", "yield", "await", "async", "of", "get", "set", "from", "as"];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest first.
const PUNCTUATORS: &[&str] = &[
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=", "=>", "==", "!=", "<=", ">=", "&&",
    "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**", "<<", ">>", "{", "}", "(", ")",
    "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "!", "~", "?", ":", "=", ".", "@",
];

fn is_line_terminator(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}')
}

fn is_whitespace(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\u{000B}' | '\u{000C}' | '\u{00A0}' | '\u{FEFF}')
        || (!c.is_ascii() && c.is_whitespace() && !is_line_terminator(c))
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '$' || c == '_' || (!c.is_ascii() && c.is_alphabetic())
}

fn is_ident_part(c: char) -> bool {
    is_ident_start(c)
        || c.is_ascii_digit()
        || c == '\u{200C}'
        || c == '\u{200D}'
        || (!c.is_ascii() && c.is_alphanumeric())
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    newline_before: bool,
    tokens: Vec<Token<'a>>,
    /// One entry per open `{`; `true` marks a template substitution.
    braces: Vec<bool>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' || c == '\u{2028}' || c == '\u{2029}' || (c == '\r' && self.peek() != Some('\n')) {
            self.line += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> LexError {
        LexError { offset: self.pos, line: self.line, message: message.into() }
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize) {
        self.tokens.push(Token {
            kind,
            text: &self.src[start..self.pos],
            start,
            end: self.pos,
            line,
            newline_before: self.newline_before,
        });
        self.newline_before = false;
    }

    fn regex_allowed(&self) -> bool {
        let Some(prev) = self.tokens.last() else {
            return true;
        };
        match prev.kind {
            TokenKind::Ident
            | TokenKind::Number
            | TokenKind::String
            | TokenKind::Template
            | TokenKind::TemplateTail
            | TokenKind::Regex => false,
            TokenKind::Keyword => !(VALUE_KEYWORDS.contains(&prev.text) || CONTEXTUAL_KEYWORDS.contains(&prev.text)),
            TokenKind::TemplateHead | TokenKind::TemplateMiddle => true,
            TokenKind::Punct => !matches!(prev.text, ")" | "]" | "++" | "--"),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            let Some(c) = self.peek() else { return Ok(()) };
            if is_line_terminator(c) {
                self.bump();
                self.newline_before = true;
            } else if is_whitespace(c) {
                self.bump();
            } else if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if is_line_terminator(c) {
                        break;
                    }
                    self.bump();
                }
            } else if c == '/' && self.peek_at(1) == Some('*') {
                self.bump();
                self.bump();
                loop {
                    match self.bump() {
                        None => return Err(self.error("unterminated block comment")),
                        Some('*') if self.peek() == Some('/') => {
                            self.bump();
                            break;
                        }
                        Some(c) if is_line_terminator(c) => self.newline_before = true,
                        Some(_) => {}
                    }
                }
            } else if c == '#' && self.pos == 0 && self.peek_at(1) == Some('!') {
                while let Some(c) = self.peek() {
                    if is_line_terminator(c) {
                        break;
                    }
                    self.bump();
                }
            } else {
                return Ok(());
            }
        }
    }

    fn run(mut self) -> Result<Vec<Token<'a>>, LexError> {
        loop {
            self.skip_trivia()?;
            let Some(c) = self.peek() else { break };
            let start = self.pos;
            let line = self.line;
            if is_ident_start(c) || c == '\\' {
                self.ident()?;
                let text = &self.src[start..self.pos];
                let kind = if is_keyword(text) { TokenKind::Keyword } else { TokenKind::Ident };
                self.push(kind, start, line);
            } else if c == '#' && self.peek_at(1).is_some_and(is_ident_start) {
                self.bump();
                self.ident()?;
                self.push(TokenKind::Ident, start, line);
            } else if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
                self.number()?;
                self.push(TokenKind::Number, start, line);
            } else if c == '"' || c == '\'' {
                self.string(c)?;
                self.push(TokenKind::String, start, line);
            } else if c == '`' {
                self.bump();
                let kind = self.template_chars(true)?;
                self.push(kind, start, line);
            } else if c == '}' && self.braces.last() == Some(&true) {
                self.braces.pop();
                self.bump();
                let kind = self.template_chars(false)?;
                self.push(kind, start, line);
            } else if c == '/' && self.regex_allowed() {
                self.regex()?;
                self.push(TokenKind::Regex, start, line);
            } else {
                let rest = &self.src[self.pos..];
                let Some(p) = PUNCTUATORS.iter().find(|p| rest.starts_with(*p)) else {
                    return Err(self.error(format!("unexpected character {c:?}")));
                };
                let mut p: &str = p;
                // `a?.5:b` is a conditional, not optional chaining.
                if p == "?." && self.peek_at(2).is_some_and(|d| d.is_ascii_digit()) {
                    p = "?";
                }
                for _ in p.chars() {
                    self.bump();
                }
                match p {
                    "{" => self.braces.push(false),
                    "}" => {
                        self.braces.pop();
                    }
                    _ => {}
                }
                self.push(TokenKind::Punct, start, line);
            }
        }
        Ok(self.tokens)
    }

    fn ident(&mut self) -> Result<(), LexError> {
        let mut first = true;
        while let Some(c) = self.peek() {
            if c == '\\' {
                self.bump();
                if self.peek() != Some('u') {
                    return Err(self.error("invalid escape in identifier"));
                }
                self.bump();
                self.unicode_escape_body()?;
            } else if (first && is_ident_start(c)) || (!first && is_ident_part(c)) {
                self.bump();
            } else {
                break;
            }
            first = false;
        }
        Ok(())
    }

    fn unicode_escape_body(&mut self) -> Result<(), LexError> {
        if self.peek() == Some('{') {
            self.bump();
            let mut n = 0;
            while self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                self.bump();
                n += 1;
            }
            if n == 0 || self.bump() != Some('}') {
                return Err(self.error("malformed unicode escape"));
            }
        } else {
            for _ in 0..4 {
                if !self.bump().is_some_and(|c| c.is_ascii_hexdigit()) {
                    return Err(self.error("malformed unicode escape"));
                }
            }
        }
        Ok(())
    }

    fn digits(&mut self, radix: u32) -> usize {
        let mut n = 0;
        while let Some(c) = self.peek() {
            if c.is_digit(radix) || (c == '_' && n > 0) {
                self.bump();
                n += 1;
            } else {
                break;
            }
        }
        n
    }

    fn number(&mut self) -> Result<(), LexError> {
        let c = self.peek().unwrap_or('0');
        let prefixed = c == '0' && matches!(self.peek_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if prefixed {
            self.bump();
            let radix = match self.bump() {
                Some('x' | 'X') => 16,
                Some('o' | 'O') => 8,
                _ => 2,
            };
            if self.digits(radix) == 0 {
                return Err(self.error("missing digits after radix prefix"));
            }
            if self.peek() == Some('n') {
                self.bump();
            }
        } else {
            self.digits(10);
            let mut fractional = false;
            if self.peek() == Some('.') {
                self.bump();
                self.digits(10);
                fractional = true;
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                if self.digits(10) == 0 {
                    return Err(self.error("missing exponent digits"));
                }
                fractional = true;
            }
            if !fractional && self.peek() == Some('n') {
                self.bump();
            }
        }
        if self.peek().is_some_and(|c| is_ident_start(c) || c.is_ascii_digit()) {
            return Err(self.error("identifier starts immediately after numeric literal"));
        }
        Ok(())
    }

    fn string(&mut self, quote: char) -> Result<(), LexError> {
        self.bump();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some(c) if c == quote => return Ok(()),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(self.error("unterminated string literal"));
                    }
                }
                Some('\n' | '\r') => return Err(self.error("unterminated string literal")),
                Some(_) => {}
            }
        }
    }

    /// Scans template characters after an opening `` ` `` or a closing `}`.
    fn template_chars(&mut self, opened_by_backtick: bool) -> Result<TokenKind, LexError> {
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated template literal")),
                Some('`') => return Ok(if opened_by_backtick { TokenKind::Template } else { TokenKind::TemplateTail }),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(self.error("unterminated template literal"));
                    }
                }
                Some('$') if self.peek() == Some('{') => {
                    self.bump();
                    self.braces.push(true);
                    return Ok(if opened_by_backtick { TokenKind::TemplateHead } else { TokenKind::TemplateMiddle });
                }
                Some(_) => {}
            }
        }
    }

    fn regex(&mut self) -> Result<(), LexError> {
        self.bump();
        let mut in_class = false;
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated regular expression")),
                Some(c) if is_line_terminator(c) => return Err(self.error("unterminated regular expression")),
                Some('\\') => match self.bump() {
                    None => return Err(self.error("unterminated regular expression")),
                    Some(c) if is_line_terminator(c) => return Err(self.error("unterminated regular expression")),
                    Some(_) => {}
                },
                Some('[') => in_class = true,
                Some(']') => in_class = false,
                Some('/') if !in_class => break,
                Some(_) => {}
            }
        }
        while self.peek().is_some_and(is_ident_part) {
            self.bump();
        }
        Ok(())
    }
}

/// Splits `src` into tokens, dropping whitespace and comments.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    Lexer { src, pos: 0, line: 1, newline_before: false, tokens: Vec::new(), braces: Vec::new() }.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, &str)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn basic_statement() {
        assert_eq!(
            kinds("var a = 1;"),
            vec![
                (TokenKind::Keyword, "var"),
                (TokenKind::Ident, "a"),
                (TokenKind::Punct, "="),
                (TokenKind::Number, "1"),
                (TokenKind::Punct, ";"),
            ]
        );
    }

    #[test]
    fn regex_versus_division() {
        let t = kinds("x = a / b / c; y = /ab+c/gi.test(s);");
        assert_eq!(t.iter().filter(|(k, _)| *k == TokenKind::Regex).count(), 1);
        assert!(t.contains(&(TokenKind::Regex, "/ab+c/gi")));
        assert_eq!(kinds("/[/]/.source")[0], (TokenKind::Regex, "/[/]/"));
    }

    #[test]
    fn templates_with_substitutions() {
        let t = kinds("`a${ {b: 1}.b }c${d}e`");
        assert_eq!(t.first().unwrap().0, TokenKind::TemplateHead);
        assert_eq!(t.last().unwrap().0, TokenKind::TemplateTail);
        assert!(t.iter().any(|(k, _)| *k == TokenKind::TemplateMiddle));
        assert_eq!(kinds("`plain`"), vec![(TokenKind::Template, "`plain`")]);
    }

    #[test]
    fn numbers() {
        for n in ["0", "0x1F", "1_000", "1.5e-3", ".5", "10n", "0b101", "-1"] {
            let t = tokenize(n).unwrap();
            assert_eq!(t.last().unwrap().kind, TokenKind::Number, "{n}");
        }
        assert!(tokenize("3in x").is_err());
    }

    #[test]
    fn lexical_errors() {
        assert!(tokenize("'abc").is_err());
        assert!(tokenize("\"ab\ncd\"").is_err());
        assert!(tokenize("/* open").is_err());
        assert!(tokenize("`open").is_err());
        assert!(tokenize("x = /abc").is_err());
        assert!(tokenize("a ¤ b").is_err());
    }

    #[test]
    fn comments_and_lines() {
        let t = tokenize("// c\na /* b\n */ c").unwrap();
        assert_eq!(t.len(), 2);
        assert!(t[0].newline_before);
        assert_eq!(t[0].line, 2);
        assert!(t[1].newline_before);
        assert_eq!(t[1].line, 3);
    }
}
