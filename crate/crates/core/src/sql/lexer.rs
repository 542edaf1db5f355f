//! Tokenizer for the SQLite query subset.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Bare word; keyword recognition happens in the parser.
    Word(String),
    /// `"x"`, `` `x` `` or `[x]`.
    QuotedIdent(String),
    Str(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Semicolon,
    Star,
    Plus,
    Minus,
    Slash,
    Percent,
    Concat,
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    BitAnd,
    BitOr,
    ShiftLeft,
    ShiftRight,
    Tilde,
    Param,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "{w}"),
            Tok::QuotedIdent(w) => write!(f, "\"{w}\""),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::Number(n) => write!(f, "{n}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Comma => f.write_str(","),
            Tok::Dot => f.write_str("."),
            Tok::Semicolon => f.write_str(";"),
            Tok::Star => f.write_str("*"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Slash => f.write_str("/"),
            Tok::Percent => f.write_str("%"),
            Tok::Concat => f.write_str("||"),
            Tok::Eq => f.write_str("="),
            Tok::NotEq => f.write_str("<>"),
            Tok::Lt => f.write_str("<"),
            Tok::LtEq => f.write_str("<="),
            Tok::Gt => f.write_str(">"),
            Tok::GtEq => f.write_str(">="),
            Tok::BitAnd => f.write_str("&"),
            Tok::BitOr => f.write_str("|"),
            Tok::ShiftLeft => f.write_str("<<"),
            Tok::ShiftRight => f.write_str(">>"),
            Tok::Tilde => f.write_str("~"),
            Tok::Param => f.write_str("?"),
        }
    }
}

/// A token with its character offset in the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub offset: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // comments
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            loop {
                if i >= chars.len() {
                    return Err(LexError {
                        message: "unterminated block comment".into(),
                        offset: start,
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let tok = match c {
            '\'' => {
                let (s, next) = quoted(&chars, i, '\'', '\'')?;
                i = next;
                Tok::Str(s)
            }
            '"' => {
                let (s, next) = quoted(&chars, i, '"', '"')?;
                i = next;
                Tok::QuotedIdent(s)
            }
            '`' => {
                let (s, next) = quoted(&chars, i, '`', '`')?;
                i = next;
                Tok::QuotedIdent(s)
            }
            '[' => {
                let (s, next) = quoted(&chars, i, '[', ']')?;
                i = next;
                Tok::QuotedIdent(s)
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let (n, next) = number(&chars, i)?;
                i = next;
                Tok::Number(n)
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                    i += 1;
                }
                Tok::Word(chars[start..i].iter().collect())
            }
            _ => {
                let two = chars.get(i + 1).copied();
                let (tok, len) = match (c, two) {
                    ('|', Some('|')) => (Tok::Concat, 2),
                    ('=', Some('=')) => (Tok::Eq, 2),
                    ('!', Some('=')) => (Tok::NotEq, 2),
                    ('<', Some('>')) => (Tok::NotEq, 2),
                    ('<', Some('=')) => (Tok::LtEq, 2),
                    ('>', Some('=')) => (Tok::GtEq, 2),
                    ('<', Some('<')) => (Tok::ShiftLeft, 2),
                    ('>', Some('>')) => (Tok::ShiftRight, 2),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    (',', _) => (Tok::Comma, 1),
                    ('.', _) => (Tok::Dot, 1),
                    (';', _) => (Tok::Semicolon, 1),
                    ('*', _) => (Tok::Star, 1),
                    ('+', _) => (Tok::Plus, 1),
                    ('-', _) => (Tok::Minus, 1),
                    ('/', _) => (Tok::Slash, 1),
                    ('%', _) => (Tok::Percent, 1),
                    ('=', _) => (Tok::Eq, 1),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', _) => (Tok::Gt, 1),
                    ('&', _) => (Tok::BitAnd, 1),
                    ('|', _) => (Tok::BitOr, 1),
                    ('~', _) => (Tok::Tilde, 1),
                    ('?', _) => (Tok::Param, 1),
                    _ => {
                        return Err(LexError {
                            message: format!("unexpected character {c:?}"),
                            offset: start,
                        })
                    }
                };
                i += len;
                tok
            }
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

fn quoted(chars: &[char], start: usize, open: char, close: char) -> Result<(String, usize), LexError> {
    debug_assert_eq!(chars[start], open);
    let mut s = String::new();
    let mut i = start + 1;
    loop {
        match chars.get(i) {
            None => {
                return Err(LexError {
                    message: format!("unterminated {open}-quoted token"),
                    offset: start,
                })
            }
            Some(&c) if c == close => {
                // doubled closing quote escapes itself, except for brackets
                if open == close && chars.get(i + 1) == Some(&close) {
                    s.push(close);
                    i += 2;
                } else {
                    return Ok((s, i + 1));
                }
            }
            Some(&c) => {
                s.push(c);
                i += 1;
            }
        }
    }
}

fn number(chars: &[char], start: usize) -> Result<(String, usize), LexError> {
    let mut i = start;
    if chars[i] == '0' && matches!(chars.get(i + 1), Some('x') | Some('X')) {
        i += 2;
        while i < chars.len() && chars[i].is_ascii_hexdigit() {
            i += 1;
        }
    } else {
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if chars.get(i) == Some(&'.') {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
        if matches!(chars.get(i), Some('e') | Some('E')) {
            let mut j = i + 1;
            if matches!(chars.get(j), Some('+') | Some('-')) {
                j += 1;
            }
            if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                i = j;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
    }
    if chars.get(i).is_some_and(|c| c.is_alphabetic() || *c == '_') {
        return Err(LexError {
            message: "malformed numeric literal".into(),
            offset: start,
        });
    }
    Ok((chars[start..i].iter().collect(), i))
}
