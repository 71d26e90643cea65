//! Tokenizer for the supported SQL dialect subset. Keywords are recognized
//! later, at parse time, so any non-reserved word can serve as an identifier
//! (KaggleDBQA has columns named `match` and `year`).

use super::SqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Bare word: identifier or keyword, resolved by the parser.
    Word(String),
    /// Quoted identifier: `"x"`, `[x]`, or `` `x` ``. An empty double-quoted
    /// token is handed to the parser, which treats it as an empty string
    /// literal (the SQLite fallback real-world gold answers rely on).
    Quoted(String),
    Str(String),
    Number(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Semi,
    Star,
    Plus,
    Minus,
    Slash,
    Percent,
    Concat,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub offset: usize,
}

pub fn tokenize(input: &str) -> Result<Vec<Token>, SqlError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'-') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let close = input[i + 2..].find("*/").ok_or(SqlError::Syntax {
                    offset: start,
                    message: "unterminated block comment".into(),
                })?;
                i += 2 + close + 2;
            }
            b'\'' => {
                let (text, next) = read_quoted(input, i, '\'')?;
                tokens.push(Token {
                    kind: TokenKind::Str(text),
                    offset: start,
                });
                i = next;
            }
            b'"' => {
                let (text, next) = read_quoted(input, i, '"')?;
                tokens.push(Token {
                    kind: TokenKind::Quoted(text),
                    offset: start,
                });
                i = next;
            }
            b'`' => {
                let (text, next) = read_quoted(input, i, '`')?;
                tokens.push(Token {
                    kind: TokenKind::Quoted(text),
                    offset: start,
                });
                i = next;
            }
            b'[' => {
                let close = input[i + 1..].find(']').ok_or(SqlError::Syntax {
                    offset: start,
                    message: "unterminated bracketed identifier".into(),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Quoted(input[i + 1..i + 1 + close].to_string()),
                    offset: start,
                });
                i += close + 2;
            }
            b'0'..=b'9' => {
                i = read_number(bytes, i);
                tokens.push(Token {
                    kind: TokenKind::Number(input[start..i].to_string()),
                    offset: start,
                });
            }
            b'.' if bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                i = read_number(bytes, i + 1);
                tokens.push(Token {
                    kind: TokenKind::Number(input[start..i].to_string()),
                    offset: start,
                });
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Word(input[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let (kind, len) = match (b, bytes.get(i + 1).copied()) {
                    (b',', _) => (TokenKind::Comma, 1),
                    (b'.', _) => (TokenKind::Dot, 1),
                    (b'(', _) => (TokenKind::LParen, 1),
                    (b')', _) => (TokenKind::RParen, 1),
                    (b';', _) => (TokenKind::Semi, 1),
                    (b'*', _) => (TokenKind::Star, 1),
                    (b'+', _) => (TokenKind::Plus, 1),
                    (b'-', _) => (TokenKind::Minus, 1),
                    (b'/', _) => (TokenKind::Slash, 1),
                    (b'%', _) => (TokenKind::Percent, 1),
                    (b'|', Some(b'|')) => (TokenKind::Concat, 2),
                    (b'=', Some(b'=')) => (TokenKind::Eq, 2),
                    (b'=', _) => (TokenKind::Eq, 1),
                    (b'!', Some(b'=')) => (TokenKind::Neq, 2),
                    (b'<', Some(b'>')) => (TokenKind::Neq, 2),
                    (b'<', Some(b'=')) => (TokenKind::Le, 2),
                    (b'<', _) => (TokenKind::Lt, 1),
                    (b'>', Some(b'=')) => (TokenKind::Ge, 2),
                    (b'>', _) => (TokenKind::Gt, 1),
                    _ => {
                        return Err(SqlError::Syntax {
                            offset: start,
                            message: format!(
                                "unexpected character {:?}",
                                input[start..].chars().next().unwrap()
                            ),
                        })
                    }
                };
                tokens.push(Token {
                    kind,
                    offset: start,
                });
                i += len;
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        offset: input.len(),
    });
    Ok(tokens)
}

fn read_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    i
}

/// Reads a quoted run starting at `start` (which holds the quote char);
/// a doubled quote is an escaped quote. Returns (content, index past close).
fn read_quoted(input: &str, start: usize, quote: char) -> Result<(String, usize), SqlError> {
    let bytes = input.as_bytes();
    let q = quote as u8;
    let mut text = String::new();
    let mut i = start + 1;
    while i < bytes.len() {
        if bytes[i] == q {
            if bytes.get(i + 1) == Some(&q) {
                text.push(quote);
                i += 2;
            } else {
                return Ok((text, i + 1));
            }
        } else {
            let ch = input[i..].chars().next().expect("in bounds");
            text.push(ch);
            i += ch.len_utf8();
        }
    }
    Err(SqlError::Syntax {
        offset: start,
        message: format!("unterminated {quote} quote"),
    })
}
