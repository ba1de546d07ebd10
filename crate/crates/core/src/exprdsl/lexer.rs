//! Tokenizer for the immersion expression language.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Newline,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = source.chars().peekable();

    while let Some(&ch) = chars.peek() {
        let tok_line = line;
        let tok_col = col;
        match ch {
            '\n' => {
                chars.next();
                tokens.push(Token {
                    kind: TokenKind::Newline,
                    line: tok_line,
                    col: tok_col,
                });
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                // comment to end of line; the newline itself is kept
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                chars.next();
                col += 1;
                let kind = match ch {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    ',' => TokenKind::Comma,
                    _ => unreachable!(),
                };
                tokens.push(Token {
                    kind,
                    line: tok_line,
                    col: tok_col,
                });
            }
            '0'..='9' | '.' => {
                let mut text = String::new();
                let mut seen_dot = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || (c == '.' && !seen_dot) {
                        seen_dot |= c == '.';
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // optional exponent
                if let Some(&c) = chars.peek() {
                    if c == 'e' || c == 'E' {
                        let mut exp = String::new();
                        exp.push(c);
                        let mut lookahead = chars.clone();
                        lookahead.next();
                        let mut consumed = 1usize;
                        if let Some(&sign) = lookahead.peek() {
                            if sign == '+' || sign == '-' {
                                exp.push(sign);
                                lookahead.next();
                                consumed += 1;
                            }
                        }
                        let mut digits = 0usize;
                        while let Some(&d) = lookahead.peek() {
                            if d.is_ascii_digit() {
                                exp.push(d);
                                lookahead.next();
                                consumed += 1;
                                digits += 1;
                            } else {
                                break;
                            }
                        }
                        if digits > 0 {
                            text.push_str(&exp);
                            for _ in 0..consumed {
                                chars.next();
                            }
                            col += consumed;
                        }
                    }
                }
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    line: tok_line,
                    col: tok_col,
                    msg: format!("invalid number literal '{text}'"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    line: tok_line,
                    col: tok_col,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(name),
                    line: tok_line,
                    col: tok_col,
                });
            }
            other => {
                return Err(Error::Syntax {
                    line: tok_line,
                    col: tok_col,
                    msg: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}
