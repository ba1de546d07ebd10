//! Recursive-descent parser.
//!
//! Grammar (precedence low to high):
//!
//! ```text
//! list  := expr ((',' | NEWLINE)+ expr)*
//! expr  := term (('+' | '-') term)*
//! term  := power (('*' | '/') power)*
//! power := unary ('^' power)?          -- right-associative
//! unary := '-' unary | atom
//! atom  := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds tighter than the base of `^`: `-u1^2` is `(-u1)^2`.

use super::ast::{BinaryOp, Expr, ExprKind, Span, UnaryOp};
use super::lexer::{Token, TokenKind};
use crate::error::{Error, Result};

pub struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    chart_dim: usize,
    pub param_names: Vec<String>,
}

impl<'a> Parser<'a> {
    pub fn new(tokens: &'a [Token], chart_dim: usize) -> Self {
        Parser {
            tokens,
            pos: 0,
            chart_dim,
            param_names: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn span(tok: &Token) -> Span {
        Span {
            line: tok.line,
            col: tok.col,
        }
    }

    fn error_at(tok: &Token, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: tok.line,
            col: tok.col,
            msg: msg.into(),
        }
    }

    fn skip_separators(&mut self) -> bool {
        let mut seen = false;
        while matches!(self.peek().kind, TokenKind::Newline | TokenKind::Comma) {
            self.advance();
            seen = true;
        }
        seen
    }

    /// Parse a separator-delimited list of expressions until end of input.
    pub fn parse_list(&mut self) -> Result<Vec<Expr>> {
        let mut exprs = Vec::new();
        self.skip_separators();
        while !matches!(self.peek().kind, TokenKind::Eof) {
            exprs.push(self.parse_expr()?);
            let seen = self.skip_separators();
            if !seen && !matches!(self.peek().kind, TokenKind::Eof) {
                let tok = self.peek();
                return Err(Self::error_at(
                    tok,
                    format!("expected ',' or end of line, found {:?}", tok.kind),
                ));
            }
        }
        Ok(exprs)
    }

    pub fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                _ => break,
            };
            let span = Self::span(self.peek());
            self.advance();
            let rhs = self.parse_term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_power()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::Div,
                _ => break,
            };
            let span = Self::span(self.peek());
            self.advance();
            let rhs = self.parse_power()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_unary()?;
        if matches!(self.peek().kind, TokenKind::Caret) {
            let span = Self::span(self.peek());
            self.advance();
            let exp = self.parse_power()?;
            return Ok(Expr::new(
                ExprKind::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)),
                span,
            ));
        }
        Ok(base)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek().kind, TokenKind::Minus) {
            let span = Self::span(self.peek());
            self.advance();
            let inner = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnaryOp::Neg, Box::new(inner)), span));
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number(v) => {
                self.advance();
                Ok(Expr::new(ExprKind::Constant(*v), Self::span(&tok)))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.parse_expr()?;
                if !matches!(self.peek().kind, TokenKind::RParen) {
                    return Err(Self::error_at(self.peek(), "expected ')'"));
                }
                self.advance();
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.advance();
                if matches!(self.peek().kind, TokenKind::LParen) {
                    let op = match name.as_str() {
                        "sin" => UnaryOp::Sin,
                        "cos" => UnaryOp::Cos,
                        "exp" => UnaryOp::Exp,
                        "sqrt" => UnaryOp::Sqrt,
                        "log" => UnaryOp::Log,
                        other => {
                            return Err(Self::error_at(
                                &tok,
                                format!("unknown function '{other}'"),
                            ))
                        }
                    };
                    self.advance(); // '('
                    let arg = self.parse_expr()?;
                    if !matches!(self.peek().kind, TokenKind::RParen) {
                        return Err(Self::error_at(self.peek(), "expected ')'"));
                    }
                    self.advance();
                    return Ok(Expr::new(ExprKind::Unary(op, Box::new(arg)), Self::span(&tok)));
                }
                if let Some(index) = chart_var_index(name) {
                    if index == 0 || index > self.chart_dim {
                        return Err(Error::UnboundVariable {
                            index,
                            line: tok.line,
                            col: tok.col,
                            chart_dim: self.chart_dim,
                        });
                    }
                    return Ok(Expr::new(ExprKind::Var(index - 1), Self::span(&tok)));
                }
                let idx = match self.param_names.iter().position(|p| p == name) {
                    Some(i) => i,
                    None => {
                        self.param_names.push(name.clone());
                        self.param_names.len() - 1
                    }
                };
                Ok(Expr::new(ExprKind::Param(idx), Self::span(&tok)))
            }
            TokenKind::Eof => Err(Self::error_at(&tok, "unexpected end of input")),
            other => Err(Self::error_at(&tok, format!("unexpected token {other:?}"))),
        }
    }
}

/// `u<k>` with k all digits is a chart variable; anything else is a parameter.
fn chart_var_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('u')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}
