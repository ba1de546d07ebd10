//! Expression tree and a parse-compatible printer.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Constant(f64),
    /// Chart variable, 0-based index (source form `u1`..`um`).
    Var(usize),
    /// Named parameter, index into the expression set's parameter table.
    Param(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
            ExprKind::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
            ExprKind::Unary(UnaryOp::Neg, _) => 3,
            ExprKind::Binary(BinaryOp::Pow, _, _) => 4,
            _ => 5,
        }
    }
}

/// Printing slot: where a child sits relative to its parent. Parenthesization
/// is chosen so that reparsing the printed text reproduces the tree (negated
/// constants and `-x` bases of `^` collapse to equivalent evaluations).
#[derive(Clone, Copy)]
enum Slot {
    Top,
    AddLeft,
    AddRight,
    MulLeft,
    MulRight,
    NegChild,
    PowBase,
    PowExp,
}

fn needs_parens(child: &Expr, slot: Slot) -> bool {
    let p = child.precedence();
    match slot {
        Slot::Top => false,
        Slot::AddLeft => p < 1,
        Slot::AddRight => p < 2,
        Slot::MulLeft => p < 2,
        Slot::MulRight => p < 3,
        // `-a^b` parses as `(-a)^b`, so a Pow child of Neg must keep parens
        Slot::NegChild => p < 3 || matches!(child.kind, ExprKind::Binary(BinaryOp::Pow, _, _)),
        Slot::PowBase => !matches!(p, 3 | 5),
        Slot::PowExp => p < 3,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, expr: &Expr, slot: Slot, params: &[String]) -> fmt::Result {
    let parens = needs_parens(expr, slot);
    if parens {
        write!(f, "(")?;
    }
    match &expr.kind {
        ExprKind::Constant(v) => write!(f, "{v}")?,
        ExprKind::Var(i) => write!(f, "u{}", i + 1)?,
        ExprKind::Param(i) => write!(f, "{}", params[*i])?,
        ExprKind::Unary(UnaryOp::Neg, inner) => {
            write!(f, "-")?;
            write_expr(f, inner, Slot::NegChild, params)?;
        }
        ExprKind::Unary(op, inner) => {
            write!(f, "{}(", op.name())?;
            write_expr(f, inner, Slot::Top, params)?;
            write!(f, ")")?;
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let (sym, ls, rs) = match op {
                BinaryOp::Add => ("+", Slot::AddLeft, Slot::AddRight),
                BinaryOp::Sub => ("-", Slot::AddLeft, Slot::AddRight),
                BinaryOp::Mul => ("*", Slot::MulLeft, Slot::MulRight),
                BinaryOp::Div => ("/", Slot::MulLeft, Slot::MulRight),
                BinaryOp::Pow => ("^", Slot::PowBase, Slot::PowExp),
            };
            write_expr(f, lhs, ls, params)?;
            write!(f, "{sym}")?;
            write_expr(f, rhs, rs, params)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

pub(crate) struct ExprPrinter<'a> {
    pub expr: &'a Expr,
    pub params: &'a [String],
}

impl fmt::Display for ExprPrinter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, Slot::Top, self.params)
    }
}
