//! Expression language for chart-parametrized immersions.
//!
//! An [`ExpressionSet`] holds one expression per ambient coordinate and
//! evaluates them with exact second-order jets (value, gradient, Hessian)
//! by forward-mode automatic differentiation. Sets are immutable after
//! parsing and evaluation is a pure function of its arguments.

mod ast;
mod jet;
mod lexer;
mod parser;

pub use ast::{BinaryOp, Expr, ExprKind, Span, UnaryOp};
pub use jet::ScalarJet2;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use ast::ExprPrinter;
use jet::JetFault;

/// Parameter bindings by name.
pub type Params = BTreeMap<String, f64>;

/// Second-order jet of a vector-valued map at a chart point: value in
/// `R^N`, first partials (`N x m`), and per-coordinate Hessians (`m x m`,
/// symmetric by construction).
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub value: DVector<f64>,
    pub grad: DMatrix<f64>,
    pub hess: Vec<DMatrix<f64>>,
}

impl Jet2 {
    /// Second partials of all coordinates in chart directions (i, j), as a
    /// vector in `R^N`.
    pub fn hess_vector(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.value.len(), |o, _| self.hess[o][(i, j)])
    }
}

/// A parsed, immutable list of `N` output expressions over `m` chart
/// variables and a set of named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionSet {
    exprs: Vec<Expr>,
    chart_dim: usize,
    param_names: Vec<String>,
}

/// Parse `source` into an expression set with exactly `n_outputs` outputs.
///
/// Outputs are separated by commas or newlines; `#` starts a comment.
pub fn parse(source: &str, chart_dim: usize, n_outputs: usize) -> Result<ExpressionSet> {
    if source.trim().is_empty() {
        return Err(Error::Syntax {
            line: 1,
            col: 1,
            msg: "empty source".into(),
        });
    }
    if chart_dim < 1 {
        return Err(Error::InvalidArgument {
            what: "chart dimension must be at least 1".into(),
        });
    }
    if n_outputs < 3 {
        return Err(Error::InvalidArgument {
            what: "output dimension must be at least 3".into(),
        });
    }
    let tokens = lexer::tokenize(source)?;
    let mut parser = parser::Parser::new(&tokens, chart_dim);
    let exprs = parser.parse_list()?;
    if exprs.len() != n_outputs {
        return Err(Error::ArityMismatch {
            expected: n_outputs,
            found: exprs.len(),
        });
    }
    Ok(ExpressionSet {
        exprs,
        chart_dim,
        param_names: parser.param_names,
    })
}

impl ExpressionSet {
    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn n_outputs(&self) -> usize {
        self.exprs.len()
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    /// Evaluate value, gradient, and Hessian of every output at `u`.
    pub fn eval_jet2(&self, u: &[f64], params: &Params) -> Result<Jet2> {
        if u.len() != self.chart_dim {
            return Err(Error::InvalidArgument {
                what: format!(
                    "chart point has {} coordinates, expected {}",
                    u.len(),
                    self.chart_dim
                ),
            });
        }
        let mut values = Vec::with_capacity(self.param_names.len());
        for name in &self.param_names {
            match params.get(name) {
                Some(v) => values.push(*v),
                None => {
                    return Err(Error::UnboundParameter { name: name.clone() });
                }
            }
        }
        let n = self.exprs.len();
        let m = self.chart_dim;
        let mut value = DVector::zeros(n);
        let mut grad = DMatrix::zeros(n, m);
        let mut hess = Vec::with_capacity(n);
        for (o, expr) in self.exprs.iter().enumerate() {
            let jet = eval_expr(expr, u, &values)?;
            value[o] = jet.val;
            for k in 0..m {
                grad[(o, k)] = jet.grad[k];
            }
            hess.push(jet.hess);
        }
        Ok(Jet2 { value, grad, hess })
    }

    /// Render the set back to parseable source, one output per line.
    pub fn to_source(&self) -> String {
        self.exprs
            .iter()
            .map(|e| {
                ExprPrinter {
                    expr: e,
                    params: &self.param_names,
                }
                .to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for ExpressionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_source())
    }
}

fn eval_expr(expr: &Expr, u: &[f64], params: &[f64]) -> Result<ScalarJet2> {
    let m = u.len();
    let fault = |f: JetFault| Error::Domain {
        op: f.op(),
        line: expr.span.line,
        col: expr.span.col,
        msg: f.message().into(),
    };
    match &expr.kind {
        ExprKind::Constant(v) => Ok(ScalarJet2::constant(*v, m)),
        ExprKind::Var(i) => Ok(ScalarJet2::variable(u[*i], *i, m)),
        ExprKind::Param(i) => Ok(ScalarJet2::constant(params[*i], m)),
        ExprKind::Unary(op, inner) => {
            let x = eval_expr(inner, u, params)?;
            match op {
                UnaryOp::Neg => Ok(x.neg()),
                UnaryOp::Sin => Ok(x.sin()),
                UnaryOp::Cos => Ok(x.cos()),
                UnaryOp::Exp => Ok(x.exp()),
                UnaryOp::Sqrt => x.sqrt().map_err(fault),
                UnaryOp::Log => x.log().map_err(fault),
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let a = eval_expr(lhs, u, params)?;
            match op {
                BinaryOp::Add => Ok(a.add(&eval_expr(rhs, u, params)?)),
                BinaryOp::Sub => Ok(a.sub(&eval_expr(rhs, u, params)?)),
                BinaryOp::Mul => Ok(a.mul(&eval_expr(rhs, u, params)?)),
                BinaryOp::Div => a.div(&eval_expr(rhs, u, params)?).map_err(fault),
                BinaryOp::Pow => {
                    // constant exponents get the direct rule so integer powers
                    // of negative bases stay defined
                    if let ExprKind::Constant(k) = rhs.kind {
                        a.powc(k).map_err(fault)
                    } else if let ExprKind::Unary(UnaryOp::Neg, inner) = &rhs.kind {
                        if let ExprKind::Constant(k) = inner.kind {
                            a.powc(-k).map_err(fault)
                        } else {
                            a.pow(&eval_expr(rhs, u, params)?).map_err(fault)
                        }
                    } else {
                        a.pow(&eval_expr(rhs, u, params)?).map_err(fault)
                    }
                }
            }
        }
    }
}

/// A DSL file: a header line
/// `chart m=<int> outputs N=<int> domain [a1,b1]x...x[am,bm]`
/// followed by one output expression per line.
#[derive(Debug, Clone)]
pub struct DslFile {
    pub exprs: ExpressionSet,
    pub domain: Vec<(f64, f64)>,
}

pub fn parse_dsl_file(text: &str) -> Result<DslFile> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((idx, line)) => {
                let stripped = strip_comment(line).trim().to_string();
                if !stripped.is_empty() {
                    break (idx, stripped);
                }
            }
            None => {
                return Err(Error::Syntax {
                    line: 1,
                    col: 1,
                    msg: "missing header line".into(),
                })
            }
        }
    };
    let (header_idx, header_line) = header;
    let (m, n, domain) = parse_header(&header_line, header_idx + 1)?;
    let body: String = lines
        .map(|(_, line)| line)
        .collect::<Vec<_>>()
        .join("\n");
    let exprs = parse(&body, m, n)?;
    if domain.len() != m {
        return Err(Error::Syntax {
            line: header_idx + 1,
            col: 1,
            msg: format!("domain has {} axes, chart has {m}", domain.len()),
        });
    }
    Ok(DslFile { exprs, domain })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize, Vec<(f64, f64)>)> {
    let err = |msg: String| Error::Syntax {
        line: lineno,
        col: 1,
        msg,
    };
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != "chart" || parts[2] != "outputs" || parts[4] != "domain" {
        return Err(err(
            "header must be 'chart m=<int> outputs N=<int> domain [a,b]x...'".into(),
        ));
    }
    let m: usize = parts[1]
        .strip_prefix("m=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(format!("bad chart dimension '{}'", parts[1])))?;
    let n: usize = parts[3]
        .strip_prefix("N=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(format!("bad output dimension '{}'", parts[3])))?;
    let mut domain = Vec::new();
    for axis in parts[5].split('x') {
        let inner = axis
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| err(format!("bad domain interval '{axis}'")))?;
        let mut ends = inner.split(',');
        let lo: f64 = ends
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(format!("bad domain interval '{axis}'")))?;
        let hi: f64 = ends
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(format!("bad domain interval '{axis}'")))?;
        if ends.next().is_some() || !(lo < hi) {
            return Err(err(format!("bad domain interval '{axis}'")));
        }
        domain.push((lo, hi));
    }
    Ok((m, n, domain))
}
