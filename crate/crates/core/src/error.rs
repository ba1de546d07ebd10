//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unbound chart variable u{index} at {line}:{col} (chart dimension is {chart_dim})")]
    UnboundVariable {
        index: usize,
        line: usize,
        col: usize,
        chart_dim: usize,
    },

    #[error("expected {expected} output expressions, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("parameter '{name}' is not bound")]
    UnboundParameter { name: String },

    #[error("domain violation in {op} at {line}:{col}: {msg}")]
    Domain {
        op: &'static str,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("chart point outside declared domain on axis {axis}: {value} not in [{lo}, {hi}]")]
    OutsideDomain {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("finite-difference stencil leaves the chart domain on axis {axis}")]
    StencilOutOfDomain { axis: usize },

    #[error("point is off the ambient manifold: | |x|^2 - 1/c | = {deviation:.3e}")]
    OffManifold { deviation: f64 },

    #[error("vector is not tangent at the given point: radial component {radial:.3e}")]
    NotTangent { radial: f64 },

    #[error("immersion is rank-deficient at the chart point: sigma_min/sigma_max = {ratio:.3e}")]
    RankDeficient { ratio: f64 },

    #[error("normal frame completion failed: found {found} of {needed} directions")]
    FrameCompletion { found: usize, needed: usize },

    #[error("hypothesis violated: {what}")]
    HypothesisViolation { what: String },

    #[error("precondition not met: {what}")]
    Precondition { what: String },

    #[error("invalid argument: {what}")]
    InvalidArgument { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
