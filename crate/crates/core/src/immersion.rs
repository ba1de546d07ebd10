//! A chart-parametrized immersion into `S^n(c) x R`.

use std::collections::BTreeMap;

use crate::ambient::AmbientSpace;
use crate::error::{Error, Result};
use crate::exprdsl::{ExpressionSet, Jet2, Params};

/// An immersion `psi: U subset R^m -> R^{n+2}` whose image lies on the
/// ambient model, together with its chart domain box and parameter bindings.
/// Immutable after construction; evaluation is pure.
#[derive(Debug, Clone)]
pub struct ImmersionSpec {
    ambient: AmbientSpace,
    exprs: ExpressionSet,
    params: Params,
    domain: Vec<(f64, f64)>,
}

impl ImmersionSpec {
    pub fn new(
        ambient: AmbientSpace,
        exprs: ExpressionSet,
        params: Params,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if exprs.n_outputs() != ambient.dim() {
            return Err(Error::InvalidArgument {
                what: format!(
                    "expression set has {} outputs, ambient needs {}",
                    exprs.n_outputs(),
                    ambient.dim()
                ),
            });
        }
        if domain.len() != exprs.chart_dim() {
            return Err(Error::InvalidArgument {
                what: format!(
                    "domain has {} axes, chart has {}",
                    domain.len(),
                    exprs.chart_dim()
                ),
            });
        }
        for (axis, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument {
                    what: format!("bad domain interval [{lo}, {hi}] on axis {axis}"),
                });
            }
        }
        for name in exprs.param_names() {
            if !params.contains_key(name) {
                return Err(Error::UnboundParameter { name: name.clone() });
            }
        }
        Ok(ImmersionSpec {
            ambient,
            exprs,
            params,
            domain,
        })
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    pub fn chart_dim(&self) -> usize {
        self.exprs.chart_dim()
    }

    pub fn exprs(&self) -> &ExpressionSet {
        &self.exprs
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Rebind parameters (e.g. a vertical translation); fails for unknown names.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        if !self.params.contains_key(name) {
            return Err(Error::UnboundParameter { name: name.into() });
        }
        let mut next = self.clone();
        next.params.insert(name.into(), value);
        Ok(next)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn min_extent(&self) -> f64 {
        self.domain
            .iter()
            .map(|&(lo, hi)| hi - lo)
            .fold(f64::INFINITY, f64::min)
    }

    fn check_domain(&self, u: &[f64]) -> Result<()> {
        for (axis, (&v, &(lo, hi))) in u.iter().zip(self.domain.iter()).enumerate() {
            let slack = 1e-12 * (hi - lo);
            if !(v >= lo - slack && v <= hi + slack) {
                return Err(Error::OutsideDomain {
                    axis,
                    value: v,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// True when the whole box `u +- radius` (per axis) stays inside the chart.
    pub fn stencil_fits(&self, u: &[f64], radius: f64) -> Result<()> {
        for (axis, (&v, &(lo, hi))) in u.iter().zip(self.domain.iter()).enumerate() {
            let slack = 1e-12 * (hi - lo);
            if v - radius < lo - slack || v + radius > hi + slack {
                return Err(Error::StencilOutOfDomain { axis });
            }
        }
        Ok(())
    }

    /// Evaluate the order-2 jet of the immersion at `u`.
    pub fn eval(&self, u: &[f64]) -> Result<Jet2> {
        self.check_domain(u)?;
        self.exprs.eval_jet2(u, &self.params)
    }
}
