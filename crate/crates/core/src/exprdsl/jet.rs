//! Second-order forward-mode jets.
//!
//! A [`ScalarJet2`] carries a value, its gradient with respect to the chart
//! variables, and the full Hessian. All chain rules are exact; the Hessian is
//! filled on the upper triangle and mirrored so symmetry holds bitwise.

use nalgebra::{DMatrix, DVector};

/// Domain failures raised by jet arithmetic; the evaluator attaches spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetFault {
    DivisionByZero,
    SqrtNonPositive,
    LogNonPositive,
    PowNonPositiveBase,
}

impl JetFault {
    pub fn op(self) -> &'static str {
        match self {
            JetFault::DivisionByZero => "/",
            JetFault::SqrtNonPositive => "sqrt",
            JetFault::LogNonPositive => "log",
            JetFault::PowNonPositiveBase => "^",
        }
    }

    pub fn message(self) -> &'static str {
        match self {
            JetFault::DivisionByZero => "division by zero",
            JetFault::SqrtNonPositive => "sqrt of a non-positive value",
            JetFault::LogNonPositive => "log of a non-positive value",
            JetFault::PowNonPositiveBase => "non-positive base with a non-constant exponent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarJet2 {
    pub val: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl ScalarJet2 {
    pub fn constant(val: f64, m: usize) -> Self {
        ScalarJet2 {
            val,
            grad: DVector::zeros(m),
            hess: DMatrix::zeros(m, m),
        }
    }

    pub fn variable(val: f64, index: usize, m: usize) -> Self {
        let mut grad = DVector::zeros(m);
        grad[index] = 1.0;
        ScalarJet2 {
            val,
            grad,
            hess: DMatrix::zeros(m, m),
        }
    }

    fn dims(&self) -> usize {
        self.grad.len()
    }

    /// Chain rule for a scalar function with first and second derivative at
    /// the current value: out = phi(self).
    fn compose(&self, value: f64, d1: f64, d2: f64) -> ScalarJet2 {
        let m = self.dims();
        let grad = &self.grad * d1;
        let mut hess = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let h = d2 * self.grad[i] * self.grad[j] + d1 * self.hess[(i, j)];
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
        }
        ScalarJet2 { val: value, grad, hess }
    }

    pub fn neg(&self) -> ScalarJet2 {
        ScalarJet2 {
            val: -self.val,
            grad: -&self.grad,
            hess: -&self.hess,
        }
    }

    pub fn add(&self, rhs: &ScalarJet2) -> ScalarJet2 {
        ScalarJet2 {
            val: self.val + rhs.val,
            grad: &self.grad + &rhs.grad,
            hess: &self.hess + &rhs.hess,
        }
    }

    pub fn sub(&self, rhs: &ScalarJet2) -> ScalarJet2 {
        ScalarJet2 {
            val: self.val - rhs.val,
            grad: &self.grad - &rhs.grad,
            hess: &self.hess - &rhs.hess,
        }
    }

    pub fn mul(&self, rhs: &ScalarJet2) -> ScalarJet2 {
        let m = self.dims();
        let grad = &self.grad * rhs.val + &rhs.grad * self.val;
        let mut hess = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let h = self.hess[(i, j)] * rhs.val
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.val * rhs.hess[(i, j)];
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
        }
        ScalarJet2 {
            val: self.val * rhs.val,
            grad,
            hess,
        }
    }

    pub fn recip(&self) -> Result<ScalarJet2, JetFault> {
        if self.val == 0.0 {
            return Err(JetFault::DivisionByZero);
        }
        let inv = 1.0 / self.val;
        Ok(self.compose(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn div(&self, rhs: &ScalarJet2) -> Result<ScalarJet2, JetFault> {
        Ok(self.mul(&rhs.recip()?))
    }

    pub fn sin(&self) -> ScalarJet2 {
        let (s, c) = self.val.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> ScalarJet2 {
        let (s, c) = self.val.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn exp(&self) -> ScalarJet2 {
        let e = self.val.exp();
        self.compose(e, e, e)
    }

    pub fn sqrt(&self) -> Result<ScalarJet2, JetFault> {
        if self.val <= 0.0 {
            // at exactly zero the derivative is singular; reject as a domain fault
            return Err(JetFault::SqrtNonPositive);
        }
        let s = self.val.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * self.val)))
    }

    pub fn log(&self) -> Result<ScalarJet2, JetFault> {
        if self.val <= 0.0 {
            return Err(JetFault::LogNonPositive);
        }
        let inv = 1.0 / self.val;
        Ok(self.compose(self.val.ln(), inv, -inv * inv))
    }

    /// Power with a constant exponent: x^k via the direct chain rule. Works
    /// for negative bases when k is an integer.
    pub fn powc(&self, k: f64) -> Result<ScalarJet2, JetFault> {
        if k == 0.0 {
            return Ok(ScalarJet2::constant(1.0, self.dims()));
        }
        let integer = k.fract() == 0.0 && k.abs() < 1e15;
        if integer {
            let ki = k as i32;
            if self.val == 0.0 && ki < 0 {
                return Err(JetFault::DivisionByZero);
            }
            let value = self.val.powi(ki);
            let d1 = if ki >= 1 || self.val != 0.0 {
                k * self.val.powi(ki - 1)
            } else {
                0.0
            };
            let d2 = if ki >= 2 || self.val != 0.0 {
                k * (k - 1.0) * self.val.powi(ki - 2)
            } else {
                0.0
            };
            return Ok(self.compose(value, d1, d2));
        }
        if self.val <= 0.0 {
            return Err(JetFault::PowNonPositiveBase);
        }
        let value = self.val.powf(k);
        let d1 = k * self.val.powf(k - 1.0);
        let d2 = k * (k - 1.0) * self.val.powf(k - 2.0);
        Ok(self.compose(value, d1, d2))
    }

    /// General power with a non-constant exponent: exp(e * log(b)), b > 0.
    pub fn pow(&self, exponent: &ScalarJet2) -> Result<ScalarJet2, JetFault> {
        if self.val <= 0.0 {
            return Err(JetFault::PowNonPositiveBase);
        }
        let ln = self.log()?;
        Ok(exponent.mul(&ln).exp())
    }
}
