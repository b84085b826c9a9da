//! Finite polynomial sums with exact rational coefficients, evaluated through
//! the precision-escalating kernel driver.

use crate::exact::ExactRational;
use crate::precision::{accumulate, evaluate, Kernel, Partial, Real};

/// The polynomial variable, as a function of the evaluation point `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Variable {
    /// `x² - x`
    XxMinusX,
    /// `x² + x`
    XxPlusX,
    /// `(1 - 2x)²`
    OneMinusTwoXSq,
    /// `(1 + 2x)²`
    OnePlusTwoXSq,
    /// `(x - 1/2)²`
    XMinusHalfSq,
}

impl Variable {
    pub(crate) fn at<T: Real>(self, ctx: T::Ctx, x: f64) -> T {
        let r = |v: f64| T::from_f64(ctx, v);
        let x = r(x);
        match self {
            Variable::XxMinusX => x.clone() * x.clone() - x,
            Variable::XxPlusX => x.clone() * x.clone() + x,
            Variable::OneMinusTwoXSq => {
                let w = r(1.0) - r(2.0) * x;
                w.clone() * w
            }
            Variable::OnePlusTwoXSq => {
                let w = r(1.0) + r(2.0) * x;
                w.clone() * w
            }
            Variable::XMinusHalfSq => {
                let w = x - r(0.5);
                w.clone() * w
            }
        }
    }
}

pub(crate) struct RationalPoly<'a> {
    pub coeffs: &'a [ExactRational],
    pub var: Variable,
    pub x: f64,
}

impl Kernel for RationalPoly<'_> {
    fn run<T: Real>(&self, ctx: T::Ctx, _tol: f64) -> Partial {
        let v: T = self.var.at(ctx, self.x);
        let mut acc = T::from_f64(ctx, 0.0);
        let mut mag = 0.0;
        let mut power = T::from_f64(ctx, 1.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                power = power * v.clone();
            }
            let term = T::from_ratio(ctx, c.numer(), c.denom()) * power.clone();
            accumulate(&mut acc, &mut mag, &term);
        }
        Partial {
            sums: vec![acc.to_f64()],
            magnitudes: vec![mag],
            terms: self.coeffs.len(),
            converged: true,
            error_estimate: 0.0,
        }
    }
}

/// `sum_k coeffs[k] * var(x)^k`, accurate to working precision even when the
/// terms cancel.
pub(crate) fn eval_rational_poly(coeffs: &[ExactRational], var: Variable, x: f64) -> f64 {
    evaluate(&RationalPoly { coeffs, var, x }, 1e-15).sums[0]
}
